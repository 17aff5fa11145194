"""Coin matrices and Verblunsky coefficient families."""

from fractions import Fraction

import numpy as np
import pytest

from cmvspec import model, torus
from cmvspec.model import CoinSpec, SkewParams, WalkParams


def unit_err(u):
    return np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0])))


class TestCoin:
    def test_identity_coin(self):
        assert np.array_equal(model.coin_matrix(CoinSpec(1.0, 0.0)), np.eye(2))

    def test_pure_swap(self):
        got = model.coin_matrix(CoinSpec(0.0, 1.0))
        assert np.array_equal(got, np.array([[0, 1], [-1, 0]], dtype=complex))

    def test_random_coin_unitary(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            aa = rng.random()
            phr = np.exp(2j * np.pi * rng.random(2))
            c = CoinSpec(aa * phr[0], np.sqrt(1 - aa * aa) * phr[1], rng.random())
            assert unit_err(model.coin_matrix(c)) <= 1e-12

    def test_invalid_norm_rejected(self):
        with pytest.raises(ValueError):
            CoinSpec(1.0, 0.5)


class TestElectricCoefficients:
    p = WalkParams(0.3137, 0.111, CoinSpec(0.6, 0.8, eta=0.07))

    def test_site_zero(self):
        assert model.verblunsky_electric(self.p, 0) == pytest.approx(0.8, abs=1e-15)

    def test_odd_sites_vanish_exactly(self):
        assert all(model.verblunsky_electric(self.p, 2 * n + 1) == 0 for n in range(-20, 20))

    def test_site_two(self):
        expect = 0.8 * torus.phase(-2 * (torus.exact(0.111) + torus.exact(0.07)))
        assert model.verblunsky_electric(self.p, 2) == expect

    def test_site_four_reevaluation_oracle(self):
        # plug n = 2 into the closed form independently
        ang = -(
            (4 - 2) * torus.exact(self.p.omega)
            + 4 * (torus.exact(self.p.theta) + torus.exact(self.p.coin.eta))
        )
        assert model.verblunsky_electric(self.p, 4) == 0.8 * torus.phase(ang)

    def test_even_modulus_exact(self):
        for n in range(-30, 30):
            assert abs(model.verblunsky_electric(self.p, 2 * n)) == pytest.approx(0.8, abs=5e-16)

    def test_conjugate_flag(self):
        for n in (-6, 2, 8):
            got = model.verblunsky_electric(self.p, n, conjugate=True)
            assert got == pytest.approx(np.conj(model.verblunsky_electric(self.p, n)), abs=1e-15)

    def test_large_site_phase_accuracy(self):
        # exact turn arithmetic: angle at site 2n equals the mod-1 reduced closed form
        p = WalkParams(Fraction(355, 1130), Fraction(1, 7), CoinSpec(0.6, 0.8))
        n = 9973
        ang = -((n * n - n) * Fraction(355, 1130) + 2 * n * Fraction(1, 7))
        assert model.verblunsky_electric(p, 2 * n) == 0.8 * torus.phase(ang % 1)


class TestSkewCoefficients:
    sp = SkewParams(3, 0.41421, (0.2, 0.5, 0.13), 0.6, 0.8)

    def test_site_zero_projects_base_point(self):
        assert model.verblunsky_skew(self.sp, 0) == 0.8 * torus.phase(0.13)

    def test_d2_first_iterate(self):
        sp = SkewParams(2, 0.3, (0.25, 0.5), 0.6, 0.8)
        got = model.verblunsky_skew(sp, 2)
        assert got == pytest.approx(0.8 * torus.phase(0.75), abs=1e-15)

    def test_negative_iterate_stepwise_oracle(self):
        x = (Fraction(1, 3), Fraction(2, 7), Fraction(4, 5))
        sp = SkewParams(3, Fraction(1, 9), x, 0.6, 0.8)
        y = x
        for _ in range(2):
            y = torus.skew_step_inv(y, Fraction(1, 9))
        assert model.verblunsky_skew(sp, -4) == 0.8 * torus.phase(y[-1])

    def test_odd_sites_vanish(self):
        assert all(model.verblunsky_skew(self.sp, 2 * n + 1) == 0 for n in range(-10, 10))

    def test_modulus_is_b(self):
        for n in range(-12, 12):
            assert abs(model.verblunsky_skew(self.sp, 2 * n)) == pytest.approx(0.8, abs=5e-16)

    def test_remark_embedding_matches_electric_conjugate(self):
        # d=2 with doubled field at base (2(theta+eta), 0) reproduces the
        # electric family up to conjugation when b is real
        om, th, eta = 0.217, 0.133, 0.071
        p = WalkParams(om, th, CoinSpec(0.6, 0.8, eta=eta))
        base = 2 * (torus.exact(th) + torus.exact(eta))
        sp = SkewParams(2, 2 * torus.exact(om), (base, 0), 0.6, 0.8)
        for n in range(-15, 15):
            skew_val = model.verblunsky_skew(sp, 2 * n)
            elec_val = model.verblunsky_electric(p, 2 * n)
            assert abs(skew_val) == pytest.approx(abs(elec_val), abs=1e-15)
            assert abs(np.conj(skew_val) - elec_val) <= 1e-12


class TestRhoAndBlock:
    def test_rho_values(self):
        assert model.rho(0.0) == 1.0
        assert model.rho(1.0) == 0.0
        assert model.rho(0.6) == pytest.approx(0.8, abs=1e-15)

    def test_rho_domain(self):
        with pytest.raises(ValueError):
            model.rho(1.0 + 1e-6)

    def test_block_alpha_zero(self):
        assert np.array_equal(model.theta_block(0.0), np.array([[0, 1], [1, 0]], dtype=complex))

    def test_block_alpha_one(self):
        assert np.array_equal(model.theta_block(1.0), np.array([[1, 0], [0, -1]], dtype=complex))

    def test_block_unitary(self):
        rng = np.random.default_rng(6)
        for _ in range(30):
            al = rng.random() * np.exp(2j * np.pi * rng.random())
            assert unit_err(model.theta_block(al)) <= 1e-14


class TestSource:
    def test_overrides(self):
        p = WalkParams(0.3, 0.1, CoinSpec(0.6, 0.8))
        src = model.electric_source(p).with_overrides({3: 1.0})
        assert src.alpha(3) == 1.0
        assert src.alpha(5) == 0.0
        assert src.rho(3) == 0.0

    def test_override_modulus_validated(self):
        with pytest.raises(ValueError):
            model.custom_source({0: 2.0})

    def test_custom_default(self):
        src = model.custom_source({1: 0.5j}, default=0.1)
        assert src.alpha(1) == 0.5j
        assert src.alpha(2) == 0.1

    def test_immutability(self):
        src = model.custom_source({0: 0.5})
        src2 = src.with_overrides({0: 1.0})
        assert src.alpha(0) == 0.5 and src2.alpha(0) == 1.0

    def test_skew_params_validation(self):
        with pytest.raises(ValueError):
            SkewParams(1, 0.1, (0.1,), 0.6, 0.8)
        with pytest.raises(ValueError):
            SkewParams(2, 0.1, (0.1,), 0.6, 0.8)
