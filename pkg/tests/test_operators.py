"""Five-diagonal builder tests: walk, CMV (both assembly routes), beta form."""

from fractions import Fraction

import numpy as np
import pytest

from cmvspec import model, operators, torus
from cmvspec.model import CoinSpec, WalkParams
from cmvspec.operators import (
    apply,
    build_cmv_direct,
    build_cmv_product,
    build_walk,
    build_wbeta,
    densify,
    interior_unitarity_residual,
    operator_to_jsonable,
)


def random_alpha_source(rng, lo, hi, max_mod=0.95):
    vals = {}
    for n in range(lo - 4, hi + 4):
        vals[n] = max_mod * rng.random() * np.exp(2j * np.pi * rng.random())
    return model.custom_source(vals)


class TestBuildWalk:
    def test_identity_coin_reduces_to_shift(self):
        p = WalkParams(0.0, 0.0, CoinSpec(1.0, 0.0))
        w = densify(build_walk(p, (-8, 8)))
        # plain conditional shift under the spin-to-lattice identification
        s = np.zeros((16, 16), dtype=complex)
        for r in range(-8, 8):
            if r % 2 == 0 and -8 <= r + 2 < 8:
                s[r + 8, r + 10] = 1.0
            if r % 2 and -8 <= r - 2 < 8:
                s[r + 8, r + 6] = 1.0
        assert np.array_equal(w, s)

    def test_quarter_turn_multiplies_by_i_bitwise(self):
        coin = CoinSpec(0.6 * torus.phase(0.2), 0.8 * torus.phase(0.9), eta=0.31)
        p0 = WalkParams(0.515, 0.123, coin)
        p1 = WalkParams(0.515, torus.exact(0.123) + Fraction(1, 4), coin)
        w0 = build_walk(p0, (-16, 16))
        w1 = build_walk(p1, (-16, 16))
        assert np.array_equal(w1.data, 1j * w0.data)

    def test_global_phase_factoring_general_theta(self):
        coin = CoinSpec(0.6, 0.8, eta=0.11)
        th = 0.2718
        w0 = build_walk(WalkParams(0.777, 0.0, coin), (-32, 32))
        w1 = build_walk(WalkParams(0.777, th, coin), (-32, 32))
        assert np.max(np.abs(w1.data - torus.phase(th) * w0.data)) <= 1e-15

    def test_interior_unitarity_window_128(self):
        rng = np.random.default_rng(2)
        for _ in range(5):
            aa = 0.2 + 0.75 * rng.random()
            coin = CoinSpec(
                aa * np.exp(2j * np.pi * rng.random()),
                np.sqrt(1 - aa * aa) * np.exp(2j * np.pi * rng.random()),
                rng.random(),
            )
            p = WalkParams(rng.random(), rng.random(), coin)
            assert interior_unitarity_residual(build_walk(p, (-64, 64))) <= 1e-12

    def test_row_norms_interior(self):
        p = WalkParams(0.3, 0.05, CoinSpec(0.6, 0.8, eta=0.4))
        w = densify(build_walk(p, (-16, 16)))
        norms = np.linalg.norm(w[4:-4], axis=1)
        assert np.max(np.abs(norms - 1.0)) <= 1e-12

    def test_odd_window_rejected(self):
        with pytest.raises(operators.WindowError):
            build_walk(WalkParams(0.1, 0.0, CoinSpec(0.6, 0.8)), (0, 7))


class TestCmvBuilders:
    def test_free_case_is_two_step_shift(self):
        src = model.custom_source({})
        e = densify(build_cmv_product(src, (-8, 8)))
        expect = np.zeros((16, 16), dtype=complex)
        for j in range(-4, 4):
            r, s = 2 * j + 8, 2 * j + 1 + 8
            if r + 2 < 16:
                expect[r, r + 2] = 1.0
            if s - 2 >= 0:
                expect[s, s - 2] = 1.0  # rho rho at (2j+1, 2j-1)
        assert np.array_equal(e, expect)

    def test_matches_electric_cmv_display(self):
        # the displayed electric CMV matrix, rebuilt entrywise as the oracle
        om, th, eta = 0.477, 0.218, 0.035
        p = WalkParams(om, th, CoinSpec(0.6, 0.8, eta=eta))
        src = model.electric_source(p, conjugate=True)
        e = build_cmv_product(src, (-32, 32))
        d = densify(e)

        def psit(j):
            return float(
                (2 * j * (torus.exact(th) + torus.exact(eta))
                 + (j * j - j) * torus.exact(om)) % 1
            )

        for j in range(-14, 14):
            r, s = 2 * j + 32, 2 * j + 1 + 32
            assert abs(d[r, r - 1] - 0.8 * torus.phase(-psit(j))) <= 1e-14
            assert abs(d[r, r + 2] - 0.6) <= 1e-14
            assert abs(d[s, r - 1] - 0.6) <= 1e-14
            assert abs(d[s, r + 2] + 0.8 * torus.phase(psit(j))) <= 1e-14

    def test_cross_builder_oracle_random(self):
        rng = np.random.default_rng(10)
        for _ in range(25):
            src = random_alpha_source(rng, -32, 32)
            e1 = build_cmv_product(src, (-32, 32))
            e2 = build_cmv_direct(src, (-32, 32))
            assert np.max(np.abs(e1.data - e2.data)) <= 1e-14

    def test_cross_builder_electric(self):
        p = WalkParams(torus.golden_turn(), 0.137, CoinSpec(0.6, 0.8, eta=0.2))
        src = model.electric_source(p)
        e1 = build_cmv_product(src, (-64, 64))
        e2 = build_cmv_direct(src, (-64, 64))
        assert np.max(np.abs(e1.data - e2.data)) <= 1e-14

    def test_interior_unitarity(self):
        rng = np.random.default_rng(4)
        src = random_alpha_source(rng, -32, 32)
        assert interior_unitarity_residual(build_cmv_product(src, (-32, 32))) <= 1e-12

    def test_misaligned_window_rejected(self):
        src = model.custom_source({})
        with pytest.raises(operators.WindowError):
            build_cmv_product(src, (-7, 9))

    def test_sparsity_pattern(self):
        rng = np.random.default_rng(9)
        src = random_alpha_source(rng, -16, 16)
        d = densify(build_cmv_direct(src, (-16, 16)))
        n = 32
        for i in range(n):
            for j in range(n):
                if abs(i - j) > 2:
                    assert d[i, j] == 0.0
                # even rows never reach offset -2; odd rows never reach +2
                if i % 2 == 0 and j == i - 2:
                    assert d[i, j] == 0.0
                if i % 2 == 1 and j == i + 2:
                    assert d[i, j] == 0.0


class TestWBeta:
    def test_zero_beta_unit_a_is_shift(self):
        w = densify(build_wbeta(lambda j: 0.0, 1.0, 0.0, (-8, 8)))
        p = WalkParams(0.0, 0.0, CoinSpec(1.0, 0.0))
        assert np.array_equal(w, densify(build_walk(p, (-8, 8))))

    def test_constant_beta_factors_as_global_phase(self):
        c = 0.2931
        a, b = 0.6 * torus.phase(0.4), 0.8 * torus.phase(0.1)
        w0 = build_wbeta(lambda j: 0.0, a, b, (-16, 16))
        w1 = build_wbeta(lambda j: c, a, b, (-16, 16))
        assert np.max(np.abs(w1.data - torus.phase(c) * w0.data)) <= 1e-15

    def test_accepts_mapping(self):
        betas = {j: 0.1 * j for j in range(-10, 10)}
        w = build_wbeta(betas, 0.6, 0.8, (-8, 8))
        assert densify(w)[8, 8 - 1] == pytest.approx(
            0.8 * torus.phase(betas[-1]), abs=1e-16
        )


class TestApplyDensify:
    def test_all_overrides_diagonal_action(self):
        src = model.custom_source({}, default=1.0)
        op = build_cmv_product(src, (-8, 8))
        v = np.arange(1.0, 17.0) + 0j
        assert np.array_equal(apply(op, v), -v)

    def test_delta_vector_extracts_column(self):
        rng = np.random.default_rng(3)
        src = random_alpha_source(rng, -8, 8)
        op = build_cmv_direct(src, (-8, 8))
        d = densify(op)
        for k in (0, 5, 15):
            e = np.zeros(16, dtype=complex)
            e[k] = 1.0
            assert np.array_equal(apply(op, e), d[:, k])

    def test_matches_dense_matvec(self):
        rng = np.random.default_rng(8)
        src = random_alpha_source(rng, -16, 16)
        op = build_cmv_product(src, (-16, 16))
        d = densify(op)
        for _ in range(5):
            v = rng.normal(size=32) + 1j * rng.normal(size=32)
            assert np.max(np.abs(apply(op, v) - d @ v)) <= 1e-14

    def test_length_mismatch(self):
        op = build_cmv_product(model.custom_source({}), (-8, 8))
        with pytest.raises(ValueError):
            apply(op, np.zeros(5))

    def test_densify_round_trip(self):
        rng = np.random.default_rng(1)
        src = random_alpha_source(rng, -8, 8)
        op = build_cmv_direct(src, (-8, 8))
        d = densify(op)
        for c, off in enumerate(operators.OFFSETS):
            for r in range(op.size):
                if 0 <= r + off < op.size:
                    assert d[r, r + off] == op.data[r, c]


class TestUnitarityResidual:
    def test_closed_block_exactly_unitary(self):
        src = model.custom_source({}, default=0.3).with_overrides({-9: 1.0, 7: 1.0})
        op = build_cmv_product(src, (-10, 10))
        u = densify(op)[2:18, 2:18]  # block sites [-9+1, 7+1)
        assert np.max(np.abs(u.conj().T @ u - np.eye(16))) <= 1e-12

    def test_random_band_is_far_from_unitary(self):
        rng = np.random.default_rng(5)
        data = rng.normal(size=(24, 5)) + 1j * rng.normal(size=(24, 5))
        op = operators.BandedOperator(-12, 12, data, "random")
        assert interior_unitarity_residual(op) > 0.1

    def test_small_window_rejected(self):
        op = build_cmv_product(model.custom_source({}), (-2, 2))
        with pytest.raises(ValueError):
            interior_unitarity_residual(op)


class TestDumpFormat:
    def test_fields(self):
        p = WalkParams(0.25, 0.0, CoinSpec(0.6, 0.8))
        blob = operator_to_jsonable(build_walk(p, (-4, 4)))
        assert blob["window"] == [-4, 4]
        assert blob["offsets"] == [-2, -1, 0, 1, 2]
        assert len(blob["rows"]) == 8
        assert all(len(row) == 5 and len(row[0]) == 2 for row in blob["rows"])
