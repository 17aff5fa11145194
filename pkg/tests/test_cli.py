"""CLI contract tests: config parsing, exit codes, reproducibility."""

import json
from fractions import Fraction
from pathlib import Path

import pytest

from cmvspec import cli

FIXTURES = Path(__file__).parent / "fixtures"


def write_cfg(tmp_path, **fields):
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(fields))
    return str(p)


class TestParseTurn:
    def test_decimal(self):
        assert cli.parse_turn(0.25) == 0.25
        assert cli.parse_turn("0.25") == 0.25

    def test_rational(self):
        got = cli.parse_turn("3/7")
        assert isinstance(got, Fraction) and got == Fraction(3, 7)

    def test_rational_reduced_mod_one(self):
        assert cli.parse_turn("9/4") == Fraction(1, 4)

    def test_golden(self):
        assert cli.parse_turn("golden") == pytest.approx(0.6180339887498949)

    def test_garbage(self):
        with pytest.raises(cli.ConfigError):
            cli.parse_turn("abc")


class TestConfig:
    def test_defaults_load(self):
        cfg = cli.load_config(None)
        assert cfg.model == "cmv-electric"
        assert cfg.coin is not None

    def test_unknown_field_rejected(self, tmp_path):
        path = write_cfg(tmp_path, modle="walk")
        with pytest.raises(cli.ConfigError):
            cli.load_config(path)

    def test_bad_model(self, tmp_path):
        path = write_cfg(tmp_path, model="banana")
        with pytest.raises(cli.ConfigError):
            cli.load_config(path)

    def test_coin_validation(self, tmp_path):
        path = write_cfg(tmp_path, a=[1.0, 0.0], b=[1.0, 0.0])
        with pytest.raises(cli.ConfigError):
            cli.load_config(path)

    def test_exact_mode_requires_rationals(self, tmp_path):
        path = write_cfg(tmp_path, omega=0.25)
        with pytest.raises(cli.ConfigError):
            cli.load_config(path, exact=True)
        path = write_cfg(
            tmp_path, omega="1/4", theta="0/1", eta="0/1", x=["1/3", "1/5", "2/7"]
        )
        cfg = cli.load_config(path, exact=True)
        assert cfg.omega == Fraction(1, 4)


class TestExitCodes:
    def test_verify_identities_default_config(self):
        assert cli.main(["verify", "identities"]) == 0

    def test_verify_gauge_ok(self):
        assert cli.main(["verify", "gauge", "--window", "64"]) == 0

    def test_malformed_omega_exit_2(self, tmp_path):
        path = write_cfg(tmp_path, omega="abc")
        assert cli.main(["verify", "gauge", "--config", path]) == 2

    def test_perturbed_gauge_exit_1(self, tmp_path):
        path = write_cfg(tmp_path, perturb=1e-3)
        assert cli.main(["verify", "gauge", "--config", path, "--window", "64"]) == 1

    def test_perturbed_identities_exit_1(self, tmp_path):
        path = write_cfg(tmp_path, perturb=1e-3)
        assert cli.main(["verify", "identities", "--config", path]) == 1

    def test_missing_out_dir_exit_3(self, tmp_path):
        assert cli.main(["spectrum", "--out", str(tmp_path / "nope"), "--block", "16"]) == 3

    def test_grid_zero_exit_2(self, tmp_path):
        assert cli.main(["certify", "--out", str(tmp_path), "--grid", "0"]) == 2

    def test_empty_sweep_exit_2(self, tmp_path):
        assert cli.main(["sweep", "--out", str(tmp_path), "--block", "16"]) == 2

    def test_verify_tau_ok(self):
        assert cli.main(["verify", "tau", "--window", "32", "--block", "32"]) == 0

    def test_verify_covariance_ok(self):
        assert cli.main(["verify", "covariance", "--block", "48"]) == 0


class TestSpectrumCommand:
    def test_free_case_matches_frozen_fixture(self, tmp_path):
        cfg = write_cfg(tmp_path, model="cmv-electric", a=[1.0, 0.0], b=[0.0, 0.0],
                        omega="golden", theta=0.0, eta=0.0, block=16)
        out = tmp_path / "run"
        out.mkdir()
        assert cli.main(["spectrum", "--config", cfg, "--out", str(out)]) == 0
        got = (out / "eigenangles.csv").read_bytes()
        assert got == (FIXTURES / "spectrum_n16_free.csv").read_bytes()

    def test_reruns_byte_identical(self, tmp_path):
        cfg = write_cfg(tmp_path, block=32)
        blobs = []
        for sub in ("r1", "r2"):
            out = tmp_path / sub
            out.mkdir()
            assert cli.main(["spectrum", "--config", cfg, "--out", str(out)]) == 0
            blobs.append(
                (out / "eigenangles.csv").read_bytes()
                + (out / "gapstats.json").read_bytes()
            )
        assert blobs[0] == blobs[1]

    def test_manifest_written_with_checksums(self, tmp_path):
        import hashlib

        out = tmp_path / "m"
        out.mkdir()
        assert cli.main(["spectrum", "--out", str(out), "--block", "16"]) == 0
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["tool_version"]
        assert manifest["config"]["model"] == "cmv-electric"
        for entry in manifest["outputs"]:
            digest = hashlib.sha256((out / entry["path"]).read_bytes()).hexdigest()
            assert digest == entry["sha256"]


class TestCertifyCommand:
    def test_runs_and_reruns_identical(self, tmp_path):
        cfg = write_cfg(tmp_path, a=[1.0, 0.0], b=[0.0, 0.0])
        blobs = []
        for sub in ("c1", "c2"):
            out = tmp_path / sub
            out.mkdir()
            assert cli.main([
                "certify", "--config", cfg, "--out", str(out),
                "--grid", "8", "--window", "64",
            ]) == 0
            blobs.append((out / "certification.csv").read_bytes())
        assert blobs[0] == blobs[1]
        lines = blobs[0].decode().splitlines()
        assert lines[0] == "z_angle_turns,window,sigma_min"
        assert len(lines) == 9


class TestSweepCommand:
    def test_contrast_and_dedup(self, tmp_path, capsys):
        out = tmp_path / "s"
        out.mkdir()
        rc = cli.main([
            "sweep", "--out", str(out), "--omegas", "1/2,golden,1/2", "--block", "64",
        ])
        assert rc == 0
        err = capsys.readouterr().err
        assert "duplicate omega" in err
        lines = (out / "sweep.csv").read_text().splitlines()
        assert lines[0] == "omega,angle_turns"
        assert len(lines) == 1 + 2 * 64  # two unique fields, 64 angles each

    def test_omegas_from_config(self, tmp_path):
        cfg = write_cfg(tmp_path, omegas=["1/3", "golden"], block=32)
        out = tmp_path / "s2"
        out.mkdir()
        assert cli.main(["sweep", "--config", cfg, "--out", str(out)]) == 0
