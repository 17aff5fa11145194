"""Command-line front end.

Four subcommands: ``verify`` (gauge / identities / covariance / tau),
``spectrum`` (eigenangles + gap statistics of one compression), ``certify``
(circle-grid Weyl certification), and ``sweep`` (gap statistics across
fields).  Every data-producing run writes a manifest with config echo,
version, and output checksums; data files are byte-identical across reruns
of the same config and version.

Exit codes: 0 success, 1 verification failure, 2 usage or config error,
3 I/O error.

Config is JSON.  ``omega`` (and ``theta``, ``eta``, ``x`` entries, ``tau``)
accept a decimal number, an exact rational string "p/q", or the named
constant "golden" for (sqrt(5)-1)/2.  The ``perturb`` field injects a
deliberate parameter error on one side of a verified identity; it exists so
the exit-code contract has a negative control.
"""

from __future__ import annotations

import argparse
import datetime
import hashlib
import json
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__, gauge, spectral, torus
from .model import CoinSpec, SkewParams, WalkParams, electric_source, skew_source
from .torus import Turn

EXIT_OK = 0
EXIT_VERIFY_FAIL = 1
EXIT_USAGE = 2
EXIT_IO = 3

GAUGE_TOL = 1e-10
COVARIANCE_TOL = 1e-9
TAU_ENTRYWISE_TOL = 1e-14

_DEFAULTS = {
    "model": "cmv-electric",
    "d": 3,
    "omega": "golden",
    "theta": 0.0,
    "eta": 0.0,
    "a": [0.6, 0.0],
    "b": [0.8, 0.0],
    "x": [0.11, 0.72, 0.344],
    "window": 256,
    "block": 200,
    "seed": 0,
    "tau": 0.37713,
    "perturb": 0.0,
    "omegas": None,
}

_MODELS = ("walk", "cmv-electric", "cmv-skew")


class ConfigError(ValueError):
    """Bad config file or flag combination (exit 2)."""


class VerificationFailure(RuntimeError):
    """A verified identity exceeded its tolerance (exit 1)."""


def parse_turn(value) -> Turn:
    """Parse a turn: decimal number, exact "p/q" string, or "golden"."""
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    if isinstance(value, str):
        text = value.strip()
        if text == "golden":
            return torus.golden_turn()
        if "/" in text:
            num, _, den = text.partition("/")
            try:
                return Fraction(int(num), int(den)) % 1
            except (ValueError, ZeroDivisionError) as exc:
                raise ConfigError(f"bad rational turn {value!r}: {exc}") from exc
        try:
            return float(text)
        except ValueError as exc:
            raise ConfigError(f"bad turn value {value!r}") from exc
    raise ConfigError(f"bad turn value {value!r}")


def _parse_complex(value, name: str) -> complex:
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return complex(float(value), 0.0)
    if isinstance(value, (list, tuple)) and len(value) == 2:
        try:
            return complex(float(value[0]), float(value[1]))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad complex field {name!r}: {value!r}") from exc
    raise ConfigError(f"field {name!r} must be a number or [re, im], got {value!r}")


@dataclass(frozen=True)
class ExperimentConfig:
    model: str
    d: int
    omega: Turn
    theta: Turn
    eta: Turn
    a: complex
    b: complex
    x: tuple
    window: int
    block: int
    seed: int
    tau: Turn
    perturb: float
    omegas: Optional[tuple]
    raw: dict

    @property
    def coin(self) -> CoinSpec:
        try:
            return CoinSpec(self.a, self.b, self.eta)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def walk_params(self) -> WalkParams:
        return WalkParams(self.omega, self.theta, self.coin)

    def skew_params(self) -> SkewParams:
        if len(self.x) != self.d:
            raise ConfigError(f"x has {len(self.x)} coordinates, expected d={self.d}")
        try:
            return SkewParams(self.d, self.omega, self.x, self.a, self.b)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc


def load_config(path: Optional[str], exact: bool = False) -> ExperimentConfig:
    raw = dict(_DEFAULTS)
    user: dict = {}
    if path is not None:
        try:
            user = json.loads(Path(path).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
        unknown = set(user) - set(_DEFAULTS)
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        raw.update(user)
    if raw["model"] not in _MODELS:
        raise ConfigError(f"model must be one of {_MODELS}, got {raw['model']!r}")
    try:
        d = int(raw["d"])
        window = int(raw["window"])
        block = int(raw["block"])
        seed = int(raw["seed"])
        perturb = float(raw["perturb"])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad integer/float field: {exc}") from exc
    omega = parse_turn(raw["omega"])
    theta = parse_turn(raw["theta"])
    eta = parse_turn(raw["eta"])
    tau = parse_turn(raw["tau"])
    x = tuple(parse_turn(v) for v in raw["x"])
    omegas = None
    if raw["omegas"] is not None:
        if not isinstance(raw["omegas"], (list, tuple)):
            raise ConfigError("omegas must be a list")
        omegas = tuple(parse_turn(v) for v in raw["omegas"])
    if raw["model"] == "cmv-skew" and d < 2:
        raise ConfigError("cmv-skew needs d >= 2")
    cfg = ExperimentConfig(
        model=raw["model"], d=d, omega=omega, theta=theta, eta=eta,
        a=_parse_complex(raw["a"], "a"), b=_parse_complex(raw["b"], "b"),
        x=x, window=window, block=block, seed=seed, tau=tau,
        perturb=perturb, omegas=omegas, raw=raw,
    )
    cfg.coin  # validate
    if exact:
        vals = [cfg.omega, cfg.theta, cfg.eta, *cfg.x]
        if any(isinstance(v, float) for v in vals):
            raise ConfigError(
                "--exact requires omega, theta, eta, and x as rational 'p/q' strings"
            )
    return cfg


def _even_window(w: int) -> tuple:
    if w % 2 or w < 16:
        raise ConfigError(f"window must be even and >= 16, got {w}")
    lo = -(w // 2)
    if lo % 2:
        lo -= 1
    return lo, lo + w


def _compression(cfg: ExperimentConfig, block: int, threads: int):
    if block % 2 or block < 8:
        raise ConfigError(f"block must be even and >= 8, got {block}")
    if cfg.model == "walk":
        m_lo = -(block // 4)
        u = spectral.walk_compression(cfg.walk_params(), m_lo, m_lo + block // 2)
    elif cfg.model == "cmv-electric":
        cuts = spectral.centered_cuts(block)
        u = spectral.unitary_compression(electric_source(cfg.walk_params()), *cuts)
    else:
        cuts = spectral.centered_cuts(block)
        u = spectral.skew_compression(cfg.skew_params(), *cuts)
    return spectral.eigenangles(u, threads=threads)


def _cert_target(cfg: ExperimentConfig):
    if cfg.model == "walk":
        return cfg.walk_params()
    if cfg.model == "cmv-electric":
        return electric_source(cfg.walk_params())
    return skew_source(cfg.skew_params())


def _write_manifest(out_dir: Path, cfg: ExperimentConfig, files: Sequence[Path]) -> None:
    outputs = []
    for f in files:
        digest = hashlib.sha256(f.read_bytes()).hexdigest()
        outputs.append({"path": f.name, "sha256": digest})
    manifest = {
        "config": cfg.raw,
        "tool_version": __version__,
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "outputs": outputs,
    }
    (out_dir / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n"
    )


def _out_dir(path: Optional[str]) -> Path:
    if path is None:
        raise ConfigError("--out DIR is required for this command")
    out = Path(path)
    if not out.is_dir():
        raise OSError(f"output directory {out} does not exist")
    return out


def cmd_spectrum(cfg: ExperimentConfig, out: Path, block: int, threads: int) -> int:
    angles = _compression(cfg, block, threads)
    stats = spectral.gap_stats(angles)
    csv_path = out / "eigenangles.csv"
    spectral.write_eigenangles_csv(csv_path, angles)
    stats_path = out / "gapstats.json"
    stats_path.write_text(
        json.dumps(
            {"max_gap": stats.max_gap, "mean_gap": stats.mean_gap, "n": stats.n},
            sort_keys=True,
        )
        + "\n"
    )
    _write_manifest(out, cfg, [csv_path, stats_path])
    print(f"spectrum: n={stats.n} max_gap={stats.max_gap:.6g} -> {csv_path}")
    return EXIT_OK


def cmd_certify(cfg: ExperimentConfig, out: Path, grid_n: int, window: int,
                threads: int) -> int:
    if grid_n < 8:
        raise ConfigError(f"--grid must be >= 8, got {grid_n}")
    records = spectral.certify_grid(_cert_target(cfg), grid_n, _even_window(window),
                                    threads=threads)
    csv_path = out / "certification.csv"
    spectral.write_cert_csv(csv_path, records)
    _write_manifest(out, cfg, [csv_path])
    worst = max(rec.sigma_min for rec in records)
    print(f"certify: grid={grid_n} window={window} max sigma_min={worst:.6g} -> {csv_path}")
    return EXIT_OK


def cmd_sweep(cfg: ExperimentConfig, out: Path, omega_spec: Optional[str],
              block: int, threads: int) -> int:
    if omega_spec:
        omegas = [parse_turn(tok) for tok in omega_spec.split(",") if tok.strip()]
    elif cfg.omegas:
        omegas = list(cfg.omegas)
    else:
        omegas = []
    if not omegas:
        raise ConfigError("sweep needs fields: pass --omegas or set 'omegas' in config")
    seen = set()
    unique = []
    for om in omegas:
        key = float(om)
        if key in seen:
            print(f"warning: duplicate omega {key!r} dropped", file=sys.stderr)
            continue
        seen.add(key)
        unique.append(om)
    table = spectral.omega_sweep(cfg.walk_params(), unique, block, threads=threads)
    csv_path = out / "sweep.csv"
    spectral.write_sweep_csv(csv_path, table)
    _write_manifest(out, cfg, [csv_path])
    for om, _, stats in table:
        print(f"omega={float(om):.10g}: max_gap={stats.max_gap:.6g}")
    return EXIT_OK


def _verify_gauge(cfg: ExperimentConfig, window: int) -> dict:
    win = _even_window(window)
    if cfg.model == "cmv-skew":
        p = cfg.skew_params()
        if cfg.perturb:
            x = list(p.x)
            x[-1] = torus.mod1(torus.exact(x[-1]) + torus.exact(cfg.perturb))
            e_side = SkewParams(p.d, p.omega, tuple(x), p.a, p.b)
            ecmv = gauge.build_cmv_product(skew_source(e_side), win)
            g = gauge.skew_beta_gauge(p, win)
            wb = gauge.build_wbeta(
                lambda j: gauge.beta_lift(p.x[:-1], p.omega, j), p.a, p.b, win
            )
            resid = gauge.gauge_residual(ecmv, wb, g, interior_margin=4)
            report = gauge.GaugeReport("skew-beta-gauge", win, resid)
        else:
            report = gauge.verify_skew_beta_gauge(p, win, tol=GAUGE_TOL)
    else:
        p = cfg.walk_params()
        if cfg.perturb:
            w_op = gauge.build_walk(
                WalkParams(p.omega, torus.mod1(torus.exact(p.theta) + torus.exact(cfg.perturb)), p.coin),
                win,
            )
            e_op = gauge.build_cmv_product(
                electric_source(gauge.electric_equivalent(p)), win
            )
            try:
                g = gauge.solve_gauge(w_op, e_op, GAUGE_TOL)
                resid = gauge.gauge_residual(w_op, e_op, g, interior_margin=4)
            except gauge.GaugeSolveError as exc:
                resid = exc.residual
            report = gauge.GaugeReport("walk-electric-gauge", win, resid)
        else:
            report = gauge.verify_walk_cmv_gauge(p, win, tol=GAUGE_TOL)
    return {
        "identity": report.identity,
        "window": list(report.window),
        "max_residual": report.max_residual,
        "anchor_convention": report.anchor_convention,
        "tolerance": GAUGE_TOL,
        "pass": report.max_residual <= GAUGE_TOL,
    }


def _verify_identities(cfg: ExperimentConfig) -> dict:
    rng = np.random.default_rng(cfg.seed)

    def rational(limit=97):
        q = int(rng.integers(2, limit))
        return Fraction(int(rng.integers(0, q)), q)

    failures = 0
    checks = 0
    for n in range(-200, 201):
        for k in range(1, 13):
            checks += 1
            if not torus.pascal_holds(n, k):
                failures += 1
    for d in range(1, 6):
        x = tuple(rational() for _ in range(d))
        om = rational()
        for n in (-100, -37, -1, 0, 1, 53, 100):
            for mstep in (-100, -11, 7, 100):
                checks += 1
                lhs = torus.skew_iterate_closed(x, om, n + mstep)
                rhs = torus.skew_iterate_closed(
                    torus.skew_iterate_closed(x, om, n), om, mstep
                )
                if lhs != rhs:
                    failures += 1
            checks += 1
            if torus.skew_step(torus.skew_iterate_closed(x, om, n), om) != \
                    torus.skew_iterate_closed(x, om, n + 1):
                failures += 1
    for d in range(2, 6):
        x = tuple(rational() for _ in range(d))
        om = rational()
        for j in range(-100, 101):
            checks += 1
            pj = torus.psi_lift(x, om, j) % 1
            pj1 = torus.psi_lift(x, om, j - 1) % 1
            off = cfg.perturb if cfg.perturb else 0
            bj = torus.exact(gauge.beta_j(x[:-1], om, j - 1)) + torus.exact(off)
            if (pj - pj1 + 2 * bj) % 1 != 0:
                failures += 1
    return {
        "identity": "exact-identities",
        "checks": checks,
        "failures": failures,
        "pass": failures == 0,
    }


def _verify_covariance(cfg: ExperimentConfig, block: int) -> dict:
    p = cfg.walk_params()
    worst = 0.0
    for shift in (0.5, 0.25, 0.137):
        s = torus.mod1(torus.exact(shift) + torus.exact(cfg.perturb)) if cfg.perturb else shift
        u0 = spectral.walk_compression(p, -(block // 4), -(block // 4) + block // 2)
        p1 = WalkParams(p.omega, torus.exact(p.theta) + torus.exact(shift), p.coin)
        u1 = spectral.walk_compression(p1, -(block // 4), -(block // 4) + block // 2)
        a0 = spectral.eigenangles(u0).angles
        a1 = spectral.eigenangles(u1).angles
        predicted = np.sort(np.mod(a0 + float(torus.exact(s) % 1), 1.0))
        worst = max(worst, spectral.cyclic_multiset_mismatch(predicted, a1))
    return {
        "identity": "rotation-covariance",
        "block": block,
        "max_mismatch": worst,
        "tolerance": COVARIANCE_TOL,
        "pass": worst <= COVARIANCE_TOL,
    }


def _verify_tau(cfg: ExperimentConfig, window: int) -> dict:
    p = cfg.skew_params() if cfg.model == "cmv-skew" else SkewParams(
        cfg.d if cfg.d >= 2 else 3, cfg.omega,
        cfg.x if len(cfg.x) == max(cfg.d, 2) else (0.11, 0.72, 0.344),
        cfg.a, cfg.b,
    )
    win = _even_window(window)
    worst_entry = 0.0
    for tau in (Fraction(1, 4), 1, cfg.tau):
        tau_used = torus.exact(tau) + torus.exact(cfg.perturb) if cfg.perturb else tau
        xm = list(p.x[:-1])
        xm_shift = xm[:-1] + [torus.exact(xm[-1]) + torus.exact(tau_used)]
        a0 = gauge.build_wbeta(lambda j: gauge.beta_lift(xm, p.omega, j), p.a, p.b, win)
        a1 = gauge.build_wbeta(lambda j: gauge.beta_lift(xm_shift, p.omega, j), p.a, p.b, win)
        fac = torus.phase(-torus.exact(tau) / 2)
        worst_entry = max(worst_entry, float(np.max(np.abs(a1.data - fac * a0.data))))
    cuts = spectral.centered_cuts(min(cfg.block, 128))
    shift_mis = spectral.spectral_tau_covariance(p, cfg.tau, *cuts)
    return {
        "identity": "tau-covariance",
        "window": list(win),
        "max_entrywise": worst_entry,
        "entrywise_tolerance": TAU_ENTRYWISE_TOL,
        "spectral_mismatch": shift_mis,
        "spectral_tolerance": COVARIANCE_TOL,
        "pass": worst_entry <= TAU_ENTRYWISE_TOL and shift_mis <= COVARIANCE_TOL,
    }


def cmd_verify(kind: str, cfg: ExperimentConfig, window: int, block: int) -> int:
    if kind == "gauge":
        report = _verify_gauge(cfg, window)
    elif kind == "identities":
        report = _verify_identities(cfg)
    elif kind == "covariance":
        report = _verify_covariance(cfg, block)
    elif kind == "tau":
        report = _verify_tau(cfg, window)
    else:
        raise ConfigError(f"unknown verify kind {kind!r}")
    print(json.dumps(report, sort_keys=True))
    return EXIT_OK if report["pass"] else EXIT_VERIFY_FAIL


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="cmvspec",
        description="Electric-walk / skew-shift CMV spectra: verification and data runs",
    )
    ap.add_argument("--version", action="version", version=f"cmvspec {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp, out_required=False):
        sp.add_argument("--config", metavar="PATH", default=None)
        sp.add_argument("--out", metavar="DIR", default=None)
        sp.add_argument("--grid", type=int, default=256, metavar="N")
        sp.add_argument("--window", type=int, default=None, metavar="N")
        sp.add_argument("--block", type=int, default=None, metavar="N")
        sp.add_argument("--threads", type=int, default=1, metavar="N")
        sp.add_argument("--exact", action="store_true")

    sp = sub.add_parser("verify", help="run a verification suite")
    sp.add_argument("kind", choices=("gauge", "identities", "covariance", "tau"))
    common(sp)
    common(sub.add_parser("spectrum", help="eigenangles of one compression"))
    common(sub.add_parser("certify", help="Weyl certification on a circle grid"))
    sp = sub.add_parser("sweep", help="gap statistics across fields")
    sp.add_argument("--omegas", metavar="LIST", default=None,
                    help="comma-separated turn values (decimal, p/q, or golden)")
    common(sp)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, exact=args.exact)
        window = args.window if args.window is not None else cfg.window
        block = args.block if args.block is not None else cfg.block
        threads = max(1, args.threads)
        if args.command == "verify":
            return cmd_verify(args.kind, cfg, window, block)
        if args.command == "spectrum":
            return cmd_spectrum(cfg, _out_dir(args.out), block, threads)
        if args.command == "certify":
            return cmd_certify(cfg, _out_dir(args.out), args.grid, window, threads)
        if args.command == "sweep":
            return cmd_sweep(cfg, _out_dir(args.out), args.omegas, block, threads)
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (gauge.GaugeSolveError, spectral.StructuralError) as exc:
        print(f"verification failure: {exc}", file=sys.stderr)
        return EXIT_VERIFY_FAIL
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
