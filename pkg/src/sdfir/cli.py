"""Command-line entry point: design runs, baseline truncation, comparisons.

Subcommands::

    sdfir design  <config.json> [--out DIR] [--grid N] [--solver-gap-tol X]
    sdfir truncate <iir.json> --taps M [--out FILE]
    sdfir compare <config.json> [--out DIR] [--grid N] [--solver-gap-tol X]

Exit codes: 0 success, 2 config error, 3 stability/validation error,
4 solver failure.  All emitted files use fixed formatting and contain
no timestamps, so identical configs produce bit-identical artifacts.
"""

import argparse
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import fir, hinf, synth
from .error_system import ValidationError, build_multi_delay
from .sdp import SolverOptions
from .statespace import StateSpace, freq_response_batch, from_transfer_function, impulse_response, zoh_discretize

DB_FLOOR = -240.0  # magnitudes below 1e-12 clamp here

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_VALIDATION = 3
EXIT_SOLVER = 4


class ConfigError(ValueError):
    pass


@dataclass
class DesignConfig:
    spec: synth.DesignSpec
    grid_points: int
    output_dir: Path | None
    baseline: Path | None


def _system_from_json(obj, name, dt=None):
    if not isinstance(obj, dict):
        raise ConfigError(f"{name} must be an object")
    if "num" in obj or "den" in obj:
        if "num" not in obj or "den" not in obj:
            raise ConfigError(f"{name}: both 'num' and 'den' are required")
        try:
            return from_transfer_function(obj["num"], obj["den"], dt=dt)
        except ValueError as exc:
            raise ConfigError(f"{name}: {exc}") from exc
    if all(k in obj for k in ("A", "B", "C", "D")):
        try:
            return StateSpace(obj["A"], obj["B"], obj["C"], obj["D"], dt=obj.get("dt", dt))
        except ValueError as exc:
            raise ConfigError(f"{name}: {exc}") from exc
    raise ConfigError(f"{name}: give either num/den or A,B,C,D")


def _require(cfg, key, kind):
    if key not in cfg:
        raise ConfigError(f"missing required field '{key}'")
    try:
        return kind(cfg[key])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"field '{key}': {exc}") from exc


def load_config(path):
    """Parse and validate a design configuration file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("top-level config must be an object")
    target = _system_from_json(_require(cfg, "target", dict), "target")
    characteristic = _system_from_json(
        _require(cfg, "characteristic", dict), "characteristic"
    )
    h = _require(cfg, "h", float)
    M = _require(cfg, "M", int)
    N = _require(cfg, "N", int)
    m = int(cfg.get("m", 0))
    L = int(cfg.get("L", 1))
    solver_cfg = cfg.get("solver", {})
    if not isinstance(solver_cfg, dict):
        raise ConfigError("field 'solver' must be an object")
    known = {"gap_tol", "max_newton", "barrier_mult", "epsilon_margin", "x_bound"}
    unknown = set(solver_cfg) - known
    if unknown:
        raise ConfigError(f"unknown solver option(s): {sorted(unknown)}")
    solver = SolverOptions(**{k: solver_cfg[k] for k in solver_cfg})
    spec = synth.DesignSpec(
        target=target, characteristic=characteristic, h=h, M=M, N=N, m=m, L=L,
        solver=solver,
    )
    grid_points = int(cfg.get("grid_points", 512))
    if grid_points < 2:
        raise ConfigError("grid_points must be at least 2")
    out = cfg.get("output_dir")
    baseline = cfg.get("baseline")
    return DesignConfig(
        spec=spec,
        grid_points=grid_points,
        output_dir=Path(out) if out else None,
        baseline=Path(baseline) if baseline else None,
    )


def truncate_baseline(iir, M):
    """FIR filter from the first M impulse-response samples of a stable IIR."""
    if iir.is_continuous:
        raise ValidationError("baseline", "must be a discrete-time system")
    if iir.n_inputs != 1 or iir.n_outputs != 1:
        raise ValidationError("baseline", "must be SISO")
    if not iir.is_stable():
        raise ValidationError("baseline", "must be stable")
    return fir.FirFilter(impulse_response(iir, int(M)), iir.dt)


def _load_baseline(config):
    """The comparison filter: user-supplied IIR or the built-in fallback.

    The fallback is the step-invariant (zero-order-hold) discretization
    of the target at the tap rate, truncated to M taps.
    """
    spec = config.spec
    if config.baseline is not None:
        try:
            with open(config.baseline, "r", encoding="utf-8") as fh:
                obj = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"baseline file: {exc}") from exc
        iir = _system_from_json(obj, "baseline", dt=obj.get("dt", spec.h / spec.L))
        if iir.is_continuous:
            raise ConfigError("baseline: a discrete-time system is required")
        label = "user-supplied"
    else:
        iir = zoh_discretize(spec.target, spec.h / spec.L)
        label = "builtin-truncated-zoh"
    return truncate_baseline(iir, spec.M), label


def _db(mag):
    mag = np.maximum(np.asarray(mag, dtype=float), 0.0)
    out = np.full(mag.shape, DB_FLOOR)
    ok = mag > 1e-12
    out[ok] = 20.0 * np.log10(mag[ok])
    return out


def _filter_response_rows(k, grid_points):
    thetas = np.linspace(0.0, math.pi, grid_points)
    resp = freq_response_batch(fir.realize_ss(k), np.exp(1j * thetas))[:, 0, 0]
    return thetas, _db(np.abs(resp)), np.degrees(np.angle(resp))


def _error_gain_rows(err, taps, grid_points):
    g = err.realization(taps)
    thetas = np.linspace(0.0, math.pi, grid_points)
    resp = freq_response_batch(g, np.exp(1j * thetas))
    sig = np.linalg.svd(resp, compute_uv=False)[:, 0]
    return thetas, _db(sig)


def _write_csv(path, header, columns):
    rows = zip(*columns)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(f"{v:.12e}" for v in row) + "\n")


def compare_error_gains(err, designed, baseline, grid_points):
    """Per-frequency peak gains of the error system under both filters.

    Returns (thetas, designed_db, baseline_db, designed_peak, baseline_peak);
    the peaks are taken over the evaluation grid.
    """
    thetas, des_db = _error_gain_rows(err, designed.coeffs, grid_points)
    _, base_db = _error_gain_rows(err, baseline.coeffs, grid_points)
    return thetas, des_db, base_db, float(des_db.max()), float(base_db.max())


def run_design(config, out_dir=None, compare=False):
    """Run one synthesis and write all artifact files.

    Everything is computed before the first file is written, so no
    partial artifact set is left behind on failure.  Returns the result
    plus the artifact directory.
    """
    spec = config.spec
    out = Path(out_dir) if out_dir is not None else (config.output_dir or Path("design_out"))
    result = synth.design_fir(spec)
    err = synth._build_error(spec)
    baseline_filter, baseline_label = _load_baseline(config)

    designed = result.filter
    artifacts = {}
    artifacts["filter_response.csv"] = _filter_response_rows(designed, config.grid_points)
    artifacts["filter_response_baseline.csv"] = _filter_response_rows(
        baseline_filter, config.grid_points
    )
    thetas, des_db, base_db, des_peak, base_peak = compare_error_gains(
        err, designed, baseline_filter, config.grid_points
    )
    gamma_doc = {
        "gamma": result.gamma,
        "verified_norm": result.verified_norm,
        "iterations": result.diagnostics["iterations"],
        "baseline": baseline_label,
        "error_peak_designed_db": des_peak,
        "error_peak_baseline_db": base_peak,
    }
    # continuous-time overlay of the target on omega = theta / h
    omegas = np.linspace(0.0, math.pi, config.grid_points) / spec.h
    tresp = freq_response_batch(spec.target, 1j * omegas)[:, 0, 0]

    out.mkdir(parents=True, exist_ok=True)
    fir.save_coefficients(out / "coefficients.txt", designed)
    with open(out / "gamma.json", "w", encoding="utf-8") as fh:
        json.dump(gamma_doc, fh, sort_keys=True, indent=2)
        fh.write("\n")
    for name, (th, mag, ph) in (
        ("filter_response.csv", artifacts["filter_response.csv"]),
        ("filter_response_baseline.csv", artifacts["filter_response_baseline.csv"]),
    ):
        _write_csv(out / name, ("theta", "magnitude_db", "phase_deg"), (th, mag, ph))
    _write_csv(out / "error_gain.csv", ("theta", "sigma_max_db"), (thetas, des_db))
    _write_csv(
        out / "error_gain_baseline.csv", ("theta", "sigma_max_db"), (thetas, base_db)
    )
    _write_csv(
        out / "impulse.csv",
        ("k", "value"),
        (np.arange(spec.M, dtype=float), designed.coeffs),
    )
    _write_csv(
        out / "impulse_baseline.csv",
        ("k", "value"),
        (np.arange(spec.M, dtype=float), baseline_filter.coeffs),
    )
    _write_csv(
        out / "analog_response.csv",
        ("omega", "magnitude_db", "phase_deg"),
        (omegas, _db(np.abs(tresp)), np.degrees(np.angle(tresp))),
    )
    if compare:
        with open(out / "error_gain_compare.csv", "w", encoding="utf-8") as fh:
            fh.write("theta,designed_db,baseline_db\n")
            for t, d, b in zip(thetas, des_db, base_db):
                fh.write(f"{t:.12e},{d:.12e},{b:.12e}\n")
            fh.write(f"peak,{des_peak:.12e},{base_peak:.12e}\n")
    return result, out


def _apply_overrides(config, args):
    if getattr(args, "grid", None):
        config.grid_points = int(args.grid)
    if getattr(args, "solver_gap_tol", None):
        config.spec.solver.gap_tol = float(args.solver_gap_tol)
    return config


def _fail(code, kind, message):
    print(f"{kind}: {message}", file=sys.stderr)
    return code


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="sdfir",
        description="FIR approximation of analog filters by sampled-data "
        "H-infinity optimization",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_design = sub.add_parser("design", help="run a synthesis from a JSON config")
    p_design.add_argument("config")
    p_design.add_argument("--out", help="artifact directory (overrides config)")
    p_design.add_argument("--grid", type=int, help="response grid points")
    p_design.add_argument("--solver-gap-tol", type=float, dest="solver_gap_tol")

    p_trunc = sub.add_parser("truncate", help="truncate a discrete IIR to FIR taps")
    p_trunc.add_argument("iir")
    p_trunc.add_argument("--taps", type=int, required=True)
    p_trunc.add_argument("--out", help="write taps to this file instead of stdout")

    p_cmp = sub.add_parser(
        "compare", help="design plus error-gain comparison against the baseline"
    )
    p_cmp.add_argument("config")
    p_cmp.add_argument("--out", help="artifact directory (overrides config)")
    p_cmp.add_argument("--grid", type=int, help="response grid points")
    p_cmp.add_argument("--solver-gap-tol", type=float, dest="solver_gap_tol")

    args = parser.parse_args(argv)
    try:
        if args.command == "truncate":
            try:
                with open(args.iir, "r", encoding="utf-8") as fh:
                    obj = json.load(fh)
            except (OSError, json.JSONDecodeError) as exc:
                raise ConfigError(str(exc)) from exc
            iir = _system_from_json(obj, "iir", dt=obj.get("dt", 1.0))
            if iir.is_continuous:
                raise ConfigError("iir: a discrete-time system is required")
            k = truncate_baseline(iir, args.taps)
            if args.out:
                fir.save_coefficients(args.out, k)
            else:
                for c in k.coeffs:
                    print(f"{c:.17e}")
            return EXIT_OK
        config = _apply_overrides(load_config(args.config), args)
        result, out = run_design(
            config, out_dir=args.out, compare=(args.command == "compare")
        )
        print(
            f"gamma = {result.gamma:.9e}, verified = {result.verified_norm:.9e}, "
            f"artifacts in {out}"
        )
        return EXIT_OK
    except ConfigError as exc:
        return _fail(EXIT_CONFIG, "config-error", exc)
    except ValidationError as exc:
        return _fail(EXIT_VALIDATION, "validation-error", exc)
    except ValueError as exc:
        return _fail(EXIT_VALIDATION, "validation-error", exc)
    except synth.SynthesisError as exc:
        return _fail(EXIT_SOLVER, "solver-error", exc)


if __name__ == "__main__":
    sys.exit(main())
