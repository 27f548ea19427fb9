"""Command-line reproduction harness.

Subcommands ``run``, ``snapshots``, ``sweep-delta``, ``scaling`` and
``oracle-check``.  Exit codes: 0 success, 2 configuration error,
3 numerical violation, 4 search or scaling failure.
"""
from __future__ import annotations

import argparse
import dataclasses
import math
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np

from .analysis import (
    RwaPrediction,
    find_peak,
    fit_sqrt_scaling,
    leakage_profile,
    max_rwa_deviation,
    scaling_study,
    sweep_levels,
)
from .config import RunSettings, load_config
from .dynamics import step_plan, run_search
from .errors import (
    InvalidConfiguration,
    NoPeak,
    NormViolation,
    NumericalFailure,
    OracleTooLarge,
    ScalingFailure,
)
from .model import PhotonDistribution, SearchConfig, resonance_margin
from .output import fmt, write_csv, write_manifest, write_trace

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_SEARCH = 0, 2, 3, 4
ORACLE_TOLERANCE = 1e-6
DEFAULT_FRACTIONS = (0.0, 0.25, 0.5, 0.75, 1.0)


def _floats(text):
    try:
        return [float(x) for x in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a list of numbers, got {text!r}")


def _ints(text):
    values = _floats(text)
    if any(v != int(v) for v in values):
        raise argparse.ArgumentTypeError(f"expected integers, got {text!r}")
    return [int(v) for v in values]


def _derived(cfg: SearchConfig) -> dict:
    return {
        "omega0": cfg.omega0,
        "epsilon0": cfg.epsilon0,
        "cavity_freq": cfg.cavity_freq,
        "tau": cfg.tau,
        "mean_photons": cfg.photons.mean,
        "fock_range": list(cfg.fock_range),
        "resonance_margin": resonance_margin(cfg),
    }


def _settings(args) -> RunSettings:
    settings = load_config(args.config) if getattr(args, "config", None) else RunSettings()
    if getattr(args, "dt_factor", None) is not None:
        settings = dataclasses.replace(settings, dt_factor=args.dt_factor)
    return settings.resolved()


def _warn_margin(cfg: SearchConfig, threshold: float) -> None:
    margin = resonance_margin(cfg)
    if margin < threshold:
        print(f"warning: resonance margin {margin:.3g} below {threshold:g} "
              f"(delta = {cfg.delta:g}); the two-mode picture is not expected to hold",
              file=sys.stderr)


def _outdir(path) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _integrator(settings: RunSettings, cfg: SearchConfig, t_end: float) -> dict:
    nsteps, dt = step_plan(t_end, settings.dt(cfg))
    return {
        "dt": dt,
        "dt_factor": settings.dt_factor,
        "nsteps": nsteps,
        "sample_every": settings.sample_every,
        "t_end": t_end,
        "norm_budget": settings.norm_budget,
    }


def _drift(trace) -> float:
    return float(np.max(np.abs(trace.norm - 1.0)))


def cmd_run(args) -> int:
    t0 = time.perf_counter()
    settings = _settings(args)
    cfg = settings.search_config()
    _warn_margin(cfg, args.margin_threshold)
    out = _outdir(args.output_dir)
    t_end = settings.t_end(cfg)
    trace = run_search(cfg, t_end=t_end, dt=settings.dt(cfg), sample_every=settings.sample_every,
                       norm_budget=settings.norm_budget)
    path = write_trace(out / "trace.csv", trace)
    write_manifest(out, "run", settings.to_mapping(), _derived(cfg), _integrator(settings, cfg, t_end),
                   [path], time.perf_counter() - t0, _drift(trace))
    print(f"wrote {path} ({len(trace)} samples, max norm drift {_drift(trace):.2e})")
    return EXIT_OK


def snapshot_steps(fractions, tau: float, dt: float) -> tuple:
    """Step count to ``tau`` and the step index of each fraction.

    The step count is rounded up to a multiple of the fractions' common
    denominator when that is cheap, so that snapshots land exactly on
    ``f * tau``; otherwise the nearest step is used.
    """
    nominal, _ = step_plan(tau, dt)
    denom = 1
    for f in fractions:
        denom = math.lcm(denom, Fraction(f).limit_denominator(1000).denominator)
    nsteps = nominal
    if denom <= nominal:
        nsteps = -(-nominal // denom) * denom
    return nsteps, [int(round(f * nsteps)) for f in fractions]


def cmd_snapshots(args) -> int:
    t0 = time.perf_counter()
    fractions = args.fractions
    if any(not 0.0 <= f <= 1.0 for f in fractions):
        raise InvalidConfiguration("snapshot fractions must lie in [0, 1]")
    settings = _settings(args)
    cfg = settings.search_config()
    _warn_margin(cfg, args.margin_threshold)
    out = _outdir(args.output_dir)
    nsteps, snap = snapshot_steps(fractions, cfg.tau, settings.dt(cfg))
    every = settings.sample_every or max(1, -(-nsteps // 2000))
    grid = np.union1d(np.arange(0, nsteps + 1, every), np.array(snap + [nsteps]))
    trace = run_search(cfg, t_end=cfg.tau, dt=cfg.tau / nsteps, sample_steps=grid,
                       norm_budget=settings.norm_budget)
    rows_at = [int(np.searchsorted(grid, k)) for k in snap]
    header = ["level"] + [f"f={f:g}" for f in fractions]
    rows = [[l] + [trace.P[r, l - 1] for r in rows_at] for l in range(1, cfg.N + 1)]
    levels = write_csv(out / "levels.csv", header, rows)
    tr = write_trace(out / "trace.csv", trace)
    integ = _integrator(settings, cfg, cfg.tau) | {"nsteps": nsteps, "dt": cfg.tau / nsteps,
                                                   "snapshot_steps": snap}
    write_manifest(out, "snapshots", settings.to_mapping(), _derived(cfg), integ, [levels, tr],
                   time.perf_counter() - t0, _drift(trace))
    for f, r in zip(fractions, rows_at):
        print(f"t/tau = {f:g}: P_j = {trace.P_j[r]:.4f}, P_s = {trace.P_s[r]:.4f}, "
              f"outside = {trace.leakage[r]:.4f}")
    print(f"max leakage over [0, tau]: {leakage_profile(trace, cfg):.4f}")
    return EXIT_OK


SWEEP_HEADER = ["delta", "resonance_margin", "t_peak", "t_peak_over_tau", "p_peak", "p_max",
                "max_leakage", "max_rwa_deviation", "norm_drift"]


def cmd_sweep_delta(args) -> int:
    t0 = time.perf_counter()
    settings = _settings(args)
    out = _outdir(args.output_dir)
    rows, files, drift = [], [], 0.0
    for delta in args.deltas:
        s = dataclasses.replace(settings, delta=delta)
        cfg = s.search_config()
        _warn_margin(cfg, args.margin_threshold)
        trace = run_search(cfg, t_end=s.t_end(cfg), dt=s.dt(cfg), sample_every=s.sample_every,
                           norm_budget=s.norm_budget)
        files.append(write_trace(out / f"trace_delta={fmt(delta)}.csv", trace))
        try:
            t_peak, p_peak = find_peak(trace, cfg.s)
        except NoPeak:
            t_peak = p_peak = float("nan")
            print(f"delta = {delta:g}: no resonant peak", file=sys.stderr)
        rows.append([delta, resonance_margin(cfg), t_peak, t_peak / cfg.tau, p_peak,
                     float(trace.P_s.max()), leakage_profile(trace, cfg, min(cfg.tau, trace.times[-1])),
                     max_rwa_deviation(trace, RwaPrediction.from_config(cfg)), _drift(trace)])
        drift = max(drift, _drift(trace))
        print(f"delta = {delta:g}: t_peak/tau = {rows[-1][3]:.4f}, p_peak = {p_peak:.4f}")
    files.append(write_csv(out / "summary.csv", SWEEP_HEADER, rows))
    cfg = settings.search_config()
    write_manifest(out, "sweep-delta", settings.to_mapping() | {"deltas": list(args.deltas)},
                   _derived(cfg), _integrator(settings, cfg, settings.t_end(cfg)), files,
                   time.perf_counter() - t0, drift)
    return EXIT_OK


def cmd_scaling(args) -> int:
    t0 = time.perf_counter()
    settings = _settings(args)
    if args.lam is not None:
        settings = dataclasses.replace(settings, lam=args.lam)
    out = _outdir(args.output_dir)
    status = EXIT_OK
    try:
        fit = scaling_study(args.N_list, args.delta, lam=settings.lam, photons=settings.photons(),
                            photon_mode=settings.photon_mode, fock_pad=settings.fock_pad,
                            t_end_over_tau=settings.t_end_over_tau, dt_factor=settings.dt_factor,
                            sample_every=settings.sample_every, norm_budget=settings.norm_budget)
        points, failed = list(fit.points), []
    except ScalingFailure as exc:
        points, failed = exc.points, exc.failed
        fit = fit_sqrt_scaling(points) if len(points) >= 5 else None
        print(f"scaling failure: no resonant peak for N = {failed}", file=sys.stderr)
        status = EXIT_SEARCH
    t_peaks = dict(points)
    rows = []
    for N in args.N_list:
        j, s = sweep_levels(N)
        tau = math.pi / (2.0 * settings.lam) * math.sqrt(N)
        tp = t_peaks.get(N, float("nan"))
        rows.append([N, j, s, math.sqrt(N), tau, tp, tp / tau])
    files = [write_csv(out / "scaling.csv", ["N", "j", "s", "sqrt_N", "tau", "t_peak", "t_peak_over_tau"], rows)]
    if fit is not None:
        files.append(write_csv(out / "fit.csv", ["slope", "intercept", "r_squared", "slope_over_ideal"],
                               [[fit.slope, fit.intercept, fit.r_squared,
                                 fit.slope / (math.pi / (2.0 * settings.lam))]]))
        print(f"slope = {fit.slope:.6g} (ideal {math.pi / (2 * settings.lam):.6g}), r^2 = {fit.r_squared:.6f}")
    config = settings.to_mapping() | {"N_list": list(args.N_list), "delta": args.delta}
    write_manifest(out, "scaling", config, {"failed_N": failed}, {"dt_factor": settings.dt_factor},
                   files, time.perf_counter() - t0, None)
    return status


def oracle_config(N: int, K: int, delta: float, lam: float = 1.0) -> SearchConfig:
    """Uniform photons on ``0..K-1`` with no padding, coherent start, levels from ``sweep_levels``."""
    j, s = sweep_levels(N)
    return SearchConfig.create(N, j, s, delta, lam=lam, photons=PhotonDistribution.uniform(0, K - 1),
                               photon_mode="coherent", fock_pad=0)


def interlevel_couplings(cfg: SearchConfig, H) -> list:
    """Nonzero couplings between different atomic levels as ``((l, k), (l', k'))``."""
    basis = H.basis
    pairs = []
    rows, cols = np.nonzero(np.triu(np.abs(H.H) > 0, 1))
    for r, c in zip(rows, cols):
        a, b = basis.label(int(r)), basis.label(int(c))
        if a[0] != b[0]:
            pairs.append((a, b))
    return pairs


def cmd_oracle_check(args) -> int:
    from .model import default_dt
    from .oracle import build_hamiltonian, compare_with_dynamics

    if args.N < 2 or args.K < 1:
        raise InvalidConfiguration("oracle check needs N >= 2 and K >= 1")
    if args.N * args.K > args.cap:
        raise OracleTooLarge(f"flat dimension {args.N * args.K} exceeds cap {args.cap}")
    cfg = oracle_config(args.N, args.K, args.delta)
    H = build_hamiltonian(cfg, cap=args.cap)
    res = compare_with_dynamics(cfg, dt=default_dt(cfg, args.dt_factor), cap=args.cap)
    couplings = interlevel_couplings(cfg, H)
    jcm_like = all({a[0], b[0]} == {cfg.j, cfg.s} and b[1] == a[1] + (1 if a[0] == cfg.j else -1)
                   for a, b in couplings) if cfg.N == 2 else None
    ok = res.max_deviation <= ORACLE_TOLERANCE
    print(f"N = {cfg.N}, K = {args.K}, delta = {cfg.delta:g}, j = {cfg.j}, s = {cfg.s}")
    print(f"hermiticity error: {res.hermiticity_error:.3e}")
    print(f"max amplitude deviation over {res.times.size} times in (0, tau]: {res.max_deviation:.3e}")
    if jcm_like is not None:
        print(f"inter-level couplings only (j,k) <-> (s,k+1): {jcm_like}")
    print("PASS" if ok else "FAIL")
    if args.output_dir:
        out = _outdir(args.output_dir)
        path = write_csv(out / "oracle.csv", ["t", "max_deviation"], zip(res.times, res.deviations))
        write_manifest(out, "oracle-check", {"N": args.N, "K": args.K, "delta": args.delta,
                                             "dt_factor": args.dt_factor, "cap": args.cap},
                       _derived(cfg), {"dt": default_dt(cfg, args.dt_factor)}, [path], 0.0, None)
    return EXIT_OK if ok else EXIT_NUMERIC


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="jcsearch", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required=True):
        if config_required:
            p.add_argument("config", help="key = value config file or a manifest.json")
        else:
            p.add_argument("--config", help="key = value config file or a manifest.json")
        p.add_argument("-o", "--output-dir", required=True)
        p.add_argument("--dt-factor", type=float, help="steps per fastest phase period (default 40)")
        p.add_argument("--margin-threshold", type=float, default=50.0,
                       help="warn when the resonance margin falls below this")

    p = sub.add_parser("run", help="single search run, writes trace.csv")
    common(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("snapshots", help="per-level probabilities at fractions of tau")
    common(p)
    p.add_argument("--fractions", type=_floats, default=list(DEFAULT_FRACTIONS))
    p.set_defaults(func=cmd_snapshots)

    p = sub.add_parser("sweep-delta", help="one run per delta, writes summary.csv")
    common(p)
    p.add_argument("--deltas", type=_floats, required=True)
    p.set_defaults(func=cmd_sweep_delta)

    p = sub.add_parser("scaling", help="first-peak time against sqrt(N)")
    common(p, config_required=False)
    p.add_argument("--N-list", dest="N_list", type=_ints, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--lambda", dest="lam", type=float)
    p.set_defaults(func=cmd_scaling)

    p = sub.add_parser("oracle-check", help="RK4 against exact propagation")
    p.add_argument("--N", type=int, default=4)
    p.add_argument("--K", type=int, default=3)
    p.add_argument("--delta", type=float, default=1e3)
    p.add_argument("--cap", type=int, default=4096)
    p.add_argument("--dt-factor", type=float, default=40.0)
    p.add_argument("-o", "--output-dir")
    p.set_defaults(func=cmd_oracle_check)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InvalidConfiguration, OracleTooLarge) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NormViolation, NumericalFailure) as exc:
        print(f"numerical violation: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (NoPeak, ScalingFailure) as exc:
        print(f"search failure: {exc}", file=sys.stderr)
        return EXIT_SEARCH


if __name__ == "__main__":
    sys.exit(main())
