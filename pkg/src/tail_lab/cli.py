"""Command-line driver: tail-lab {resonances|rates|simulate|verify|report|hypergeo}.

Exit codes: 0 pass, 1 verification failure, 2 usage/config error,
3 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .config import ConfigError, DataConfig, RunConfig, TrajectoryConfig
from .decayfit import (
    FitError,
    LabeledFit,
    WindowPolicy,
    compare,
    fit_rate,
    floor_from_control,
    pulse_passage_time,
)
from .evolve import CFLError, CleanWindowError, EvolutionError, Grid, InitialData, evolve
from .geometry import FixedR
from .indexsets import UnsupportedParameterError, predicted_rates
from .resonance import DegenerateParameterError, closed_form_resonances, locate_resonances_numeric
from .specfun import GammaPoleError, HypergeometricConvergenceError, hyp2f1
from .spectrum import CouplingError, ModeSpec, Problem

__all__ = ["main", "build_parser", "run_simulation", "run_verification"]

EXIT_PASS, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3
COMPLETE_MARKER = "COMPLETE"
CSV_HEADER = ["t", "re", "im", "trajectory_id"]

log = logging.getLogger("tail_lab")


class PartialRunError(ConfigError):
    pass


def thread_count() -> int:
    raw = os.environ.get("TAIL_LAB_THREADS")
    if raw is None or raw == "":
        return os.cpu_count() or 1
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError("TAIL_LAB_THREADS", f"expected a positive integer, got {raw!r}") from None
    if n < 1:
        raise ConfigError("TAIL_LAB_THREADS", "must be >= 1")
    return n


# ---------------------------------------------------------------- resonances / rates


def cmd_resonances(args) -> int:
    out = sys.stdout
    worst = 0.0
    out.write(f"resonances sigma_(j,k) = -i(1/2 + nu_j + k), n={args.n} coupling={args.coupling:g}\n")
    for j in range(args.jmax + 1):
        spec = ModeSpec.wave(args.n, args.coupling, j)
        fam = closed_form_resonances(spec, args.kmax)
        cls = fam.mode_class
        out.write(f"j={j} nu={spec.exponent:.12g} leading exponent={fam.leading_exponent:.12g}"
                  f" class={cls.value}\n")
        numeric = None
        if args.numeric:
            s = spec.exponent
            try:
                numeric = locate_resonances_numeric(
                    spec, (-0.5, 0.5, -(s + args.kmax + 1.0), -(s + 0.1)), grid=args.grid)
            except DegenerateParameterError:
                out.write("  degenerate: 1/2 + nu is an integer, zeros cancel against poles\n")
        for k, sig in enumerate(fam.resonances):
            line = f"  k={k} sigma={sig.real:+.12f}{sig.imag:+.12f}i"
            if numeric is not None:
                if numeric:
                    near = min(numeric, key=lambda z: abs(z - sig))
                    dev = abs(near - sig)
                    worst = max(worst, dev)
                    line += f"  numeric={near.real:+.12f}{near.imag:+.12f}i  dev={dev:.2e}"
                else:
                    line += "  numeric=none"
            out.write(line + "\n")
        if numeric is not None and len(numeric) != len(fam.resonances):
            out.write(f"  warning: {len(numeric)} numeric zeros vs {len(fam.resonances)} closed form\n")
    if args.numeric:
        out.write(f"max deviation {worst:.3e}\n")
    return EXIT_PASS


def _exceptional_note(table) -> str | None:
    if table.problem is not Problem.WAVE or not table.leading_mode:
        return None
    two_nu = 2.0 * ModeSpec.wave(table.n, table.coupling, 0).exponent
    return (f"exceptional (odd integer): 2 nu_0 = {two_nu:.6g} is an odd integer, "
            f"j = 0 has no tail at fixed r; leading term from j = {table.leading_mode}")


def cmd_rates(args) -> int:
    table = predicted_rates(args.problem, n=args.n, coupling=args.coupling, jmax=args.jmax)
    if args.format == "csv":
        sys.stdout.write(table.to_csv())
    else:
        print(table.to_text())
    note = _exceptional_note(table)
    if note:
        print(note)
    return EXIT_PASS


def parse_complex(text: str) -> complex:
    """Accept "re,im" or any Python complex literal such as "1.5-2j"."""
    text = text.replace(" ", "")
    if "," in text:
        re_, im_ = text.split(",", 1)
        return complex(float(re_), float(im_))
    return complex(text)


def cmd_hypergeo(args) -> int:
    a, b, c = (parse_complex(v) for v in (args.a, args.b, args.c))
    val = hyp2f1(a, b, c, args.x)
    print(f"2F1({a}, {b}; {c}; {args.x}) = {val.real:.15g} {val.imag:+.15g}i")
    return EXIT_PASS


# ---------------------------------------------------------------- simulate


def _config_from_args(args) -> RunConfig:
    cfg = RunConfig.load(args.config) if getattr(args, "config", None) else RunConfig()
    over = {}
    for name in ("problem", "n", "coupling", "h", "dt", "t_max", "sample_dt", "tolerance",
                 "t_lo", "t_hi", "min_decades"):
        val = getattr(args, name, None)
        if val is not None:
            over[name] = val
    if getattr(args, "modes", None):
        over["modes"] = args.modes
    if getattr(args, "out", None):
        over["output_dir"] = args.out
    trs = [TrajectoryConfig("fixed_r", v) for v in (getattr(args, "fixed_r", None) or [])]
    trs += [TrajectoryConfig("ray", v) for v in (getattr(args, "ray", None) or [])]
    if trs:
        over["trajectories"] = trs
    if getattr(args, "amplitude", None) is not None or getattr(args, "seed", None):
        d = cfg.data.__dict__.copy()
        if args.amplitude is not None:
            d["amplitude"] = args.amplitude
        if args.seed:
            key = "wave_seed" if (over.get("problem", cfg.problem) == "wave") else "dirac_seed"
            d[key] = args.seed
        over["data"] = DataConfig(**d)
    for k, v in over.items():
        setattr(cfg, k, v)
    if cfg.problem == "dirac" and getattr(args, "modes", None) is None and cfg.modes == [0]:
        cfg.modes = [1]
    return cfg.validate()


def _series_path(run: Path, mode: int, slug: str) -> Path:
    return run / f"mode{mode}_{slug}.csv"


def _write_series(path: Path, traj_id: str, t, vals) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for ti, v in zip(t, vals):
            w.writerow([repr(float(ti)), repr(float(v.real)), repr(float(v.imag)), traj_id])


def read_series(path: Path):
    data = np.genfromtxt(path, delimiter=",", skip_header=1, usecols=(0, 1, 2), ndmin=2)
    return data[:, 0], data[:, 1] + 1j * data[:, 2]


_OWNED_SUFFIXES = (".csv", ".svg")
_OWNED_NAMES = ("config.json", "run.log", COMPLETE_MARKER, "report.txt", "report.json", "meta.json")


def _clear_run_dir(run: Path) -> None:
    for p in run.iterdir():
        if p.is_file() and (p.suffix in _OWNED_SUFFIXES or p.name in _OWNED_NAMES):
            p.unlink()


def _attach_log(run: Path) -> logging.Handler:
    handler = logging.FileHandler(run / "run.log", mode="a")
    handler.setFormatter(logging.Formatter("%(asctime)s %(levelname)s %(message)s"))
    log.addHandler(handler)
    log.setLevel(logging.INFO)
    return handler


def run_simulation(cfg: RunConfig, force: bool = False) -> Path:
    """Evolve every configured mode and write the run directory."""
    run = Path(cfg.output_dir)
    if run.exists() and (run / "config.json").exists():
        complete = (run / COMPLETE_MARKER).exists()
        same = (run / "config.json").read_text().strip() == cfg.to_json().strip()
        if not force:
            if not complete:
                raise PartialRunError("output_dir",
                                      f"partial run detected in {run} (no {COMPLETE_MARKER} marker);"
                                      " rerun with --force to restart")
            if same:
                return run
            raise ConfigError("output_dir", f"{run} holds a completed run with a different config;"
                                            " use --force or another --out")
        _clear_run_dir(run)
    run.mkdir(parents=True, exist_ok=True)
    cfg.save(run / "config.json")
    handler = _attach_log(run)
    try:
        grid = cfg.grid()
        data = cfg.data.build()
        trajs = cfg.built_trajectories()
        log.info("start problem=%s n=%d coupling=%r modes=%s h=%r t_max=%r N=%d R=%.4f",
                 cfg.problem, cfg.n, cfg.coupling, cfg.modes, cfg.h, cfg.t_max, grid.N, grid.R)

        def work(mode):
            t0 = time.perf_counter()
            res = evolve(cfg.spec(mode), grid, data, trajs, cfg.sample_dt)
            return mode, res, time.perf_counter() - t0

        with ThreadPoolExecutor(max_workers=min(thread_count(), len(cfg.modes))) as pool:
            results = list(pool.map(work, cfg.modes))

        meta = {}
        for mode, res, secs in results:
            for tc, ser in zip(cfg.trajectories, res.series):
                _write_series(_series_path(run, mode, tc.slug), f"mode{mode}:{ser.label}",
                              ser.t, ser.values)
            meta[str(mode)] = {"drift": res.drift, "peak": res.peak,
                               "diagnostic0": float(res.diagnostic[0])}
            log.info("mode=%d drift=%.3e peak=%.6e seconds=%.2f", mode, res.drift, res.peak, secs)
        (run / "meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
        (run / COMPLETE_MARKER).write_text("complete\n")
        log.info("complete")
    finally:
        log.removeHandler(handler)
        handler.close()
    return run


def cmd_simulate(args) -> int:
    cfg = _config_from_args(args)
    run = run_simulation(cfg, force=args.force)
    print(f"run directory: {run}")
    return EXIT_PASS


# ---------------------------------------------------------------- verify


def _load_run(run: Path) -> RunConfig:
    if not (run / "config.json").exists():
        raise ConfigError("run", f"{run} is not a run directory (no config.json)")
    if not (run / COMPLETE_MARKER).exists():
        raise PartialRunError("run", f"partial run detected in {run}; rerun simulate with --force")
    return RunConfig.load(run / "config.json").validate()


def _control_floor(cfg: RunConfig) -> float:
    """Numerical tail floor from the flat n = 3 Huygens run at the same resolution."""
    ctrl = ModeSpec.wave(3, 0.0, 0)
    traj = [FixedR(2.0)]
    data = InitialData(cfg.data.build().profiles, "velocity")
    grid = Grid.for_run(cfg.t_max, traj, data, h=cfg.h)
    res = evolve(ctrl, grid, data, traj, cfg.sample_dt)
    return floor_from_control(res.series[0].values)


def _rate_table(cfg: RunConfig):
    if cfg.problem == "wave":
        return predicted_rates("wave", n=cfg.n, coupling=cfg.coupling, jmax=max(cfg.modes))
    return predicted_rates("dirac", n=3, coupling=cfg.coupling,
                           jmax=max(abs(m) for m in cfg.modes))


def run_verification(run: Path, tolerance: float | None = None, control_floor: bool = False):
    cfg = _load_run(run)
    tol = cfg.tolerance if tolerance is None else tolerance
    table = _rate_table(cfg)
    floor = _control_floor(cfg) if control_floor else 0.0
    fits = []
    for mode in cfg.modes:
        spec = cfg.spec(mode)
        for tc in cfg.trajectories:
            traj = tc.build()
            path = _series_path(run, mode, tc.slug)
            if not path.exists():
                raise PartialRunError("run", f"missing series {path.name}")
            t, v = read_series(path)
            policy = WindowPolicy(t_lo=cfg.t_lo, t_hi=cfg.t_hi,
                                  t_pass=pulse_passage_time(traj, cfg.data.core_extent),
                                  extrapolation_order=cfg.extrapolation_order,
                                  min_decades=cfg.min_decades)
            peak = float(np.max(np.abs(v))) if v.size else 0.0
            fr = fit_rate(t, v, policy, floor=floor, peak=peak)
            fits.append(LabeledFit(traj, fr, spec, "u" if cfg.problem == "wave" else "f"))
    report = compare(fits, table, tol, floor)
    (run / "report.txt").write_text(report.to_text() + "\n")
    (run / "report.json").write_text(report.to_json() + "\n")
    return report


def cmd_verify(args) -> int:
    if args.run:
        run = Path(args.run)
    else:
        cfg = _config_from_args(args)
        run = run_simulation(cfg, force=args.force)
    report = run_verification(run, args.tolerance, args.control_floor)
    print(report.to_text())
    return EXIT_PASS if report.passed else EXIT_FAIL


# ---------------------------------------------------------------- report


def _plot(path: Path, t, v, title: str, slope: float, window) -> None:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    u = np.abs(v)
    m = (t > 0) & (u > 0)
    fig, ax = plt.subplots(figsize=(6, 4.5))
    ax.loglog(t[m], u[m], lw=1.2, label="|u|")
    if math.isfinite(slope) and np.any(m):
        t_hi = window[1]
        k = int(np.argmin(np.abs(t - t_hi)))
        if u[k] > 0:
            tg = np.geomspace(max(window[0], t[m][0]), t_hi, 20)
            ax.loglog(tg, u[k] * (tg / t[k]) ** slope, "--", color="k",
                      label=f"slope {slope:.3f}")
    ax.set_xlabel("t")
    ax.set_ylabel("|u|")
    ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)


def cmd_report(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    all_ok = True
    lines = []
    for rdir in args.runs:
        run = Path(rdir)
        cfg = _load_run(run)
        if not (run / "report.json").exists():
            run_verification(run)
        rep = json.loads((run / "report.json").read_text())
        all_ok &= bool(rep["passed"])
        lines.append(f"== {run} ({cfg.problem}, n={cfg.n}, coupling={cfg.coupling:g}): "
                     f"{'PASS' if rep['passed'] else 'FAIL'}")
        lines.append((run / "report.txt").read_text().rstrip())
        rows = {(r["mode"], r["trajectory"]): r for r in rep["rows"]}
        for mode in cfg.modes:
            for tc in cfg.trajectories:
                traj = tc.build()
                t, v = read_series(_series_path(run, mode, tc.slug))
                row = rows.get((mode, traj.label))
                slope = math.nan
                window = (t[1] if len(t) > 1 else 1.0, t[-1])
                if row is not None:
                    es = row["expected_slope"]
                    slope = float(es) if isinstance(es, (int, float)) else math.nan
                    window = tuple(row["window"])
                name = f"{run.name}_mode{mode}_{tc.slug}.svg"
                _plot(out / name, t, v, f"{cfg.problem} coupling={cfg.coupling:g} mode={mode} "
                      f"{traj.label}", slope, window)
    summary = "\n".join(lines) + "\n"
    (out / "summary.txt").write_text(summary)
    print(summary, end="")
    return EXIT_PASS if all_ok else EXIT_FAIL


# ---------------------------------------------------------------- parser


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON run configuration")
    p.add_argument("--problem", choices=["wave", "dirac"])
    p.add_argument("--n", type=int)
    p.add_argument("--coupling", type=float, help="inverse-square coupling or charge Z")
    p.add_argument("--modes", type=lambda s: [int(x) for x in s.split(",")],
                   help="comma-separated j (wave) or kappa (Dirac)")
    p.add_argument("--h", type=float)
    p.add_argument("--dt", type=float)
    p.add_argument("--t-max", dest="t_max", type=float)
    p.add_argument("--sample-dt", dest="sample_dt", type=float)
    p.add_argument("--fixed-r", dest="fixed_r", type=float, action="append")
    p.add_argument("--ray", type=float, action="append", help="ray speed gamma in (0,1)")
    p.add_argument("--amplitude", type=float)
    p.add_argument("--seed", help="wave: velocity|displacement|both; Dirac: both|f|g")
    p.add_argument("--t-lo", dest="t_lo", type=float)
    p.add_argument("--t-hi", dest="t_hi", type=float)
    p.add_argument("--min-decades", dest="min_decades", type=float,
                   help="shortest fit window in decades of t (default 1)")
    p.add_argument("--out", help="run directory")
    p.add_argument("--force", action="store_true", help="overwrite an existing run directory")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tail-lab", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("resonances", help="resonance lattice of the inverse-square wave")
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--coupling", type=float, required=True)
    p.add_argument("--jmax", type=int, default=3)
    p.add_argument("--kmax", type=int, default=3)
    p.add_argument("--numeric", action="store_true")
    p.add_argument("--grid", type=int, default=64)
    p.set_defaults(func=cmd_resonances)

    p = sub.add_parser("rates", help="predicted decay rates")
    p.add_argument("--problem", choices=["wave", "dirac"], default="wave")
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--coupling", "--Z", dest="coupling", type=float, required=True,
                   help="inverse-square coupling (wave) or charge Z (dirac)")
    p.add_argument("--jmax", type=int, default=3)
    p.add_argument("--format", choices=["text", "csv"], default="text")
    p.set_defaults(func=cmd_rates)

    p = sub.add_parser("simulate", help="evolve and write a run directory")
    _add_run_flags(p)
    p.set_defaults(func=cmd_simulate, tolerance=None)

    p = sub.add_parser("verify", help="fit tails of a run and compare with predictions")
    p.add_argument("--run", help="existing run directory (otherwise simulate first)")
    _add_run_flags(p)
    p.add_argument("--tolerance", type=float)
    p.add_argument("--control-floor", action="store_true",
                   help="estimate the amplitude floor from a Huygens control run")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("report", help="aggregate runs and emit SVG plots")
    p.add_argument("runs", nargs="+")
    p.add_argument("--out", default="report")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("hypergeo", help="evaluate the Gauss hypergeometric function")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--c", required=True)
    p.add_argument("--x", type=float, required=True)
    p.set_defaults(func=cmd_hypergeo)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_USAGE
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (CFLError, CleanWindowError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (EvolutionError, HypergeometricConvergenceError, FitError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (CouplingError, UnsupportedParameterError, GammaPoleError,
            DegenerateParameterError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
