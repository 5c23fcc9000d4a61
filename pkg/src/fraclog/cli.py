"""Command line front end.

::

    fraclog simulate|sweep|stability|existence|ml-eval --config FILE
            [--out DIR] [--epsilon V] [--sweep NAME=V1,V2,...]

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from fraclog.config import RunConfig, load_config
from fraclog.errors import ConfigError, NonFiniteState, SingularArgument, TruncationFailure
from fraclog.models import (
    as_rhs,
    classify_stability,
    critical_horizon,
    existence_condition,
    model_existence,
    perturbation_samples,
)
from fraclog.scheme import Trajectory, solve_pece
from fraclog.special import (
    MLSpec,
    SeriesControl,
    ml_general,
    ml_series,
    needs_extended_precision,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

SWEEPABLE = ("x0", "theta", "mu", "gamma")


# -- output helpers -------------------------------------------------------

def fmt(x: float) -> str:
    """17 significant digits: round-trips every double exactly."""
    return format(float(x), ".17g")


def write_csv(path: Path, traj: Trajectory):
    lines = ["t,x"]
    lines += [f"{fmt(t)},{fmt(x)}" for t, x in zip(traj.times, traj.values)]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def read_csv(path: str | Path) -> tuple[np.ndarray, np.ndarray]:
    """Parse a trajectory CSV written by :func:`write_csv`."""
    rows = Path(path).read_text(encoding="utf-8").splitlines()
    if not rows or rows[0] != "t,x":
        raise ValueError(f"{path}: not a trajectory CSV")
    data = [tuple(map(float, row.split(","))) for row in rows[1:]]
    arr = np.array(data, dtype=float).reshape(-1, 2)
    return arr[:, 0], arr[:, 1]


def write_json(path: Path, payload):
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n",
                    encoding="utf-8", newline="\n")


def label(value: float) -> str:
    return format(value, "g")


def time_to_epsilon(traj: Trajectory, target: float, eps: float) -> float | None:
    """First grid time after which ``|x - target| <= eps`` holds to the end
    of the trajectory; ``None`` if the final value is still outside."""
    outside = np.nonzero(np.abs(traj.values - target) > eps)[0]
    if outside.size == 0:
        return float(traj.times[0])
    last = outside[-1]
    if last == traj.values.size - 1:
        return None
    return float(traj.t0 + (last + 1) * traj.h)


def nearest(points, x: float) -> float:
    return min(points, key=lambda p: abs(p - x))


# -- running ---------------------------------------------------------------

def run_one(cfg: RunConfig, x0: float) -> tuple[Trajectory, str | None]:
    """Solve one trajectory; failures come back as ``(partial, message)``."""
    try:
        # overflow is detected and reported by the solver itself
        with np.errstate(over="ignore", invalid="ignore"):
            traj = solve_pece(as_rhs(cfg.model), x0, cfg.ord, cfg.solver_config(),
                              model=cfg.model.kind)
        return traj, None
    except NonFiniteState as exc:
        return exc.trajectory, str(exc)


def _run_job(job):
    cfg, x0 = job
    return run_one(cfg, x0)


def run_many(jobs: list[tuple[RunConfig, float]], workers: int | None = None):
    """Independent solves, in parallel processes when ``workers > 1``.
    Results come back in job order."""
    if workers is None:
        workers = min(len(jobs), os.cpu_count() or 1)
    if workers <= 1 or len(jobs) == 1:
        return [_run_job(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_job, jobs))


def summarize(cfg: RunConfig, x0: float, traj: Trajectory, error: str | None,
              eps: float) -> dict:
    final = traj.final
    eq = nearest(cfg.model.equilibria(), final)
    stable = classify_stability(cfg.model).stable
    target = nearest(stable, final) if stable else eq
    return {
        "x0": x0,
        "final": final,
        "t_final": float(traj.times[-1]),
        "nearest_equilibrium": eq,
        "distance": abs(final - eq),
        "time_to_eps": None if error else time_to_epsilon(traj, target, eps),
        "epsilon": eps,
        "status": traj.meta.get("status", "ok"),
        "error": error,
        **{k: traj.meta[k] for k in ("scheme", "corrector_iterations",
                                      "max_iterations_used", "k_cut",
                                      "gamma_series") if k in traj.meta},
    }


def _summary_line(s: dict) -> str:
    tte = "never" if s["time_to_eps"] is None else f"{s['time_to_eps']:.6g}"
    line = (f"x0={label(s['x0'])} final={s['final']:.10g} "
            f"nearest_equilibrium={label(s['nearest_equilibrium'])} "
            f"distance={s['distance']:.3e} time_to_eps={tte} "
            f"k_cut={s.get('k_cut')} status={s['status']}")
    return line


def _out_dir(args, cfg: RunConfig) -> Path:
    out = Path(args.out or cfg.output or "fraclog-out")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _epsilon(args, cfg: RunConfig) -> float:
    eps = args.epsilon if args.epsilon is not None else cfg.epsilon
    if not eps > 0:
        raise ConfigError("--epsilon", "must be positive")
    return eps


# -- commands ---------------------------------------------------------------

def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    eps = _epsilon(args, cfg)
    out = _out_dir(args, cfg)
    results = run_many([(cfg, x0) for x0 in cfg.x0], args.jobs)
    summaries = []
    for x0, (traj, error) in zip(cfg.x0, results):
        name = "trajectory.csv" if len(cfg.x0) == 1 else f"trajectory_x0={label(x0)}.csv"
        write_csv(out / name, traj)
        s = summarize(cfg, x0, traj, error, eps)
        s["file"] = name
        summaries.append(s)
        print(_summary_line(s))
        if error:
            print(f"error: {error}; partial trajectory written to {out / name}",
                  file=sys.stderr)
    write_json(out / "summary.json", summaries)
    return EXIT_NUMERIC if any(s["error"] for s in summaries) else EXIT_OK


def parse_sweep(spec: str) -> tuple[str, list[float]]:
    if "=" not in spec:
        raise ConfigError("--sweep", f"expected NAME=V1,V2,..., got {spec!r}")
    name, _, values = spec.partition("=")
    name = name.strip()
    if name not in SWEEPABLE:
        raise ConfigError("--sweep", f"cannot sweep {name!r}; choose from {SWEEPABLE}")
    try:
        parsed = [float(v) for v in values.split(",") if v.strip()]
    except ValueError:
        raise ConfigError("--sweep", f"non-numeric value in {values!r}") from None
    if not parsed:
        raise ConfigError("--sweep", "no values given")
    return name, parsed


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    if not args.sweep:
        raise ConfigError("--sweep", "required for the sweep command")
    name, values = parse_sweep(args.sweep)
    eps = _epsilon(args, cfg)
    # validate every variant before computing anything
    variants = [cfg.replace(**{name: v}) for v in values]
    jobs, tags = [], []
    for v, variant in zip(values, variants):
        for x0 in variant.x0:
            jobs.append((variant, x0))
            tags.append((v, x0))
    out = _out_dir(args, cfg)
    results = run_many(jobs, args.jobs)

    rows = []
    for (v, x0), (variant, _), (traj, error) in zip(tags, jobs, results):
        if name == "x0" or len(variant.x0) == 1:
            fname = f"sweep_{name}={label(v)}.csv"
        else:
            fname = f"sweep_{name}={label(v)}_x0={label(x0)}.csv"
        write_csv(out / fname, traj)
        s = summarize(variant, x0, traj, error, eps)
        s[name] = v
        s["file"] = fname
        rows.append(s)
        if error:
            print(f"error: {error} ({name}={label(v)}, x0={label(x0)})", file=sys.stderr)

    header = f"{name},x0,time_to_eps,final,status" if name != "x0" else "x0,time_to_eps,final,status"
    lines = [header]
    for s in rows:
        tte = "" if s["time_to_eps"] is None else fmt(s["time_to_eps"])
        cells = [fmt(s[name])] if name != "x0" else []
        cells += [fmt(s["x0"]), tte, fmt(s["final"]), s["status"]]
        lines.append(",".join(cells))
    (out / f"sweep_{name}.csv").write_text("\n".join(lines) + "\n",
                                          encoding="utf-8", newline="\n")
    write_json(out / f"sweep_{name}.json", rows)

    print(f"{name:>10} {'x0':>8} {'time_to_eps':>12} {'final':>14}  status")
    for s in rows:
        tte = "never" if s["time_to_eps"] is None else f"{s['time_to_eps']:.6g}"
        print(f"{label(s[name]):>10} {label(s['x0']):>8} {tte:>12} "
              f"{s['final']:>14.10g}  {s['status']}")
    return EXIT_NUMERIC if any(s["error"] for s in rows) else EXIT_OK


def cmd_stability(args) -> int:
    cfg = load_config(args.config)
    report = classify_stability(cfg.model)
    payload = {"model": cfg.model.kind, "equilibria": [], "samples": []}
    for e in report:
        print(f"{label(e.equilibrium)}: {e.classification.replace('-', ' ')} "
              f"(f'={e.derivative:.6g})")
        payload["equilibria"].append({
            "equilibrium": e.equilibrium, "derivative": e.derivative,
            "classification": e.classification})
    for x0 in cfg.x0:
        samples = perturbation_samples(cfg.model, cfg.ord, x0, cfg.sample_times)
        for y, mags in samples.items():
            cells = " ".join(f"|a({label(t)})|={m:.6g}" for t, m in zip(cfg.sample_times, mags))
            print(f"x0={label(x0)} around {label(y)}: {cells}")
            payload["samples"].append({"x0": x0, "equilibrium": y,
                                       "times": list(cfg.sample_times),
                                       "abs_alpha": mags})
    out = _out_dir(args, cfg)
    write_json(out / "stability.json", payload)
    return EXIT_OK


def cmd_existence(args) -> int:
    cfg = load_config(args.config)
    L = args.L if args.L is not None else cfg.L
    if cfg.lipschitz_A is not None:
        report = existence_condition(cfg.ord, cfg.t0, cfg.t_end, cfg.lipschitz_A,
                                     bound_L=L)
    else:
        if L is None:
            raise ConfigError("L", "domain radius needed (config key 'L' or --L)")
        if not L > 0:
            raise ConfigError("L", "must be positive")
        report = model_existence(cfg.model, cfg.ord, cfg.t0, cfg.t_end, L)
    A_eff = max(report.lipschitz_A, 0.0)
    t_star = critical_horizon(cfg.ord, cfg.t0, A_eff)
    print(f"branch={report.branch} A={report.lipschitz_A:.17g} L={L} "
          f"T={cfg.t_end:g} C1={report.condition_value:.17g} "
          f"satisfied={str(report.satisfied).lower()}")
    print(f"critical horizon T*={'inf' if math.isinf(t_star) else format(t_star, '.12g')}")
    for w in report.warnings:
        print(f"warning: {w}")
    out = _out_dir(args, cfg)
    write_json(out / "existence.json", {
        "branch": report.branch, "lipschitz_A": report.lipschitz_A, "bound_L": L,
        "horizon_T": report.horizon_T, "condition_value": report.condition_value,
        "satisfied": report.satisfied, "critical_horizon":
            None if math.isinf(t_star) else t_star,
        "warnings": report.warnings})
    return EXIT_OK


ML_KEYS = ("theta", "beta", "rho", "lambda", "z")


def cmd_ml_eval(args) -> int:
    params = {}
    if args.config:
        try:
            raw = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError("--config", str(exc)) from None
        for key in raw:
            if key not in ML_KEYS:
                raise ConfigError(key, "unknown key")
        params.update(raw)
    for key in ML_KEYS:
        value = getattr(args, key.replace("lambda", "lam"))
        if value is not None:
            params[key] = value
    for key in ML_KEYS:
        if key not in params:
            raise ConfigError(key, "missing")
        if isinstance(params[key], bool) or not isinstance(params[key], (int, float)):
            raise ConfigError(key, f"expected a number, got {params[key]!r}")
    try:
        spec = MLSpec(params["theta"], params["beta"], params["rho"], params["lambda"])
    except ValueError as exc:
        raise ConfigError("theta", str(exc)) from None
    ctrl = SeriesControl()
    try:
        res = ml_series(spec, params["z"], ctrl)
    except SingularArgument as exc:
        raise ConfigError("z", str(exc)) from None
    # error_estimate describes the double-precision sum; when it is too
    # large the printed value is the mpmath recomputation instead
    extended = res.converged and params["z"] != 0 and needs_extended_precision(res, ctrl)
    value = ml_general(spec, params["z"], ctrl) if extended else res.value
    print(f"value={fmt(value)} error_estimate={res.error_estimate:.3e} "
          f"terms={res.n_terms} converged={str(res.converged).lower()} "
          f"precision={'mp' if extended else 'double'}")
    if not res.converged:
        print(f"error: series not converged after {res.n_terms} terms", file=sys.stderr)
        return EXIT_NUMERIC
    if not res.accurate:
        print("warning: accuracy advisory exceeded for the double-precision sum",
              file=sys.stderr)
    return EXIT_OK


# -- entry point ------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fraclog",
        description="Generalized ABC-fractional logistic models.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required=True):
        p.add_argument("--config", required=config_required,
                       help="flat JSON run configuration")
        p.add_argument("--out", help="output directory (default: config 'output' "
                                     "or ./fraclog-out)")
        p.add_argument("--epsilon", type=float,
                       help="threshold for time-to-epsilon (default 0.02)")
        p.add_argument("--jobs", type=int, default=None,
                       help="parallel worker processes")
        return p

    common(sub.add_parser("simulate", help="solve and write trajectory CSVs")) \
        .set_defaults(func=cmd_simulate)
    p = common(sub.add_parser("sweep", help="sweep x0, theta, mu or gamma"))
    p.add_argument("--sweep", help="NAME=V1,V2,... with NAME in x0, theta, mu, gamma")
    p.set_defaults(func=cmd_sweep)
    common(sub.add_parser("stability", help="equilibrium stability report")) \
        .set_defaults(func=cmd_stability)
    p = common(sub.add_parser("existence", help="existence condition report"))
    p.add_argument("--L", type=float, help="radius of the solution domain |x| <= L")
    p.set_defaults(func=cmd_existence)
    p = common(sub.add_parser("ml-eval", help="evaluate E^rho_{theta,beta}(lambda, z)"),
               config_required=False)
    for key in ("theta", "beta", "rho", "z"):
        p.add_argument(f"--{key}", type=float)
    p.add_argument("--lambda", dest="lam", type=float)
    p.set_defaults(func=cmd_ml_eval)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NonFiniteState, TruncationFailure) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def run():
    sys.exit(main())


if __name__ == "__main__":
    run()
