"""Command-line driver: ``dopg {solve,converge,bench,dump-matrices} --config run.yaml --out DIR``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.

Output files (all CSV files have a header row):

``coefficients.csv``  ``n, m1, ..., md, value``; full-precision solution coefficients
``error.csv``         ``modes, linf, l2, seconds``
``convergence.csv``   ``step, modes, N, M, linf, l2, seconds, status, rate``; rate only on the last row
``convergence.svg``   error against refinement size, drawn from ``convergence.csv``
``benchmark.csv``     ``study, d, expansion, solver, seconds, linf, status``
``matrices/*.csv``    one row-major full-precision file per assembled matrix
``manifest.json``     echoed config, versions, wall time, headline results
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import platform
import sys
import time
from contextlib import nullcontext
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
import scipy

from dopg import __version__
from dopg.assembly import assemble_operators
from dopg.config import ConfigError, RunConfig, load_config, safe_eval
from dopg.errors import DopgError, SizeGuardError
from dopg.manufactured import LoadTensor, assemble_load_quadrature, fabricate_load, make_case
from dopg.postproc import ROUNDOFF_RELATIVE, GridSpec, fit_rate, linf_error
from dopg.solver import DIRECT_SIZE_LIMIT, direct_solve, fast_solve

__all__ = ["main", "EXIT_OK", "EXIT_CONFIG", "EXIT_NUMERIC"]

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3

log = logging.getLogger("dopg")


def _load(cfg: RunConfig, disc) -> LoadTensor:
    if cfg.case is not None:
        return fabricate_load(cfg.case.exact, cfg.problem, disc, q_order=cfg.q_load)
    names = [f"x{j + 1}" for j in range(cfg.problem.d)]
    f = lambda t, *x: safe_eval(cfg.load_expr, t=t, **dict(zip(names, x)))
    return assemble_load_quadrature(f, cfg.problem, disc)


def _solve(cfg: RunConfig, disc, solver: str = "fast"):
    """Assemble, build the load and solve; returns ``(U, seconds, info)``."""
    start = time.perf_counter()
    ops = assemble_operators(cfg.problem, disc)
    F = _load(cfg, disc)
    info = {"quadrature_notes": list(ops.warnings), "load": F.provenance}
    if solver == "direct":
        U = direct_solve(ops, F)
    else:
        U = fast_solve(ops, F)
        if solver == "both":
            Ud = direct_solve(ops, F)
            info["fast_direct_discrepancy"] = float(
                np.abs(U.coeffs - Ud.coeffs).max() / max(np.abs(Ud.coeffs).max(), 1e-300)
            )
    return U, time.perf_counter() - start, info


def _exact_sup(cfg: RunConfig, density: int) -> float:
    axes = GridSpec(density).axes(cfg.problem.T, cfg.problem.bounds)
    return float(np.prod([np.abs(v).max() for v in cfg.case.exact.grid_factors(axes[0], axes[1:])]))


def _write_coefficients(path: Path, coeffs: np.ndarray) -> None:
    d = coeffs.ndim - 1
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n"] + [f"m{j + 1}" for j in range(d)] + ["value"])
        for idx in np.ndindex(coeffs.shape):
            w.writerow([i + 1 for i in idx] + [repr(float(coeffs[idx]))])


def _manifest(out: Path, command: str, cfg: RunConfig, args, started: float, results: dict, outputs: list[str]) -> None:
    doc = {
        "manifest": {
            "command": command,
            "source": cfg.source,
            "version": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "date": datetime.now(timezone.utc).isoformat(timespec="seconds"),
            "wall_seconds": time.perf_counter() - started,
            "threads": args.threads,
            "seed": args.seed,
            "outputs": outputs,
            "results": results,
        },
        "config": cfg.raw,
    }
    (out / "manifest.json").write_text(json.dumps(doc, indent=2, default=float) + "\n")


def run_solve(cfg: RunConfig, out: Path, args) -> int:
    started = time.perf_counter()
    U, seconds, info = _solve(cfg, cfg.disc, cfg.solver)
    outputs = ["coefficients.csv"]
    _write_coefficients(out / "coefficients.csv", U.coeffs)
    results = {"seconds": seconds, **info}
    if cfg.case is not None:
        rep = linf_error(U, cfg.case.exact, cfg.grid_density, seconds)
        (out / "error.csv").write_text(rep.to_csv())
        outputs.append("error.csv")
        results.update(linf=rep.linf, l2=rep.l2)
        log.info("linf error %.3e (%.2f s)", rep.linf, seconds)
    _manifest(out, "solve", cfg, args, started, results, outputs)
    return EXIT_OK


CONVERGENCE_COLUMNS = ("step", "modes", "N", "M", "linf", "l2", "seconds", "status", "rate")


def plot_convergence(csv_path: Path, svg_path: Path) -> None:
    """Semilog error plot built only from a convergence CSV."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    with csv_path.open() as fh:
        rows = [r for r in csv.DictReader(fh) if r["status"] == "ok"]
    axis = "N" if len({r["N"] for r in rows}) > 1 else "M"
    x = [int(r[axis].split("x")[0]) for r in rows]
    y = [float(r["linf"]) for r in rows]
    fig, ax = plt.subplots(figsize=(5, 3.6))
    ax.semilogy(x, y, "o-")
    ax.set_xlabel(axis)
    ax.set_ylabel(r"$\|e\|_{L^\infty}$")
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(svg_path, format="svg")
    plt.close(fig)


def run_converge(cfg: RunConfig, out: Path, args) -> int:
    started = time.perf_counter()
    if cfg.case is None:
        raise ConfigError("converge needs a manufactured case")
    if not cfg.refine_values:
        raise ConfigError("converge needs experiment.refine.values")
    history, status = [], EXIT_OK
    csv_path = out / "convergence.csv"
    with csv_path.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=CONVERGENCE_COLUMNS)
        w.writeheader()
        rows = []
        for step, v in enumerate(cfg.refine_values, start=1):
            disc = cfg.with_sizes(N=v) if cfg.refine_axis == "time" else cfg.with_sizes(M=v)
            row = {"step": step, "modes": "x".join(map(str, disc.shape)), "N": disc.N,
                   "M": "x".join(map(str, disc.M)), "rate": ""}
            try:
                U, seconds, _ = _solve(cfg, disc, cfg.solver)
                rep = linf_error(U, cfg.case.exact, cfg.grid_density, seconds)
            except DopgError as exc:
                row.update(linf="", l2="", seconds="", status=f"failed: {exc}")
                w.writerow(row)
                log.error("step %d failed: %s", step, exc)
                status = EXIT_NUMERIC
                break
            row.update(linf=f"{rep.linf:.6e}", l2=f"{rep.l2:.6e}", seconds=f"{seconds:.4f}", status="ok")
            history.append((v, rep.linf))
            rows.append(row)
            log.info("step %d %s linf %.3e", step, row["modes"], rep.linf)
            if step < len(cfg.refine_values):
                w.writerow(row)
        results = {"history": history}
        if status == EXIT_OK:
            if len(history) >= 3:
                fit = fit_rate(history, floor=ROUNDOFF_RELATIVE * _exact_sup(cfg, cfg.grid_density))
                rows[-1]["rate"] = f"{fit.rate:.4f}"
                results.update(rate=fit.rate, monotone=fit.monotone, fitted_steps=list(fit.used))
            w.writerow(rows[-1])
    outputs = ["convergence.csv"]
    if history:
        plot_convergence(csv_path, out / "convergence.svg")
        outputs.append("convergence.svg")
    _manifest(out, "converge", cfg, args, started, results, outputs)
    return status


BENCH_COLUMNS = ("study", "d", "expansion", "solver", "seconds", "linf", "status")


def _timed(fn, repeats: int):
    best, value = float("inf"), None
    for _ in range(repeats):
        t = time.perf_counter()
        value = fn()
        best = min(best, time.perf_counter() - t)
    return value, best


def run_benchmark(cfg: RunConfig, out: Path, args) -> int:
    started = time.perf_counter()
    if cfg.case is None:
        raise ConfigError("bench needs a manufactured case")
    b = cfg.bench
    dims, N, M = b.get("dims", [1, 2, 3]), b.get("N", 4), b.get("M", 11)
    repeats = b.get("repeats", 3)
    params = {k: v for k, v in cfg.raw["case"].items() if k not in ("name", "d")}
    rng = np.random.default_rng(args.seed)
    rows, fast_times = [], {}
    for d in dims:
        case = make_case(cfg.case.name, d=d, **params)
        disc = case.discretization(N, M, q_time=cfg.disc.q_time, q_space=cfg.disc.q_space)
        expansion = "x".join(map(str, disc.shape))

        def pipeline(solver):
            ops = assemble_operators(case.problem, disc)
            F = case.load(disc, q_order=cfg.q_load)
            return (fast_solve if solver == "fast" else direct_solve)(ops, F)

        U, secs = _timed(lambda: pipeline("fast"), repeats)
        fast_times[d] = secs
        linf = linf_error(U, case.exact, cfg.grid_density).linf
        rows.append(dict(study="table", d=d, expansion=expansion, solver="fast", seconds=f"{secs:.6f}",
                         linf=f"{linf:.6e}", status="ok"))
        log.info("d=%d %s fast %.4f s linf %.3e", d, expansion, secs, linf)
        if np.prod(disc.shape) > DIRECT_SIZE_LIMIT:
            rows.append(dict(study="table", d=d, expansion=expansion, solver="direct", seconds="", linf="",
                             status=f"skipped: {np.prod(disc.shape)} unknowns exceed {DIRECT_SIZE_LIMIT}"))
            log.warning("d=%d: direct solver skipped (size guard)", d)
            continue
        try:
            Ud, secs = _timed(lambda: pipeline("direct"), 1)
        except SizeGuardError as exc:
            rows.append(dict(study="table", d=d, expansion=expansion, solver="direct", seconds="", linf="",
                             status=f"skipped: {exc}"))
            continue
        linf = linf_error(Ud, case.exact, cfg.grid_density).linf
        rows.append(dict(study="table", d=d, expansion=expansion, solver="direct", seconds=f"{secs:.6f}",
                         linf=f"{linf:.6e}", status="ok"))

    # fast/direct crossover on d = 2 systems with random loads (solve phase only)
    crossover = []
    case2d = make_case(cfg.case.name, d=2, **params)
    for m in b.get("crossover_M", [2, 4, 6, 8, 10]):
        disc = case2d.discretization(N, m)
        ops = assemble_operators(case2d.problem, disc)
        F = rng.standard_normal(disc.shape)
        timings = {}
        for name, fn in (("fast", fast_solve), ("direct", direct_solve)):
            try:
                _, timings[name] = _timed(lambda: fn(ops, F), repeats)
            except SizeGuardError as exc:
                rows.append(dict(study="crossover", d=2, expansion=f"{N}x{m}x{m}", solver=name, seconds="",
                                 linf="", status=f"skipped: {exc}"))
                continue
            rows.append(dict(study="crossover", d=2, expansion=f"{N}x{m}x{m}", solver=name,
                             seconds=f"{timings[name]:.6f}", linf="", status="ok"))
        if len(timings) == 2:
            crossover.append((m, timings["fast"], timings["direct"]))

    with (out / "benchmark.csv").open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=BENCH_COLUMNS)
        w.writeheader()
        w.writerows(rows)
    results = {"fast_seconds": fast_times, "crossover": crossover}
    if 1 in fast_times and max(fast_times) > 1:
        results["fast_growth"] = fast_times[max(fast_times)] / fast_times[1]
    faster = [m for m, f, dd in crossover if f < dd]
    results["crossover_M"] = faster[0] if faster else None
    _manifest(out, "bench", cfg, args, started, results, ["benchmark.csv"])
    return EXIT_OK


def run_dump(cfg: RunConfig, out: Path, args) -> int:
    started = time.perf_counter()
    ops = assemble_operators(cfg.problem, cfg.disc)
    mdir = out / "matrices"
    mdir.mkdir(exist_ok=True)
    names = []
    for name, mat in ops.matrices().items():
        np.savetxt(mdir / f"{name}.csv", np.atleast_2d(mat), delimiter=",", fmt="%.17g")
        names.append(f"matrices/{name}.csv")
    _manifest(out, "dump-matrices", cfg, args, started, {"quadrature_notes": list(ops.warnings)}, names)
    return EXIT_OK


COMMANDS = {"solve": run_solve, "converge": run_converge, "bench": run_benchmark, "dump-matrices": run_dump}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dopg", description="Space-time spectral solver for distributed-order diffusion.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="YAML run configuration (or a JSON manifest)")
        p.add_argument("--out", default="out", help="output directory (created if missing)")
        p.add_argument("--threads", type=int, default=None, help="BLAS/LAPACK thread limit")
        p.add_argument("--seed", type=int, default=0, help="seed for randomized drivers")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args.config)
        if args.command in ("converge", "bench") and cfg.case is None:
            raise ConfigError(f"{args.command} needs a manufactured case section")
        if args.command == "converge" and not cfg.refine_values:
            raise ConfigError("converge needs experiment.refine.values")
    except ConfigError as exc:
        print(f"config error: {args.config}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.threads is not None and args.threads < 1:
        print("config error: --threads must be positive", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.threads is not None:
        from threadpoolctl import threadpool_limits

        limits = threadpool_limits(limits=args.threads)
    else:
        limits = nullcontext()
    try:
        with limits:
            return COMMANDS[args.command](cfg, out, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DopgError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
