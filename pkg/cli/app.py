from __future__ import annotations

import argparse
import logging
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np
from pydantic import ValidationError
from rich import box
from rich.console import Console
from rich.logging import RichHandler
from rich.table import Table
from scipy import stats

from bridges import LinearModel
from diagnostics import (
    ess_report,
    gaussian_bridge_marginal,
    ks_statistic,
    qq_data,
    write_ess_report,
    write_json,
    write_qq,
    write_rows,
)
from samplers import Skeleton, discretize, read_skeleton, write_skeleton
from schemas import BoundViolationError, DomainError, OracleError, SkeletonParseError

from .config import LOG_LEVEL, OUTPUT_DIR
from .harness import compare, run_sampler
from .models import CompareConfig, ComparisonRow, RunConfig
from .persistence import (
    context_from_meta,
    describe_skeleton,
    is_skeleton,
    read_samples,
    thin,
    write_paths,
    write_samples,
)


logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2

STATS = ("ess", "qq", "ks", "marginal")

RUNTIME_ERRORS = (BoundViolationError, OracleError, SkeletonParseError, DomainError, OSError)


class UsageError(Exception):
    """Arguments that parse but cannot be combined."""


def _resolve(path: Optional[str], default: str) -> Path:
    out = Path(path or default)
    return out if out.is_absolute() else Path(OUTPUT_DIR) / out


# ----------------------------------------------------------------------
# sample
# ----------------------------------------------------------------------


def _run_flags(args: argparse.Namespace) -> dict:
    return {
        "model": args.model,
        "alpha": args.alpha,
        "beta": args.beta,
        "r": args.r,
        "K": args.K,
        "transformed": args.transformed,
        "levels": args.levels,
        "T": args.T,
        "u": args.u,
        "v": args.v,
        "algorithm": args.algorithm,
        "estimator": args.estimator,
        "clock": args.clock,
        "burnin": args.burnin,
        "dtau": args.dtau,
        "velocity_decay": args.velocity_decay,
        "seed": args.seed,
        "output": args.output,
    }


def cmd_sample(args: argparse.Namespace, console: Console) -> int:
    config = RunConfig.from_sources(args.config, **_run_flags(args))
    if config.seed is None:
        config = config.model_copy(update={"seed": int(np.random.SeedSequence().generate_state(1)[0])})
    logger.info("sampling %s bridge with %s Zig-Zag", config.model, config.algorithm.value)

    result = run_sampler(config)
    skeleton_path, meta_path = write_skeleton(result.skeleton, config.output_path())
    if args.samples:
        write_samples(discretize(result.skeleton, config.burnin, config.dtau), _resolve(args.samples, "samples.csv"))

    table = Table(title="Zig-Zag run", box=box.ROUNDED, header_style="dim")
    for column in ("algorithm", "model", "events", "clock", "seed"):
        table.add_column(column)
    table.add_row(*describe_skeleton(result.skeleton))
    console.print(table)
    console.print(
        f"proposals {result.proposals}, acceptance {result.acceptance_rate:.3f}, "
        f"wall {result.wall_time:.2f}s -> {skeleton_path} (+ {meta_path.name})"
    )
    for warning in result.warnings:
        console.print(f"[yellow]warning:[/yellow] {warning}")
    return EXIT_OK


# ----------------------------------------------------------------------
# paths
# ----------------------------------------------------------------------


def _samples_of(skeleton: Skeleton, burnin: Optional[float], dtau: Optional[float]) -> np.ndarray:
    meta = skeleton.meta
    burnin = (meta.tau_burnin or 0.0) if burnin is None else burnin
    dtau = meta.dtau if dtau is None else dtau
    if dtau is None:
        raise UsageError("sampling step unknown: pass --dtau")
    return discretize(skeleton, burnin, dtau)


def cmd_paths(args: argparse.Namespace, console: Console) -> int:
    skeleton = read_skeleton(args.skeleton)
    ctx = context_from_meta(skeleton.meta)
    samples = thin(_samples_of(skeleton, args.burnin, args.dtau), args.every)
    out = write_paths(ctx, samples, _resolve(args.output, "paths.csv"))
    console.print(f"{samples.shape[0]} paths on {ctx.grid.size} grid points -> {out}")
    return EXIT_OK


# ----------------------------------------------------------------------
# diagnose
# ----------------------------------------------------------------------


def _exact_linear(skeleton: Optional[Skeleton], t: float):
    if skeleton is None or skeleton.meta.model != "linear":
        raise UsageError("--against exact-linear needs a linear-model skeleton")
    meta = skeleton.meta
    model = LinearModel(alpha=meta.model_params.get("alpha", 0.0), beta=meta.model_params.get("beta", 0.0))
    mean, var = gaussian_bridge_marginal(model, meta.u, meta.v, meta.T, t)
    return stats.norm(loc=mean, scale=np.sqrt(var))


def cmd_diagnose(args: argparse.Namespace, console: Console) -> int:
    skeleton: Optional[Skeleton] = None
    if is_skeleton(args.input):
        skeleton = read_skeleton(args.input)
        samples = _samples_of(skeleton, args.burnin, args.dtau)
    else:
        samples = read_samples(args.input)
    out_dir = _resolve(args.output, "diagnostics")
    requested = args.stat or ["ess"]

    if ("ks" in requested or "marginal" in requested) and skeleton is None:
        raise UsageError("ks and marginal need a skeleton input (the basis is read from its sidecar)")
    if not 1 <= args.coefficient <= samples.shape[1]:
        raise UsageError(f"--coefficient must lie in [1, {samples.shape[1]}]")

    table = Table(title="Diagnostics", box=box.ROUNDED, header_style="dim")
    table.add_column("stat")
    table.add_column("value", justify="right")
    table.add_column("file")

    if "ess" in requested:
        report = ess_report(samples)
        paths = write_ess_report(report, out_dir / "ess.csv")
        table.add_row("median ESS", f"{report.median:.1f}", str(paths[0]))
        table.add_row("min ESS", f"{report.min:.1f}", str(paths[1]))
    if "qq" in requested:
        qq = qq_data(samples[:, args.coefficient - 1])
        path = write_qq(qq, out_dir / f"qq_{args.coefficient}.csv")
        table.add_row(f"QQ correlation xi_{args.coefficient}", f"{qq.correlation:.4f}", str(path))
    if "ks" in requested or "marginal" in requested:
        ctx = context_from_meta(skeleton.meta)
        t = 0.5 * ctx.T if args.t is None else args.t
        ctx.check_time(t)
        marginal = ctx.expand_many(samples, t)
        if "marginal" in requested:
            path = write_rows(out_dir / "marginal.csv", ["t", "x"], ((t, float(x)) for x in marginal))
            table.add_row(f"X_{t:g} mean", f"{float(np.mean(marginal)):.4f}", str(path))
        if "ks" in requested:
            value = ks_statistic(marginal, _exact_linear(skeleton, t))
            path = write_json(out_dir / "ks.json", {"t": t, "against": args.against, "ks": value})
            table.add_row(f"KS at t={t:g}", f"{value:.4f}", str(path))

    console.print(table)
    return EXIT_OK


# ----------------------------------------------------------------------
# compare
# ----------------------------------------------------------------------


COMPARE_COLUMNS = tuple(ComparisonRow.model_fields)


def cmd_compare(args: argparse.Namespace, console: Console) -> int:
    grid = CompareConfig.model_validate({
        key: value
        for key, value in {
            "alphas": args.alphas,
            "levels": args.levels,
            "T": args.T,
            "u": args.u,
            "v": args.v,
            "clock": args.clock,
            "burnin": args.burnin,
            "dtau": args.dtau,
            "mala_iterations": args.mala_iterations,
            "seed": args.seed,
            "workers": args.workers,
        }.items()
        if value is not None
    })
    rows = compare(grid)
    out = write_rows(
        _resolve(args.output, "compare.csv"),
        COMPARE_COLUMNS,
        ([getattr(row, name) for name in COMPARE_COLUMNS] for row in rows),
    )

    table = Table(title="ESS per second", box=box.ROUNDED, header_style="dim")
    for column in ("alpha", "method", "xi_1", "median", "min", "status"):
        table.add_column(column, justify="right")
    for row in rows:
        table.add_row(
            f"{row.alpha:g}",
            row.method,
            _fmt(row.ess_first_per_second),
            _fmt(row.ess_median_per_second),
            _fmt(row.ess_min_per_second),
            row.status if row.status == "ok" else "[red]failed[/red]",
        )
    console.print(table)
    console.print(f"{len(rows)} rows -> {out}")
    return EXIT_OK


def _fmt(value: Optional[float]) -> str:
    return "-" if value is None else f"{value:.2f}"


# ----------------------------------------------------------------------
# Parser
# ----------------------------------------------------------------------


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON run config; flags override its values")
    p.add_argument("--model", choices=("linear", "sine", "logistic"))
    p.add_argument("--alpha", type=float, help="linear/sine drift parameter alpha")
    p.add_argument("--beta", type=float, help="linear slope, or logistic noise scale")
    p.add_argument("--r", type=float, help="logistic growth rate")
    p.add_argument("--K", type=float, help="logistic carrying capacity")
    p.add_argument(
        "--transformed", action="store_true", default=None,
        help="logistic endpoints are already on the Lamperti scale",
    )
    p.add_argument("--levels", type=int, help="truncation level N")
    p.add_argument("--T", type=float, help="bridge horizon")
    p.add_argument("--u", type=float, help="start point")
    p.add_argument("--v", type=float, help="end point")
    p.add_argument("--algorithm", choices=("standard", "subsampled", "local", "fully-local"))
    p.add_argument("--estimator", choices=("single", "v1", "v2"))
    p.add_argument("--clock", type=float, help="final Zig-Zag clock tau_final")
    p.add_argument("--burnin", type=float, help="burn-in clock")
    p.add_argument("--dtau", type=float, help="clock step between discretized samples")
    p.add_argument("--velocity-decay", type=float, help="velocity magnitude rho^i at level i")
    p.add_argument("--seed", type=int)
    p.add_argument("--output", help="skeleton CSV path (sidecar written next to it)")
    p.add_argument("--samples", help="also write the discretized samples to this CSV")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="zzbridge",
        description="Zig-Zag samplers for one-dimensional diffusion bridges",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sample = sub.add_parser("sample", help="run a sampler and write its skeleton")
    _add_run_flags(sample)
    sample.set_defaults(handler=cmd_sample)

    paths = sub.add_parser("paths", help="expand skeleton samples on the dyadic grid")
    paths.add_argument("skeleton")
    paths.add_argument("--every", type=int, default=1, help="keep every k-th sample")
    paths.add_argument("--burnin", type=float)
    paths.add_argument("--dtau", type=float)
    paths.add_argument("--output")
    paths.set_defaults(handler=cmd_paths)

    diagnose = sub.add_parser("diagnose", help="ESS, QQ, KS and marginal reports")
    diagnose.add_argument("input", help="skeleton CSV (with sidecar) or samples CSV")
    diagnose.add_argument("--stat", action="append", choices=STATS)
    diagnose.add_argument("--coefficient", type=int, default=1, help="1-based coefficient for --stat qq")
    diagnose.add_argument("--against", choices=("exact-linear",), default="exact-linear")
    diagnose.add_argument("--t", type=float, help="marginal time (default T/2)")
    diagnose.add_argument("--burnin", type=float)
    diagnose.add_argument("--dtau", type=float)
    diagnose.add_argument("--output", help="report directory")
    diagnose.set_defaults(handler=cmd_diagnose)

    comp = sub.add_parser("compare", help="ESS per second of Zig-Zag variants against MALA")
    comp.add_argument("--alphas", type=float, nargs="*", default=[])
    comp.add_argument("--levels", type=int)
    comp.add_argument("--T", type=float)
    comp.add_argument("--u", type=float)
    comp.add_argument("--v", type=float)
    comp.add_argument("--clock", type=float)
    comp.add_argument("--burnin", type=float)
    comp.add_argument("--dtau", type=float)
    comp.add_argument("--mala-iterations", type=int)
    comp.add_argument("--seed", type=int)
    comp.add_argument("--workers", type=int)
    comp.add_argument("--output")
    comp.set_defaults(handler=cmd_compare)
    return parser


def _setup_logging() -> None:
    logging.basicConfig(
        level=LOG_LEVEL,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(show_path=False)],
    )


def main(argv: Optional[Sequence[str]] = None, console: Optional[Console] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    _setup_logging()
    console = console or Console()

    try:
        return args.handler(args, console)
    except (ValidationError, UsageError) as exc:
        console.print(f"[red]usage error:[/red] {exc}")
        return EXIT_USAGE
    except BoundViolationError as exc:
        console.print(
            f"[red]bound violation:[/red] coordinate {exc.coordinate + 1} at clock {exc.time:.6g}, "
            f"thinning ratio {exc.ratio:.6g}"
        )
        return EXIT_RUNTIME
    except RUNTIME_ERRORS as exc:
        console.print(f"[red]error:[/red] {exc}")
        return EXIT_RUNTIME


def run(argv: Optional[List[str]] = None) -> None:
    raise SystemExit(main(argv))
