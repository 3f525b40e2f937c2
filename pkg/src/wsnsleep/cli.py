"""Command line entry point: ``simulate run | compare | plan``.

Exit status is 0 on success, 1 on a validation error and 2 on an I/O error.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .config import SimulationConfig, load_config
from .coverage_planner import DEFAULT_DUTY_FRACTION, plan_coverage
from .errors import ConfigurationError, DomainError
from .metrics import SimulationResult
from .protocol_engine import Protocol, run_simulation

log = logging.getLogger("wsnsleep")

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2

SUMMARY_FIELDS = ("fnd", "hna", "mean_coverage", "final_dissipation_j", "initial_coverage")


def write_result(result: SimulationResult, out_path: str | Path) -> None:
    path = Path(out_path)
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(result.to_csv())


def run_command(config: SimulationConfig, protocol: str, seed: int, out_path: str | Path) -> int:
    result = run_simulation(config.with_protocol(protocol), seed=seed)
    write_result(result, out_path)
    log.info("%s seed=%d: %d rounds, fnd=%s hna=%s", protocol, seed, len(result.records), result.fnd_round, result.hna_round)
    return EXIT_OK


def _run_cell(args: tuple[SimulationConfig, str, int]) -> SimulationResult:
    config, protocol, seed = args
    return run_simulation(config.with_protocol(protocol), seed=seed)


def compare_runs(
    config: SimulationConfig, seeds: list[int], jobs: int = 1
) -> list[tuple[int, SimulationResult, SimulationResult]]:
    """Run LEACH and the proposed protocol on each seed; placement is shared per seed."""
    if not seeds:
        raise ConfigurationError("compare needs at least one seed")
    cells = [(config, p.value, s) for s in seeds for p in (Protocol.LEACH, Protocol.PROPOSED)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_cell, cells))
    else:
        results = [_run_cell(c) for c in cells]
    return [(s, results[2 * i], results[2 * i + 1]) for i, s in enumerate(seeds)]


def _lifetime(value: int | None, censor: int) -> int:
    # never reached within the round limit: count as the limit itself
    return censor if value is None else value


def _pct(new: float, old: float) -> float:
    return 100.0 * (new / old - 1.0) if old > 0 else float("nan")


def summarize(pairs: list[tuple[int, SimulationResult, SimulationResult]], rounds: int) -> dict[str, float]:
    def mean_of(attr: str, which: int) -> float:
        return float(np.mean([_lifetime(getattr(p[which], attr), rounds) for p in pairs]))

    return {
        "mean_fnd_leach": mean_of("fnd_round", 1),
        "mean_fnd_proposed": mean_of("fnd_round", 2),
        "mean_hna_leach": mean_of("hna_round", 1),
        "mean_hna_proposed": mean_of("hna_round", 2),
        "mean_fnd_improvement_pct": _pct(mean_of("fnd_round", 2), mean_of("fnd_round", 1)),
        "mean_hna_improvement_pct": _pct(mean_of("hna_round", 2), mean_of("hna_round", 1)),
        "mean_duty_fraction_proposed": float(np.mean([p[2].measured_duty_fraction for p in pairs])),
        "censored_runs": sum((p[1].hna_round is None) + (p[2].hna_round is None) for p in pairs),
    }


def summary_csv(pairs: list[tuple[int, SimulationResult, SimulationResult]], rounds: int) -> str:
    header = ["seed"]
    for proto in ("leach", "proposed"):
        header += [f"{proto}_{f}" for f in SUMMARY_FIELDS]
    header += ["fnd_improvement_pct", "hna_improvement_pct"]
    lines = [",".join(header)]

    def cells(r: SimulationResult) -> list[str]:
        return [
            "none" if r.fnd_round is None else str(r.fnd_round),
            "none" if r.hna_round is None else str(r.hna_round),
            f"{r.mean_coverage(1, max(rounds, 1)):.9g}",
            f"{r.final_dissipation:.9g}",
            f"{r.initial_coverage:.9g}",
        ]

    for seed, leach, prop in pairs:
        fnd = _pct(_lifetime(prop.fnd_round, rounds), _lifetime(leach.fnd_round, rounds))
        hna = _pct(_lifetime(prop.hna_round, rounds), _lifetime(leach.hna_round, rounds))
        lines.append(",".join([str(seed), *cells(leach), *cells(prop), f"{fnd:.9g}", f"{hna:.9g}"]))
    stats = summarize(pairs, rounds)
    lines += [f"# {k}={v:.9g}" if isinstance(v, float) else f"# {k}={v}" for k, v in stats.items()]
    return "\n".join(lines) + "\n"


def compare_command(config: SimulationConfig, seeds: list[int], out_dir: str | Path, jobs: int = 1) -> int:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    pairs = compare_runs(config, seeds, jobs)
    for seed, leach, prop in pairs:
        write_result(leach, out / f"leach_seed{seed}.csv")
        write_result(prop, out / f"proposed_seed{seed}.csv")
    (out / "summary.csv").write_text(summary_csv(pairs, config.rounds), encoding="utf-8")
    stats = summarize(pairs, config.rounds)
    print(
        f"FND improvement {stats['mean_fnd_improvement_pct']:+.1f}%  "
        f"HNA improvement {stats['mean_hna_improvement_pct']:+.1f}%  over {len(pairs)} seed(s)"
    )
    return EXIT_OK


def plan_command(target: float, range_: float, duty: float, n_nodes: int, area: float) -> int:
    plan = plan_coverage(n_nodes, area, target, range_, duty)
    print(plan.describe())
    return EXIT_OK


def _seed_list(text: str) -> list[int]:
    try:
        seeds = [int(s) for s in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"seeds must be integers, got {text!r}") from None
    if not seeds:
        raise argparse.ArgumentTypeError("at least one seed is required")
    return seeds


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="simulate", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="simulate one protocol on one seed")
    run.add_argument("--config", default=None, help="key = value config file (defaults if omitted)")
    run.add_argument("--protocol", choices=[p.value for p in Protocol], required=True)
    run.add_argument("--seed", type=int, required=True)
    run.add_argument("--out", required=True)

    cmp_ = sub.add_parser("compare", help="paired LEACH vs proposed runs over several seeds")
    cmp_.add_argument("--config", default=None)
    cmp_.add_argument("--seeds", type=_seed_list, default=None, help="comma separated; defaults to the config's seeds")
    cmp_.add_argument("--out-dir", required=True)
    cmp_.add_argument("--jobs", type=int, default=1)

    plan = sub.add_parser("plan", help="node density needed for a coverage target")
    plan.add_argument("--target", type=float, required=True)
    plan.add_argument("--range", type=float, default=10.0, dest="range_")
    plan.add_argument("--duty", type=float, default=DEFAULT_DUTY_FRACTION)
    plan.add_argument("--nodes", type=int, default=150)
    plan.add_argument("--width", type=float, default=100.0)
    plan.add_argument("--height", type=float, default=100.0)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.command == "plan":
            if not (math.isfinite(args.width) and math.isfinite(args.height)) or args.width <= 0 or args.height <= 0:
                raise DomainError("field width and height must be positive")
            return plan_command(args.target, args.range_, args.duty, args.nodes, args.width * args.height)
        config = load_config(args.config)
        if args.command == "run":
            return run_command(config, args.protocol, args.seed, args.out)
        seeds = args.seeds if args.seeds is not None else list(config.seeds)
        return compare_command(config, seeds, args.out_dir, args.jobs)
    except (ConfigurationError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
