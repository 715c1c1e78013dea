"""
Command Line Interface

``trail-recover`` with one subcommand per stage plus ``pipeline`` for the
whole experiment. Each subcommand reads and writes the same artifacts the
pipeline does.
"""

from __future__ import annotations
import argparse
import os
import sys
import time
from typing import List, Optional

from pubsub import pub

from . import __version__
from .analysis import RankReport, compare_rankings, rank_locations
from .config import PipelineConfig
from .degrade import DegradeSpec, DegradeStrategy, degrade_trails
from .errors import (
    EXIT_BUDGET_EXCEEDED,
    EXIT_INTERNAL,
    EXIT_INVALID_INPUT,
    EXIT_OK,
    EmptyInputError,
    TrailRecoverError,
)
from .formats import (
    load_answers,
    load_network,
    load_results,
    read_json,
    read_trails_csv,
    save_answers,
    save_network,
    save_results,
    write_json,
    write_trails_csv,
)
from .metrics import evaluate, format_report
from .pipeline import (
    count_budget_failures,
    format_summary,
    recovered_runs,
    run_pipeline,
)
from .preprocess import GapPolicy, preprocess_trails
from .solvers import (
    DEFAULT_EXACT_BUDGET,
    STRATEGIES,
    AcsParams,
    build_solver,
    recover_trails,
)
from .synth import GeneratorSpec, generate
from .trail_model import TimeUnit
from .transition import DEFAULT_FLOOR_PROB, SmoothingMode, SmoothingPolicy, extract

DEBUG_ENV = "TRAIL_RECOVER_DEBUG"


def debug_event_logger(topic=pub.AUTO_TOPIC, **kwargs):
    """Log all events published on the event bus."""
    timestamp = time.strftime("%H:%M:%S")
    data_str = ", ".join(f"{k}={v}" for k, v in kwargs.items() if k != "topic")
    print(f"[{timestamp}] EVENT: {topic.getName()} | {data_str}", file=sys.stderr)


def _read_trails(args) -> list:
    trails = read_trails_csv(args.input, TimeUnit(args.time_unit))
    if not trails:
        raise EmptyInputError(f"{args.input} holds no trails")
    return trails


def cmd_synth(args) -> int:
    spec = GeneratorSpec(
        n_locations=args.locations,
        n_trails=args.trails,
        min_length=args.min_length,
        max_length=args.max_length,
        concentration=args.concentration,
        begin_concentration=args.begin_concentration,
        gap_rate=args.gap_rate,
        gap_magnitude=args.gap_magnitude,
        seed=args.seed,
    )
    dataset = generate(spec)
    write_trails_csv(args.output, dataset.trails)
    if args.hidden:
        write_json(args.hidden, dataset.hidden_dict())
    print(f"Generated {len(dataset.trails)} trails over {spec.n_locations} locations")
    return EXIT_OK


def cmd_degrade(args) -> int:
    spec = DegradeSpec(
        strategy=DegradeStrategy(args.strategy),
        resolution=args.resolution,
        v=args.size,
        mutation_fraction=args.fraction,
        seed=args.seed,
    )
    degraded, answers = degrade_trails(_read_trails(args), spec)
    write_trails_csv(args.output, degraded)
    if args.answers:
        save_answers(args.answers, answers)
    print(f"Degraded {len(degraded)} trails, {len(answers)} broken runs")
    return EXIT_OK


def cmd_preprocess(args) -> int:
    unit = TimeUnit(args.time_unit)
    policy = (
        GapPolicy(args.gap_threshold)
        if args.gap_threshold is not None
        else GapPolicy.default_for(unit)
    )
    out = preprocess_trails(
        _read_trails(args),
        policy,
        sentinels=not args.no_sentinels,
        partition=not args.no_partition,
    )
    write_trails_csv(args.output, out)
    print(f"Wrote {len(out)} partitions to {args.output}")
    return EXIT_OK


def cmd_extract(args) -> int:
    smoothing = SmoothingPolicy(SmoothingMode(args.smoothing), args.floor_prob)
    net = extract(_read_trails(args), smoothing, {"source": args.input})
    save_network(args.output, net)
    print(repr(net))
    return EXIT_OK


def cmd_recover(args) -> int:
    net = load_network(args.net)
    if args.smoothing is not None:
        smoothing = SmoothingPolicy(SmoothingMode(args.smoothing), args.floor_prob)
        net = net.with_smoothing(smoothing)
    acs = AcsParams(iterations=args.acs_iterations, ants=args.acs_ants, seed=args.seed)
    solver = build_solver(args.strategy, acs, args.exact_budget, args.exact_fallback)
    repaired, results = recover_trails(_read_trails(args), net, solver, args.seed)
    write_trails_csv(args.output, repaired)
    if args.results:
        save_results(args.results, solver.name, results, recovered_runs(repaired))
    failed = [r for r in results if not r.ok]
    print(f"Recovered {len(results) - len(failed)} of {len(results)} broken runs")
    for r in failed:
        print(f"  {r.trail_id}/{r.run_index}: {r.error}", file=sys.stderr)
    if count_budget_failures(failed):
        return EXIT_BUDGET_EXCEEDED
    return EXIT_OK


def cmd_evaluate(args) -> int:
    answers = load_answers(args.answers)
    _, recovered = load_results(args.results)
    report = evaluate(answers, recovered)
    if args.output:
        write_json(args.output, report.to_dict())
    print(format_report(report))
    return EXIT_OK


def cmd_rank(args) -> int:
    report = rank_locations(_read_trails(args), skip_runs=args.skip_runs)
    if args.compare:
        report = compare_rankings(report, RankReport.from_dict(read_json(args.compare)))
    write_json(args.output, report.to_dict())
    for i, node in enumerate(report.top(args.top), start=1):
        print(f"{i:>4}  {node:<16} {report.scores[node]:.4f}")
    if report.spearman_vs is not None:
        print(f"spearman: {report.spearman_vs:.4f}")
    return EXIT_OK


def cmd_pipeline(args) -> int:
    config = PipelineConfig.load(args.config) if args.config else PipelineConfig()
    if args.seed is not None:
        config.master_seed = args.seed
    if args.input:
        config.input = args.input
    summary = run_pipeline(config, args.out)
    print(format_summary(summary))
    return EXIT_OK


def _add_input(p: argparse.ArgumentParser):
    p.add_argument("input", metavar="IN.csv", help="Trail CSV file")
    p.add_argument(
        "--time-unit",
        choices=[u.value for u in TimeUnit],
        default=TimeUnit.TICKS.value,
        help="Unit of one timestamp tick (default: ticks)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="trail-recover",
        description="Recover the visiting order of locations in low-resolution trails.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument(
        "-v", "--verbose", action="store_true", help="Log every event to stderr"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="Generate synthetic ground-truth trails")
    p.add_argument("--locations", type=int, default=50)
    p.add_argument("--trails", type=int, default=500)
    p.add_argument("--min-length", type=int, default=10)
    p.add_argument("--max-length", type=int, default=40)
    p.add_argument("--concentration", type=float, default=3.0)
    p.add_argument("--begin-concentration", type=float, default=1.0)
    p.add_argument("--gap-rate", type=float, default=0.0)
    p.add_argument("--gap-magnitude", type=int, default=60)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", required=True, metavar="trails.csv")
    p.add_argument("--hidden", metavar="hidden.json", help="Write the hidden model")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("degrade", help="Create broken points with known answers")
    _add_input(p)
    p.add_argument(
        "--strategy",
        choices=[s.value for s in DegradeStrategy],
        default=DegradeStrategy.MUTATION.value,
    )
    p.add_argument("--resolution", type=int, default=2)
    p.add_argument("--size", type=int, default=2, help="Broken-point size v")
    p.add_argument("--fraction", type=float, default=0.2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", required=True, metavar="OUT.csv")
    p.add_argument("--answers", metavar="answers.json")
    p.set_defaults(func=cmd_degrade)

    p = sub.add_parser("preprocess", help="Partition at gaps and add BEGIN/END")
    _add_input(p)
    p.add_argument("output", metavar="OUT.csv")
    p.add_argument("--gap-threshold", type=int, default=None, help="Ticks (default: 28 days)")
    p.add_argument("--no-sentinels", action="store_true")
    p.add_argument("--no-partition", action="store_true")
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("extract", help="Estimate the transition network")
    _add_input(p)
    p.add_argument("-o", "--output", required=True, metavar="net.json")
    p.add_argument("--smoothing", choices=[m.value for m in SmoothingMode], default="none")
    p.add_argument("--floor-prob", type=float, default=DEFAULT_FLOOR_PROB)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("recover", help="Recover the order inside broken points")
    _add_input(p)
    p.add_argument("--net", required=True, metavar="net.json")
    p.add_argument("--strategy", choices=STRATEGIES, default="acs")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--exact-budget", type=int, default=DEFAULT_EXACT_BUDGET)
    p.add_argument("--exact-fallback", action="store_true", help="Use ACS when over budget")
    p.add_argument("--acs-iterations", type=int, default=300)
    p.add_argument("--acs-ants", type=int, default=10)
    p.add_argument(
        "--smoothing",
        choices=[m.value for m in SmoothingMode],
        default=None,
        help="Override the network's smoothing",
    )
    p.add_argument("--floor-prob", type=float, default=DEFAULT_FLOOR_PROB)
    p.add_argument("-o", "--output", required=True, metavar="OUT.csv")
    p.add_argument("--results", metavar="results.json")
    p.set_defaults(func=cmd_recover)

    p = sub.add_parser("evaluate", help="Score recoveries against answer keys")
    p.add_argument("--answers", required=True, metavar="answers.json")
    p.add_argument("--results", required=True, metavar="results.json")
    p.add_argument("-o", "--output", metavar="report.json")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("rank", help="Rank locations by inverted betweenness")
    _add_input(p)
    p.add_argument("-o", "--output", required=True, metavar="rank.json")
    p.add_argument("--compare", metavar="other_rank.json")
    p.add_argument(
        "--skip-runs", action="store_true", help="Ignore pairs touching broken points"
    )
    p.add_argument("--top", type=int, default=10)
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("pipeline", help="Run the whole experiment")
    p.add_argument("--config", metavar="FILE", help="PipelineConfig JSON")
    p.add_argument("--seed", type=int, default=None, help="Override the master seed")
    p.add_argument("--input", metavar="IN.csv", help="Use real trails instead of synth")
    p.add_argument("--out", required=True, metavar="DIR")
    p.set_defaults(func=cmd_pipeline)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point."""
    args = build_parser().parse_args(argv)
    if args.verbose or os.getenv(DEBUG_ENV):
        pub.subscribe(debug_event_logger, pub.ALL_TOPICS)
    try:
        return args.func(args)
    except TrailRecoverError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID_INPUT
    except Exception as e:
        print(f"internal error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_INTERNAL
    finally:
        if pub.isSubscribed(debug_event_logger, pub.ALL_TOPICS):
            pub.unsubscribe(debug_event_logger, pub.ALL_TOPICS)


if __name__ == "__main__":
    sys.exit(main())
