"""Command-line interface.

Subcommands:

* ``gen``     write a synthetic (or CSV-ingested) scenario file
* ``score``   print one CSV row of reliability scores per consumer
* ``compose`` run one strategy on a scenario and print the result as JSON
* ``verify``  re-validate a composition result against its scenario
* ``bench``   run the strategy comparison grid and write a report
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .bench import BenchCheckError, BenchConfig, emit_report, run_bench
from .checker import materialize_document, verify_composition
from .composition import (
    Strategy,
    compose_arb,
    compose_bruteforce,
    compose_greedy,
    compose_rb,
    downsize_requests,
    DEFAULT_BF_LIMIT,
)
from .model import DisruptionConfig, Scenario, dump_scenario, load_scenario
from .selection import SelectionConfig, select_requests
from .workload import GeneratorConfig, generate_scenario, ingest_transactions


def _parse_weights(text: str) -> tuple[float, float, float, float]:
    parts = [p for p in text.split(",") if p.strip()]
    if len(parts) != 4:
        raise argparse.ArgumentTypeError(f"expected 4 comma-separated weights, got {text!r}")
    return tuple(float(p) for p in parts)  # type: ignore[return-value]


def _parse_int_list(text: str) -> tuple[int, ...]:
    return tuple(int(p) for p in text.split(",") if p.strip())


def _parse_strategies(text: str) -> tuple[Strategy, ...]:
    return tuple(Strategy(p.strip()) for p in text.split(",") if p.strip())


def _add_scoring_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--weights", type=_parse_weights, default=None,
                        help="four comma-separated component weights")
    parser.add_argument("--delta", type=int, default=None, help="noise threshold, seconds")
    parser.add_argument("--epsilon", type=int, default=None, help="abandonment threshold, seconds")
    parser.add_argument("--alpha", type=int, default=None, help="trailing-gap threshold, seconds")
    parser.add_argument("--default-reliability", type=float, default=None,
                        help="score assigned to consumers with an empty or missing history")
    parser.add_argument("--max-distance", type=float, default=None,
                        help="transfer range in meters (default 4.572)")


def _selection_config(scenario: Scenario, args: argparse.Namespace) -> SelectionConfig:
    base = scenario.disruption_config
    disruption = DisruptionConfig(
        args.delta if args.delta is not None else base.delta_sec,
        args.epsilon if args.epsilon is not None else base.epsilon_sec,
        args.alpha if args.alpha is not None else base.alpha_sec,
    )
    kwargs = {
        "disruption": disruption,
        "weights": args.weights if args.weights is not None else scenario.weights,
        "default_reliability": args.default_reliability,
    }
    if args.max_distance is not None:
        kwargs["max_distance_m"] = args.max_distance
    return SelectionConfig(**kwargs)


def _cmd_gen(args: argparse.Namespace) -> int:
    if args.config:
        raw = json.loads(Path(args.config).read_text(encoding="utf-8"))
    else:
        raw = {}
    cfg = GeneratorConfig.from_dict({**raw, "seed": args.seed})
    disruption = (
        DisruptionConfig.from_dict(raw["disruption_config"])
        if "disruption_config" in raw
        else DisruptionConfig()
    )
    weights = tuple(raw["weights"]) if "weights" in raw else (0.25, 0.25, 0.25, 0.25)
    if args.ingest:
        scenario = ingest_transactions(args.ingest, cfg, disruption, weights)
    else:
        scenario = generate_scenario(cfg, disruption, weights)
    dump_scenario(scenario, args.out)
    print(f"wrote {args.out} ({len(scenario.requests)} requests)")
    return 0


def _cmd_score(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.scenario)
    cfg = _selection_config(scenario, args)
    from .selection import score_histories

    scores = score_histories(scenario.histories, cfg)
    print("consumer_id,rel_history,rel_voluntary,rel_involuntary,rel_random,total")
    for history in scenario.histories:
        b = scores[history.consumer_id]
        print(
            f"{history.consumer_id},{b.history:.6g},{b.voluntary:.6g},"
            f"{b.involuntary:.6g},{b.random_behavior:.6g},{b.total:.6g}"
        )
    return 0


def _cmd_compose(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.scenario)
    cfg = _selection_config(scenario, args)
    histories = scenario.histories_by_consumer()
    strategy = Strategy(args.strategy)
    if strategy is Strategy.ARB:
        result = compose_arb(scenario.service, scenario.requests, histories, cfg)
    else:
        if args.bf_adaptive and strategy is Strategy.BRUTE_FORCE:
            candidates = downsize_requests(scenario.service, scenario.requests, histories, cfg)
        else:
            candidates = select_requests(scenario.service, scenario.requests, histories, cfg)
        if strategy is Strategy.RB:
            result = compose_rb(scenario.service, candidates)
        elif strategy is Strategy.GREEDY:
            result = compose_greedy(scenario.service, candidates)
        else:
            result = compose_bruteforce(scenario.service, candidates, args.bf_limit)
    document = result.to_document()
    if args.bf_adaptive and strategy is Strategy.BRUTE_FORCE:
        document["bf_adaptive"] = True
    text = json.dumps(document, indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    print(text)
    return 0


def _cmd_verify(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.scenario)
    cfg = _selection_config(scenario, args)
    document = json.loads(Path(args.result).read_text(encoding="utf-8"))
    result = materialize_document(scenario, document, cfg)
    violations = verify_composition(
        scenario.service, result, scenario.histories_by_consumer(), cfg
    )
    if violations:
        for violation in violations:
            print(violation, file=sys.stderr)
        return 1
    print("ok")
    return 0


def _cmd_bench(args: argparse.Namespace) -> int:
    base = BenchConfig()
    generator = base.generator
    if args.requests_per_day is not None:
        from dataclasses import replace

        generator = replace(generator, requests_per_microcell_day=args.requests_per_day)
    selection_kwargs = {}
    if args.weights is not None:
        selection_kwargs["weights"] = args.weights
    if args.default_reliability is not None:
        selection_kwargs["default_reliability"] = args.default_reliability
    cfg = BenchConfig(
        seed=args.seed,
        duration_bins_min=args.bins,
        runs_per_bin=args.runs,
        strategies=args.strategies,
        bf_limit=args.bf_limit,
        generator=generator,
        selection=SelectionConfig(**selection_kwargs),
    )
    try:
        rows = run_bench(cfg)
    except BenchCheckError as exc:
        print(f"invariant check failed: {exc}", file=sys.stderr)
        return 1
    emit_report(rows, args.format, args.out, timing=not args.no_timing)
    print(f"wrote {args.out} ({len(rows)} rows)")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="enshare",
        description="Reliability-scored composition of energy-sharing requests.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a scenario file")
    gen.add_argument("--seed", type=int, required=True)
    gen.add_argument("--out", required=True)
    gen.add_argument("--config", default=None, help="generator config JSON")
    gen.add_argument("--ingest", default=None, help="transaction CSV to ingest")
    gen.set_defaults(func=_cmd_gen)

    score = sub.add_parser("score", help="score every consumer in a scenario")
    score.add_argument("--scenario", required=True)
    _add_scoring_flags(score)
    score.set_defaults(func=_cmd_score)

    compose = sub.add_parser("compose", help="compose a scenario with one strategy")
    compose.add_argument("--scenario", required=True)
    compose.add_argument("--strategy", required=True, choices=[s.value for s in Strategy])
    compose.add_argument("--bf-limit", type=int, default=DEFAULT_BF_LIMIT)
    compose.add_argument("--bf-adaptive", action="store_true",
                         help="run brute force over adaptively downsized requests")
    compose.add_argument("--out", default=None, help="also write the result JSON here")
    _add_scoring_flags(compose)
    compose.set_defaults(func=_cmd_compose)

    verify = sub.add_parser("verify", help="verify a composition result file")
    verify.add_argument("--scenario", required=True)
    verify.add_argument("--result", required=True)
    _add_scoring_flags(verify)
    verify.set_defaults(func=_cmd_verify)

    bench = sub.add_parser("bench", help="run the strategy comparison grid")
    bench.add_argument("--seed", type=int, default=1)
    bench.add_argument("--runs", type=int, default=500)
    bench.add_argument("--bins", type=_parse_int_list, default=(30, 60, 90, 120))
    bench.add_argument(
        "--strategies", type=_parse_strategies, default=tuple(Strategy),
        help="comma-separated subset of rb,arb,greedy,bf",
    )
    bench.add_argument("--bf-limit", type=int, default=20)
    bench.add_argument("--requests-per-day", type=int, default=None)
    bench.add_argument("--out", required=True)
    bench.add_argument("--format", choices=("csv", "json"), default="csv")
    bench.add_argument("--no-timing", action="store_true",
                       help="zero the elapsed column for byte-reproducible output")
    bench.add_argument("--weights", type=_parse_weights, default=None)
    bench.add_argument("--default-reliability", type=float, default=None)
    bench.set_defaults(func=_cmd_bench)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, LookupError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
