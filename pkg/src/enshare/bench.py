"""Benchmark harness comparing the composition strategies.

For every (duration bin, run) pair one scenario is generated whose service
duration equals the bin, and every configured strategy composes that same
instance, so cross-strategy comparisons are paired. Consumers are scored once
per scenario as shared preprocessing; per-strategy elapsed time covers only
the composition call. Every result is re-validated by the independent
checker; a violation aborts the bench with a diagnostic.

Per-run RNG streams are derived from ``(seed, bin, run)``, so results do not
depend on execution order and identical seeds give identical rows.
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass, replace
from math import fsum
from pathlib import Path
from typing import Sequence

from .checker import verify_composition
from .composition import (
    Strategy,
    TooManyCandidates,
    compose_arb,
    compose_bruteforce,
    compose_greedy,
    compose_rb,
)
from .model import DEFAULT_TRANSFER_RANGE_M, CompositionResult, InvalidConfig, Scenario
from .selection import SelectionConfig, score_histories, select_requests
from .workload import GeneratorConfig, derive_seed, generate_scenario

ALL_STRATEGIES = (Strategy.RB, Strategy.ARB, Strategy.GREEDY, Strategy.BRUTE_FORCE)

# Desk-scale workload: every generated consumer sits within transfer range
# and the request rate keeps candidate counts below the brute-force limit,
# so no run is ever skipped and cross-strategy averages stay comparable.
DESK_GENERATOR = GeneratorConfig(
    requests_per_microcell_day=240,
    microcell_radius_m=DEFAULT_TRANSFER_RANGE_M,
)

CSV_COLUMNS = (
    "strategy",
    "duration_bin_min",
    "avg_reliability",
    "avg_actual_reward",
    "avg_remaining_energy_pct",
    "avg_elapsed_micros",
    "run_count",
)


@dataclass(frozen=True)
class BenchConfig:
    seed: int = 1
    duration_bins_min: tuple[int, ...] = (30, 60, 90, 120)
    runs_per_bin: int = 500
    strategies: tuple[Strategy, ...] = ALL_STRATEGIES
    bf_limit: int = 20
    generator: GeneratorConfig = DESK_GENERATOR
    selection: SelectionConfig = SelectionConfig()

    def __post_init__(self) -> None:
        object.__setattr__(self, "duration_bins_min", tuple(self.duration_bins_min))
        object.__setattr__(self, "strategies", tuple(Strategy(s) for s in self.strategies))
        if self.runs_per_bin < 1:
            raise InvalidConfig(f"runs_per_bin must be >= 1, got {self.runs_per_bin}")
        if not self.duration_bins_min:
            raise InvalidConfig("duration_bins_min must not be empty")
        if not self.strategies:
            raise InvalidConfig("strategies must not be empty")


@dataclass(frozen=True)
class BenchRow:
    strategy: str
    duration_bin_min: int
    avg_reliability: float
    avg_actual_reward: float
    avg_remaining_energy_pct: float
    avg_elapsed_micros: float
    run_count: int


class BenchCheckError(RuntimeError):
    """A composer output failed independent verification during a bench."""


def _scenario_for(cfg: BenchConfig, bin_min: int, run: int) -> Scenario:
    gen = replace(
        cfg.generator,
        seed=derive_seed(cfg.seed, bin_min, run),
        service_duration_min=(bin_min, bin_min),
    )
    return generate_scenario(gen, cfg.selection.disruption, cfg.selection.weights)


def _compose_one(
    strategy: Strategy,
    scenario: Scenario,
    annotated,
    scores,
    cfg: BenchConfig,
) -> CompositionResult | None:
    if strategy is Strategy.RB:
        return compose_rb(scenario.service, annotated)
    if strategy is Strategy.GREEDY:
        return compose_greedy(scenario.service, annotated)
    if strategy is Strategy.ARB:
        return compose_arb(
            scenario.service, scenario.requests, scenario.histories_by_consumer(), cfg.selection, scores
        )
    try:
        return compose_bruteforce(scenario.service, annotated, cfg.bf_limit)
    except TooManyCandidates:
        return None


def run_bench(cfg: BenchConfig, check: bool = True) -> list[BenchRow]:
    """Run the full grid and return one row per (strategy, bin)."""

    rows: list[BenchRow] = []
    for bin_min in cfg.duration_bins_min:
        totals = {
            s: {"reliability": [], "reward": [], "remaining": [], "elapsed": []}
            for s in cfg.strategies
        }
        for run in range(cfg.runs_per_bin):
            scenario = _scenario_for(cfg, bin_min, run)
            histories = scenario.histories_by_consumer()
            scores = score_histories(scenario.histories, cfg.selection)
            annotated = select_requests(
                scenario.service, scenario.requests, histories, cfg.selection, scores
            )
            for strategy in cfg.strategies:
                result = _compose_one(strategy, scenario, annotated, scores, cfg)
                if result is None:  # brute force skipped this run
                    continue
                if check:
                    violations = verify_composition(
                        scenario.service, result, histories, cfg.selection
                    )
                    if violations:
                        details = "; ".join(str(v) for v in violations)
                        raise BenchCheckError(
                            f"strategy {strategy.value}, bin {bin_min}, run {run}: {details}"
                        )
                bucket = totals[strategy]
                bucket["reliability"].append(result.total_reliability)
                bucket["reward"].append(result.total_actual_reward)
                bucket["remaining"].append(result.remaining_energy_pct)
                bucket["elapsed"].append(result.elapsed * 1e6)
        for strategy in cfg.strategies:
            bucket = totals[strategy]
            count = len(bucket["reliability"])
            if count == 0:
                continue
            rows.append(
                BenchRow(
                    strategy=strategy.value,
                    duration_bin_min=bin_min,
                    avg_reliability=fsum(bucket["reliability"]) / count,
                    avg_actual_reward=fsum(bucket["reward"]) / count,
                    avg_remaining_energy_pct=fsum(bucket["remaining"]) / count,
                    avg_elapsed_micros=fsum(bucket["elapsed"]) / count,
                    run_count=count,
                )
            )
    return sorted(rows, key=lambda r: (r.strategy, r.duration_bin_min))


def _format_number(value: float) -> str:
    return f"{value:.6g}"


def render_report(rows: Sequence[BenchRow], fmt: str = "csv", timing: bool = True) -> str:
    """Render rows canonically sorted; ``timing=False`` zeroes the elapsed
    column so repeated runs with the same seed are byte-identical."""

    if not rows:
        raise ValueError("cannot render an empty report")
    ordered = sorted(rows, key=lambda r: (r.strategy, r.duration_bin_min))
    records = []
    for row in ordered:
        records.append(
            {
                "strategy": row.strategy,
                "duration_bin_min": row.duration_bin_min,
                "avg_reliability": row.avg_reliability,
                "avg_actual_reward": row.avg_actual_reward,
                "avg_remaining_energy_pct": row.avg_remaining_energy_pct,
                "avg_elapsed_micros": row.avg_elapsed_micros if timing else 0.0,
                "run_count": row.run_count,
            }
        )
    if fmt == "json":
        return json.dumps(
            [
                {
                    key: (_format_number(value) if isinstance(value, float) else value)
                    for key, value in record.items()
                }
                for record in records
            ],
            indent=2,
        ) + "\n"
    if fmt != "csv":
        raise ValueError(f"unknown report format {fmt!r}")
    out = io.StringIO()
    out.write(",".join(CSV_COLUMNS) + "\n")
    for record in records:
        out.write(
            ",".join(
                _format_number(record[col]) if isinstance(record[col], float) else str(record[col])
                for col in CSV_COLUMNS
            )
            + "\n"
        )
    return out.getvalue()


def emit_report(
    rows: Sequence[BenchRow], fmt: str, path: str | Path, timing: bool = True
) -> None:
    Path(path).write_text(render_report(rows, fmt, timing), encoding="utf-8")
