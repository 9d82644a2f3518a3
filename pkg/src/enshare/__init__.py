"""Reliability-scored selection and composition of energy-sharing requests."""

from .model import (
    CompositionResult,
    ConsumerHistory,
    DisruptionConfig,
    EnergyRequest,
    EnergyService,
    ReliabilityBreakdown,
    Scenario,
    ScheduledRequest,
    SessionRecord,
    dump_scenario,
    load_scenario,
    validate_request,
)
from .reliability import (
    DisruptionClass,
    actual_reward,
    classify_disruptions,
    rel_f,
    rel_history,
    rel_involuntary,
    rel_random,
    rel_voluntary,
    score_consumer,
)
from .selection import SelectionConfig, euclidean_distance, score_histories, select_requests
from .composition import (
    Strategy,
    compose_arb,
    compose_bruteforce,
    compose_greedy,
    compose_rb,
    downsize_requests,
)
from .checker import Violation, verify_composition
from .workload import GeneratorConfig, generate_scenario, generate_scenarios, ingest_transactions
from .bench import BenchConfig, BenchRow, emit_report, render_report, run_bench

__version__ = "0.1.0"

__all__ = [
    "BenchConfig",
    "BenchRow",
    "CompositionResult",
    "ConsumerHistory",
    "DisruptionClass",
    "DisruptionConfig",
    "EnergyRequest",
    "EnergyService",
    "GeneratorConfig",
    "ReliabilityBreakdown",
    "Scenario",
    "ScheduledRequest",
    "SelectionConfig",
    "SessionRecord",
    "Strategy",
    "Violation",
    "actual_reward",
    "classify_disruptions",
    "compose_arb",
    "compose_bruteforce",
    "compose_greedy",
    "compose_rb",
    "downsize_requests",
    "dump_scenario",
    "emit_report",
    "euclidean_distance",
    "generate_scenario",
    "generate_scenarios",
    "ingest_transactions",
    "load_scenario",
    "render_report",
    "rel_f",
    "rel_history",
    "rel_involuntary",
    "rel_random",
    "rel_voluntary",
    "run_bench",
    "score_consumer",
    "score_histories",
    "select_requests",
    "validate_request",
    "verify_composition",
]
