"""Independent verification of composition results.

Re-validates feasibility (non-overlap, containment, budget) and recomputes
every aggregate metric from the consumer histories, flagging discrepancies
larger than :data:`~enshare.model.TOLERANCE`. Violations are returned as
data, never raised. To keep the oracle independent, nothing here calls into
the selection or composition modules; scoring comes straight from the
reliability model and the reward arithmetic is repeated inline.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import fsum
from typing import Any, Mapping

from .model import (
    TOLERANCE,
    CompositionResult,
    ConsumerHistory,
    EnergyService,
    ReliabilityBreakdown,
    Scenario,
    ScheduledRequest,
)
from .reliability import score_consumer
from .selection import SelectionConfig


@dataclass(frozen=True)
class Violation:
    kind: str
    detail: str

    def __str__(self) -> str:  # pragma: no cover - cosmetic
        return f"{self.kind}: {self.detail}"


def _rescore(
    consumer_id: str,
    histories: Mapping[str, ConsumerHistory],
    cfg: SelectionConfig,
) -> ReliabilityBreakdown | None:
    history = histories.get(consumer_id)
    if history is None:
        if cfg.default_reliability is None:
            return None
        history = ConsumerHistory(consumer_id)
    return score_consumer(history, cfg.disruption, cfg.weights, cfg.default_reliability)


def verify_composition(
    service: EnergyService,
    result: CompositionResult,
    histories: Mapping[str, ConsumerHistory],
    cfg: SelectionConfig,
) -> list[Violation]:
    """Return every violation found in ``result``; an empty list means ok."""

    violations: list[Violation] = []
    items = result.selected

    seen: set[str] = set()
    for item in items:
        rid = item.request.request_id
        if rid in seen:
            violations.append(Violation("duplicate", f"request {rid} scheduled twice"))
        seen.add(rid)

    for item in items:
        rid = item.request.request_id
        if not (service.window_start <= item.scheduled_start and item.scheduled_end <= service.window_end):
            violations.append(
                Violation(
                    "window",
                    f"request {rid} scheduled [{item.scheduled_start}, {item.scheduled_end}] "
                    f"outside provider window [{service.window_start}, {service.window_end}]",
                )
            )
        if not (
            item.request.window_start <= item.scheduled_start
            and item.scheduled_end <= item.request.window_end
        ):
            violations.append(
                Violation(
                    "window",
                    f"request {rid} scheduled [{item.scheduled_start}, {item.scheduled_end}] "
                    f"outside its own window [{item.request.window_start}, {item.request.window_end}]",
                )
            )

    by_start = sorted(items, key=lambda it: (it.scheduled_start, it.scheduled_end))
    for prev, cur in zip(by_start, by_start[1:]):
        if cur.scheduled_start < prev.scheduled_end:
            violations.append(
                Violation(
                    "overlap",
                    f"requests {prev.request.request_id} and {cur.request.request_id} overlap "
                    f"([{prev.scheduled_start}, {prev.scheduled_end}] vs "
                    f"[{cur.scheduled_start}, {cur.scheduled_end}])",
                )
            )

    used = fsum(item.request.requested_pct for item in items)
    if used > service.capacity_pct + TOLERANCE:
        violations.append(
            Violation(
                "budget",
                f"admitted energy {used!r} exceeds capacity {service.capacity_pct!r}",
            )
        )
    expected_remaining = max(0.0, service.capacity_pct - used)
    if abs(result.remaining_energy_pct - expected_remaining) > TOLERANCE:
        violations.append(
            Violation(
                "remaining mismatch",
                f"reported {result.remaining_energy_pct!r}, recomputed {expected_remaining!r}",
            )
        )

    reliability_terms: list[float] = []
    reward_terms: list[float] = []
    rescored: dict[str, ReliabilityBreakdown] = {}
    incomplete = False
    for item in items:
        consumer_id = item.request.consumer_id
        if consumer_id not in rescored:
            breakdown = _rescore(consumer_id, histories, cfg)
            if breakdown is None:
                violations.append(
                    Violation("missing history", f"no history for consumer {consumer_id!r}")
                )
                incomplete = True
                continue
            rescored[consumer_id] = breakdown
        breakdown = rescored[consumer_id]
        reliability_terms.append(breakdown.total)
        reward_terms.append(item.request.requested_pct / service.capacity_pct * breakdown.total)

    if not incomplete:
        expected_reliability = fsum(reliability_terms)
        if abs(result.total_reliability - expected_reliability) > TOLERANCE:
            violations.append(
                Violation(
                    "reliability mismatch",
                    f"reported {result.total_reliability!r}, recomputed {expected_reliability!r}",
                )
            )
        expected_reward = fsum(reward_terms)
        if abs(result.total_actual_reward - expected_reward) > TOLERANCE:
            violations.append(
                Violation(
                    "reward mismatch",
                    f"reported {result.total_actual_reward!r}, recomputed {expected_reward!r}",
                )
            )

    return violations


def materialize_document(
    scenario: Scenario,
    document: Mapping[str, Any],
    cfg: SelectionConfig,
) -> CompositionResult:
    """Rebuild a full :class:`CompositionResult` from a result document.

    The document carries request ids only, so request fields are looked up in
    the scenario. For adaptive results (strategy ``arb`` or documents flagged
    ``bf_adaptive``) the downsizing that produced the scheduled requests is
    re-derived here from the consumer's voluntary reliability rather than
    imported from the composer, so a drifting composer cannot hide from
    verification.
    """

    from dataclasses import replace  # local import keeps module surface lean

    by_id = {req.request_id: req for req in scenario.requests}
    histories = scenario.histories_by_consumer()
    adaptive = document["strategy"] == "arb" or document.get("bf_adaptive", False)

    items: list[ScheduledRequest] = []
    for entry in document["selected"]:
        rid = entry["request_id"]
        if rid not in by_id:
            raise ValueError(f"result references unknown request {rid!r}")
        request = by_id[rid]
        breakdown = _rescore(request.consumer_id, histories, cfg)
        if breakdown is None:
            raise ValueError(f"no history for consumer {request.consumer_id!r}")
        if adaptive:
            v = breakdown.voluntary
            duration = request.window_end - request.window_start
            request = replace(
                request,
                requested_pct=request.requested_pct * v,
                window_end=request.window_start + max(1, int(duration * v)),
            )
        reward = request.requested_pct / scenario.service.capacity_pct
        request = replace(
            request,
            reliability=breakdown,
            reward=reward,
            actual_reward=reward * breakdown.total,
        )
        items.append(
            ScheduledRequest(request, entry["scheduled_start"], entry["scheduled_end"])
        )

    return CompositionResult(
        selected=tuple(items),
        total_reliability=document["total_reliability"],
        total_actual_reward=document["total_actual_reward"],
        remaining_energy_pct=document["remaining_energy_pct"],
        elapsed=document["elapsed_micros"] / 1e6,
        strategy=document["strategy"],
    )
