"""Spatio-temporal selection and annotation of candidate requests.

A request is composable with a service when its stay window is contained in
the provider's window, its position is within wireless transfer range, and
its amount fits the provider's full capacity. Retained requests are annotated
with the consumer's reliability breakdown, the nominal reward (requested
energy over provider capacity), and the reliability-discounted actual reward.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterable, Mapping, MutableMapping, Sequence

from .model import (
    DEFAULT_TRANSFER_RANGE_M,
    EQUAL_WEIGHTS,
    ConsumerHistory,
    DisruptionConfig,
    EnergyRequest,
    EnergyService,
    InvalidConfig,
    ReliabilityBreakdown,
    _check_weights,
)
from .reliability import score_consumer


class MissingHistory(LookupError):
    """A consumer has no history record and no default reliability is set."""


@dataclass(frozen=True)
class SelectionConfig:
    """Selection thresholds plus the scoring context shared with composers."""

    max_distance_m: float = DEFAULT_TRANSFER_RANGE_M
    disruption: DisruptionConfig = DisruptionConfig()
    weights: tuple[float, float, float, float] = EQUAL_WEIGHTS
    default_reliability: float | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "weights", _check_weights(self.weights))
        if not self.max_distance_m > 0:
            raise InvalidConfig(f"max_distance_m must be positive, got {self.max_distance_m}")
        if self.default_reliability is not None and not 0.0 <= self.default_reliability <= 1.0:
            raise InvalidConfig(
                f"default_reliability must lie in [0, 1], got {self.default_reliability}"
            )


def euclidean_distance(a: Sequence[float], b: Sequence[float]) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


def is_candidate(service: EnergyService, request: EnergyRequest, max_distance_m: float) -> bool:
    """The three admission predicates, all with inclusive boundaries."""
    return (
        service.window_start <= request.window_start
        and request.window_end <= service.window_end
        and euclidean_distance(request.location, service.location) <= max_distance_m
        and request.requested_pct <= service.capacity_pct
    )


def consumer_breakdown(
    consumer_id: str,
    histories: Mapping[str, ConsumerHistory],
    cfg: SelectionConfig,
    cache: MutableMapping[str, ReliabilityBreakdown] | None = None,
) -> ReliabilityBreakdown:
    """Score one consumer, falling back to the configured default when the
    consumer has no (or an empty) history record."""

    if cache is not None and consumer_id in cache:
        return cache[consumer_id]
    history = histories.get(consumer_id)
    if history is None:
        if cfg.default_reliability is None:
            raise MissingHistory(f"no history for consumer {consumer_id!r}")
        history = ConsumerHistory(consumer_id)
    breakdown = score_consumer(history, cfg.disruption, cfg.weights, cfg.default_reliability)
    if cache is not None:
        cache[consumer_id] = breakdown
    return breakdown


def score_histories(
    histories: Iterable[ConsumerHistory], cfg: SelectionConfig
) -> dict[str, ReliabilityBreakdown]:
    """Score every consumer once; useful as shared preprocessing."""
    return {
        h.consumer_id: score_consumer(h, cfg.disruption, cfg.weights, cfg.default_reliability)
        for h in histories
    }


def annotate(
    request: EnergyRequest, service: EnergyService, breakdown: ReliabilityBreakdown
) -> EnergyRequest:
    reward = request.requested_pct / service.capacity_pct
    return replace(
        request,
        reliability=breakdown,
        reward=reward,
        actual_reward=reward * breakdown.total,
    )


def select_requests(
    service: EnergyService,
    requests: Sequence[EnergyRequest],
    histories: Mapping[str, ConsumerHistory],
    cfg: SelectionConfig,
    scores: Mapping[str, ReliabilityBreakdown] | None = None,
) -> list[EnergyRequest]:
    """Filter candidates against the service and annotate the survivors.

    Input order is preserved. ``scores`` may carry precomputed breakdowns
    (e.g. from :func:`score_histories`) to avoid rescoring per call.
    """

    cache: dict[str, ReliabilityBreakdown] = dict(scores) if scores else {}
    selected: list[EnergyRequest] = []
    for request in requests:
        if not is_candidate(service, request, cfg.max_distance_m):
            continue
        breakdown = consumer_breakdown(request.consumer_id, histories, cfg, cache)
        selected.append(annotate(request, service, breakdown))
    return selected
