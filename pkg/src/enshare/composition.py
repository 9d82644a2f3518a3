"""Composition strategies scheduling selected requests for a single provider.

All strategies share the same feasibility rules: the provider serves one
consumer at a time (scheduled windows must not overlap) and admitted energy
must fit the remaining capacity. They differ in scan order and in whether
requests are downsized before scheduling:

* ``rb``      scans by start time, breaking start ties by actual reward.
* ``greedy``  scans strictly by start time (first come, first served).
* ``arb``     first downsizes each candidate's amount and window by the
              consumer's voluntary reliability, then schedules like ``rb``.
* ``bf``      exhaustively searches feasible subsets for the maximum total
              actual reward (branch and bound; the optimality oracle).
"""

from __future__ import annotations

import time
from dataclasses import replace
from enum import Enum
from math import fsum
from typing import Mapping, Sequence

from .model import (
    CompositionResult,
    ConsumerHistory,
    EnergyRequest,
    EnergyService,
    ReliabilityBreakdown,
    ScheduledRequest,
)
from .selection import SelectionConfig, consumer_breakdown, is_candidate

DEFAULT_BF_LIMIT = 20

# Slack below the incumbent before a branch is pruned; keeps ties explorable.
_PRUNE_MARGIN = 1e-12


class Strategy(str, Enum):
    RB = "rb"
    ARB = "arb"
    GREEDY = "greedy"
    BRUTE_FORCE = "bf"


class TooManyCandidates(ValueError):
    """The brute-force composer was given more candidates than its limit."""


def _require_annotated(requests: Sequence[EnergyRequest]) -> None:
    for req in requests:
        if req.reliability is None or req.actual_reward is None:
            raise ValueError(f"request {req.request_id} is not annotated; run selection first")


def _build_result(
    service: EnergyService,
    picks: Sequence[EnergyRequest],
    strategy: Strategy,
    elapsed: float,
) -> CompositionResult:
    selected = tuple(
        ScheduledRequest(req, req.window_start, req.window_end) for req in picks
    )
    used = fsum(req.requested_pct for req in picks)
    return CompositionResult(
        selected=selected,
        total_reliability=fsum(req.reliability.total for req in picks),
        total_actual_reward=fsum(req.actual_reward for req in picks),
        remaining_energy_pct=max(0.0, service.capacity_pct - used),
        elapsed=elapsed,
        strategy=strategy.value,
    )


def _scan_admit(service: EnergyService, ordered: Sequence[EnergyRequest]) -> list[EnergyRequest]:
    """Single pass over pre-sorted requests with the rolling-start budget rule."""
    rolling_start = service.window_start
    remaining = service.capacity_pct
    picks: list[EnergyRequest] = []
    for req in ordered:
        if req.window_start >= rolling_start and req.requested_pct <= remaining:
            picks.append(req)
            rolling_start = req.window_end
            remaining -= req.requested_pct
    return picks


def compose_rb(service: EnergyService, selected: Sequence[EnergyRequest]) -> CompositionResult:
    """Reliability-based composition over annotated requests."""
    _require_annotated(selected)
    started = time.perf_counter()
    ordered = sorted(
        selected, key=lambda r: (r.window_start, -r.actual_reward, r.request_id)
    )
    picks = _scan_admit(service, ordered)
    return _build_result(service, picks, Strategy.RB, time.perf_counter() - started)


def compose_greedy(service: EnergyService, selected: Sequence[EnergyRequest]) -> CompositionResult:
    """First-come-first-served baseline; ordering ignores reliability."""
    _require_annotated(selected)
    started = time.perf_counter()
    ordered = sorted(selected, key=lambda r: (r.window_start, r.request_id))
    picks = _scan_admit(service, ordered)
    return _build_result(service, picks, Strategy.GREEDY, time.perf_counter() - started)


def downsize_requests(
    service: EnergyService,
    requests: Sequence[EnergyRequest],
    histories: Mapping[str, ConsumerHistory],
    cfg: SelectionConfig,
    scores: Mapping[str, ReliabilityBreakdown] | None = None,
) -> list[EnergyRequest]:
    """The adaptive selection stage: filter raw requests, then shrink each
    survivor's amount and window by the consumer's voluntary reliability
    before annotating.

    The window shrinks from the end, rounded down to whole seconds with a
    one-second floor. A consumer whose voluntary reliability is zero would be
    downsized to a zero-energy request, so it is dropped instead.
    """

    cache: dict[str, ReliabilityBreakdown] = dict(scores) if scores else {}
    downsized: list[EnergyRequest] = []
    for request in requests:
        if not is_candidate(service, request, cfg.max_distance_m):
            continue
        breakdown = consumer_breakdown(request.consumer_id, histories, cfg, cache)
        v = breakdown.voluntary
        if v <= 0.0:
            continue
        duration = request.window_end - request.window_start
        shrunk_pct = request.requested_pct * v
        reward = shrunk_pct / service.capacity_pct
        downsized.append(
            replace(
                request,
                requested_pct=shrunk_pct,
                window_end=request.window_start + max(1, int(duration * v)),
                reliability=breakdown,
                reward=reward,
                actual_reward=reward * breakdown.total,
            )
        )
    return downsized


def compose_arb(
    service: EnergyService,
    requests: Sequence[EnergyRequest],
    histories: Mapping[str, ConsumerHistory],
    cfg: SelectionConfig,
    scores: Mapping[str, ReliabilityBreakdown] | None = None,
) -> CompositionResult:
    """Adaptive composition over raw requests.

    Runs its own selection because it mutates amounts and windows before
    annotation; the scheduling pass is identical to :func:`compose_rb`.
    Precomputed ``scores`` may be passed so shared scoring stays outside the
    measured composition time.
    """

    started = time.perf_counter()
    downsized = downsize_requests(service, requests, histories, cfg, scores)
    ordered = sorted(
        downsized, key=lambda r: (r.window_start, -r.actual_reward, r.request_id)
    )
    picks = _scan_admit(service, ordered)
    return _build_result(service, picks, Strategy.ARB, time.perf_counter() - started)


def compose_bruteforce(
    service: EnergyService,
    selected: Sequence[EnergyRequest],
    limit_n: int = DEFAULT_BF_LIMIT,
) -> CompositionResult:
    """Exhaustive search for the feasible subset with maximum actual reward.

    A subset is feasible when, ordered by start time, consecutive windows do
    not overlap and the summed amounts fit the capacity. Ties are broken by
    higher total reliability, then by the lexicographically smallest sorted
    tuple of request ids, making the optimum unique and reproducible.
    """

    if len(selected) > limit_n:
        raise TooManyCandidates(f"{len(selected)} candidates exceed the limit of {limit_n}")
    _require_annotated(selected)
    started = time.perf_counter()
    ordered = sorted(selected, key=lambda r: (r.window_start, r.request_id))
    n = len(ordered)

    # suffix[i]: upper bound on reward obtainable from ordered[i:].
    suffix = [0.0] * (n + 1)
    for i in range(n - 1, -1, -1):
        suffix[i] = suffix[i + 1] + ordered[i].actual_reward

    best_reward = 0.0
    best_reliability = 0.0
    best_ids: tuple[str, ...] = ()
    best_picks: tuple[EnergyRequest, ...] = ()

    def consider(reward: float, reliability: float, picks: list[EnergyRequest]) -> None:
        nonlocal best_reward, best_reliability, best_ids, best_picks
        ids = tuple(sorted(req.request_id for req in picks))
        if (
            reward > best_reward
            or (reward == best_reward and reliability > best_reliability)
            or (reward == best_reward and reliability == best_reliability and ids and ids < best_ids)
        ):
            best_reward = reward
            best_reliability = reliability
            best_ids = ids
            best_picks = tuple(picks)

    def walk(
        i: int,
        free_from: int,
        remaining: float,
        reward: float,
        reliability: float,
        picks: list[EnergyRequest],
    ) -> None:
        if reward + suffix[i] < best_reward - _PRUNE_MARGIN:
            return
        if i == n:
            return
        req = ordered[i]
        if req.window_start >= free_from and req.requested_pct <= remaining:
            picks.append(req)
            new_reward = reward + req.actual_reward
            new_reliability = reliability + req.reliability.total
            consider(new_reward, new_reliability, picks)
            walk(i + 1, req.window_end, remaining - req.requested_pct, new_reward, new_reliability, picks)
            picks.pop()
        walk(i + 1, free_from, remaining, reward, reliability, picks)

    walk(0, service.window_start, service.capacity_pct, 0.0, 0.0, [])
    return _build_result(service, best_picks, Strategy.BRUTE_FORCE, time.perf_counter() - started)
