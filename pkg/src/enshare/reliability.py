"""Consumer reliability scoring from past charging sessions.

A consumer's score combines four components, each in [0, 1]:

* ``history``: share of past sessions that received everything requested.
* ``voluntary``: mean received/requested energy ratio averaged with the mean
  stay/required time ratio. Low values flag consumers who walk away early.
* ``involuntary``: penalizes intermittent disconnections, combining how often
  they happen with how much session time they swallow.
* ``random_behavior``: one minus the average spread (population standard
  deviation) of the energy and time ratios, so erratic consumers score low.

Disconnection gaps are bucketed by :class:`~enshare.model.DisruptionConfig`
thresholds before any of the above: gaps shorter than ``delta_sec`` are noise
and ignored everywhere; a terminal gap of at least ``epsilon_sec`` with no
reconnection is a voluntary abandonment; everything else is involuntary.

Time ratios are clamped to at most 1 so overstaying neither inflates a score
past 1 nor adds spurious variance. All functions are pure and deterministic.
"""

from __future__ import annotations

from enum import Enum
from math import fsum
from statistics import pstdev

from .model import (
    BadWeights,  # noqa: F401  (re-exported: raised via _check_weights)
    ConsumerHistory,
    DisruptionConfig,
    ReliabilityBreakdown,
    SessionRecord,
    _check_weights,
)

SINGLE_DISRUPTION_SCORE = 0.7


class EmptyHistory(ValueError):
    """Scoring was asked for a consumer with no recorded sessions."""


class DegenerateSession(ValueError):
    """A session has zero duration, so gap ratios are undefined."""


class DisruptionClass(Enum):
    NOISE = "noise"
    INVOLUNTARY = "involuntary"
    VOLUNTARY = "voluntary"


def classify_disruptions(
    session: SessionRecord, cfg: DisruptionConfig
) -> list[DisruptionClass]:
    """Assign exactly one class to every disconnection in the session.

    A gap is voluntary only when it is the last disconnection, runs to the
    session end, and lasts at least ``epsilon_sec``. Any other gap of at
    least ``delta_sec`` is involuntary, including a short trailing one.
    """

    classes: list[DisruptionClass] = []
    last = len(session.disconnections) - 1
    for i, (start, end) in enumerate(session.disconnections):
        duration = end - start
        if duration < cfg.delta_sec:
            classes.append(DisruptionClass.NOISE)
        elif (
            i == last
            and end >= session.session_end
            and duration >= cfg.epsilon_sec
        ):
            classes.append(DisruptionClass.VOLUNTARY)
        else:
            classes.append(DisruptionClass.INVOLUNTARY)
    return classes


def _countable_gaps(session: SessionRecord, cfg: DisruptionConfig) -> list[int]:
    """Durations of all non-noise gaps (the ones every score may count)."""
    return [
        end - start
        for start, end in session.disconnections
        if end - start >= cfg.delta_sec
    ]


def rel_f(session: SessionRecord, cfg: DisruptionConfig) -> float:
    """Disconnection-frequency score for a single session.

    With ``f`` the number of non-noise gaps: no gap scores 1, a single gap
    scores ``SINGLE_DISRUPTION_SCORE``, and ``f >= 2`` gaps score ``1/f``.
    """

    f = len(_countable_gaps(session, cfg))
    if f == 0:
        return 1.0
    if f == 1:
        return SINGLE_DISRUPTION_SCORE
    return 1.0 / f


def _require_sessions(history: ConsumerHistory) -> tuple[SessionRecord, ...]:
    if not history.sessions:
        raise EmptyHistory(f"consumer {history.consumer_id} has no recorded sessions")
    return history.sessions


def _energy_ratio(session: SessionRecord) -> float:
    return session.received_energy / session.requested_energy


def _time_ratio(session: SessionRecord) -> float:
    return min(session.stay_time / session.required_time, 1.0)


def rel_history(history: ConsumerHistory) -> float:
    """Fraction of past sessions that received all requested energy."""
    sessions = _require_sessions(history)
    return sum(1 for s in sessions if s.success) / len(sessions)


def rel_voluntary(history: ConsumerHistory) -> float:
    """Mean energy ratio averaged with mean (clamped) time ratio."""
    sessions = _require_sessions(history)
    energy = fsum(_energy_ratio(s) for s in sessions) / len(sessions)
    time = fsum(_time_ratio(s) for s in sessions) / len(sessions)
    return (energy + time) / 2.0


def _gap_time_share(session: SessionRecord, cfg: DisruptionConfig) -> float:
    duration = session.session_end - session.session_start
    if duration == 0:
        raise DegenerateSession(
            f"session starting at {session.session_start} has zero duration"
        )
    return sum(_countable_gaps(session, cfg)) / duration


def rel_involuntary(history: ConsumerHistory, cfg: DisruptionConfig) -> float:
    """Average of the frequency score and the duration score over all sessions.

    The per-session duration score is one minus the share of session time
    spent in non-noise gaps.
    """

    sessions = _require_sessions(history)
    freq = fsum(rel_f(s, cfg) for s in sessions) / len(sessions)
    duration = fsum(1.0 - _gap_time_share(s, cfg) for s in sessions) / len(sessions)
    return (freq + duration) / 2.0


def rel_random(history: ConsumerHistory) -> float:
    """One minus the mean spread of the energy and time ratios.

    Ratios live in [0, 1], so each population standard deviation is at most
    0.5 and the result stays within [0.5, 1].
    """

    sessions = _require_sessions(history)
    energy_var = pstdev([_energy_ratio(s) for s in sessions])
    time_var = pstdev([_time_ratio(s) for s in sessions])
    return (2.0 - (energy_var + time_var)) / 2.0


def score_consumer(
    history: ConsumerHistory,
    cfg: DisruptionConfig,
    weights: tuple[float, float, float, float],
    default: float | None = None,
) -> ReliabilityBreakdown:
    """Compute the full breakdown for one consumer.

    ``default``, when given, is used for every component (and hence the
    total) of a consumer with an empty history; otherwise an empty history
    raises :class:`EmptyHistory`.
    """

    w = _check_weights(weights)
    if not history.sessions:
        if default is None:
            raise EmptyHistory(
                f"consumer {history.consumer_id} has no sessions and no default is configured"
            )
        return ReliabilityBreakdown(
            history=default,
            voluntary=default,
            involuntary=default,
            random_behavior=default,
            total=fsum(wi * default for wi in w),
            weights=w,
        )
    components = (
        rel_history(history),
        rel_voluntary(history),
        rel_involuntary(history, cfg),
        rel_random(history),
    )
    return ReliabilityBreakdown(
        history=components[0],
        voluntary=components[1],
        involuntary=components[2],
        random_behavior=components[3],
        total=fsum(wi * c for wi, c in zip(w, components)),
        weights=w,
    )


def actual_reward(reward: float, total_reliability: float) -> float:
    """Discount a nominal reward by the consumer's total reliability."""
    if not 0.0 <= reward <= 1.0:
        raise ValueError(f"reward must lie in [0, 1], got {reward}")
    if not 0.0 <= total_reliability <= 1.0:
        raise ValueError(f"total_reliability must lie in [0, 1], got {total_reliability}")
    return reward * total_reliability
