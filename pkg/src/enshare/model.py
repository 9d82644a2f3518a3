"""Domain model for provider-side composition of energy-sharing requests.

Conventions used throughout the package:

* timestamps and durations are integer seconds,
* energy amounts are dimensionless fractions of a full battery in (0, 1],
* locations are planar ``(x, y)`` coordinates in meters.

Every type is a frozen dataclass, validated on construction, and therefore
safe to share between concurrent tasks. The JSON scenario document produced
by :func:`scenario_to_dict` is the package's on-disk interchange format.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from math import fsum
from pathlib import Path
from typing import Any, Mapping

TOLERANCE = 1e-9

# Wireless transfer reach of 15 feet, expressed in meters.
DEFAULT_TRANSFER_RANGE_M = 4.572

# Weight order: (history, voluntary, involuntary, random_behavior).
EQUAL_WEIGHTS: tuple[float, float, float, float] = (0.25, 0.25, 0.25, 0.25)


class InvalidWindow(ValueError):
    """A time window has ``window_start >= window_end``."""


class InvalidAmount(ValueError):
    """An energy fraction or score lies outside its declared range."""


class InvalidSession(ValueError):
    """A session record violates one of its structural invariants."""


class BadWeights(ValueError):
    """Reliability weights are malformed (wrong arity, negative, or sum != 1)."""


class InvalidConfig(ValueError):
    """A configuration value is out of range."""


def _require_finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise InvalidAmount(f"{name} must be finite, got {value!r}")
    return value


def _require_fraction(name: str, value: float) -> float:
    value = _require_finite(name, value)
    if not 0.0 < value <= 1.0:
        raise InvalidAmount(f"{name} must lie in (0, 1], got {value}")
    return value


def _require_unit(name: str, value: float) -> float:
    value = _require_finite(name, value)
    if not 0.0 <= value <= 1.0:
        raise InvalidAmount(f"{name} must lie in [0, 1], got {value}")
    return value


def _require_window(owner: str, start: int, end: int) -> None:
    if start >= end:
        raise InvalidWindow(f"{owner}: window_start {start} must precede window_end {end}")


def _as_point(value: Any) -> tuple[float, float]:
    x, y = value
    return (_require_finite("location.x", x), _require_finite("location.y", y))


def _check_weights(weights: Any) -> tuple[float, float, float, float]:
    try:
        w = tuple(float(v) for v in weights)
    except (TypeError, ValueError) as exc:
        raise BadWeights(f"weights must be four numbers, got {weights!r}") from exc
    if len(w) != 4:
        raise BadWeights(f"expected 4 weights, got {len(w)}")
    for v in w:
        if not math.isfinite(v) or v < 0.0:
            raise BadWeights(f"weights must be finite and non-negative, got {w}")
    if abs(fsum(w) - 1.0) > TOLERANCE:
        raise BadWeights(f"weights must sum to 1, got sum {fsum(w)!r}")
    return w  # type: ignore[return-value]


@dataclass(frozen=True)
class DisruptionConfig:
    """Thresholds separating noise, involuntary, and voluntary disconnections.

    ``delta_sec`` is the noise floor: shorter gaps are ignored everywhere.
    ``epsilon_sec`` is the abandonment threshold: a terminal gap at least this
    long, with no reconnection, counts as the consumer walking away.
    ``alpha_sec`` bounds a benign trailing gap at the end of a session.
    """

    delta_sec: int = 30
    epsilon_sec: int = 300
    alpha_sec: int = 120

    def __post_init__(self) -> None:
        object.__setattr__(self, "delta_sec", int(self.delta_sec))
        object.__setattr__(self, "epsilon_sec", int(self.epsilon_sec))
        object.__setattr__(self, "alpha_sec", int(self.alpha_sec))
        if not 0 < self.delta_sec < self.epsilon_sec:
            raise InvalidConfig(
                f"need 0 < delta_sec < epsilon_sec, got {self.delta_sec}, {self.epsilon_sec}"
            )
        if self.alpha_sec <= 0:
            raise InvalidConfig(f"alpha_sec must be positive, got {self.alpha_sec}")

    def to_dict(self) -> dict[str, int]:
        return {
            "delta_sec": self.delta_sec,
            "epsilon_sec": self.epsilon_sec,
            "alpha_sec": self.alpha_sec,
        }

    @classmethod
    def from_dict(cls, raw: Mapping[str, Any]) -> "DisruptionConfig":
        return cls(raw["delta_sec"], raw["epsilon_sec"], raw["alpha_sec"])


@dataclass(frozen=True)
class EnergyService:
    """A provider's advertisement: shareable capacity, position, stay window."""

    service_id: str
    provider_id: str
    capacity_pct: float
    location: tuple[float, float]
    window_start: int
    window_end: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "location", _as_point(self.location))
        object.__setattr__(self, "window_start", int(self.window_start))
        object.__setattr__(self, "window_end", int(self.window_end))
        object.__setattr__(self, "capacity_pct", _require_fraction("capacity_pct", self.capacity_pct))
        _require_window(f"service {self.service_id}", self.window_start, self.window_end)

    def to_dict(self) -> dict[str, Any]:
        return {
            "service_id": self.service_id,
            "provider_id": self.provider_id,
            "capacity_pct": self.capacity_pct,
            "location": list(self.location),
            "window_start": self.window_start,
            "window_end": self.window_end,
        }

    @classmethod
    def from_dict(cls, raw: Mapping[str, Any]) -> "EnergyService":
        return cls(
            service_id=raw["service_id"],
            provider_id=raw["provider_id"],
            capacity_pct=raw["capacity_pct"],
            location=tuple(raw["location"]),
            window_start=raw["window_start"],
            window_end=raw["window_end"],
        )


@dataclass(frozen=True)
class ReliabilityBreakdown:
    """The four component scores and their weighted total for one consumer."""

    history: float
    voluntary: float
    involuntary: float
    random_behavior: float
    total: float
    weights: tuple[float, float, float, float]

    def __post_init__(self) -> None:
        object.__setattr__(self, "weights", _check_weights(self.weights))
        for name in ("history", "voluntary", "involuntary", "random_behavior", "total"):
            object.__setattr__(self, name, _require_unit(name, getattr(self, name)))
        expected = fsum(w * c for w, c in zip(self.weights, self.components()))
        if abs(self.total - expected) > TOLERANCE:
            raise InvalidAmount(
                f"total {self.total!r} does not match weighted components {expected!r}"
            )

    def components(self) -> tuple[float, float, float, float]:
        return (self.history, self.voluntary, self.involuntary, self.random_behavior)

    def to_dict(self) -> dict[str, Any]:
        return {
            "history": self.history,
            "voluntary": self.voluntary,
            "involuntary": self.involuntary,
            "random_behavior": self.random_behavior,
            "total": self.total,
            "weights": list(self.weights),
        }

    @classmethod
    def from_dict(cls, raw: Mapping[str, Any]) -> "ReliabilityBreakdown":
        return cls(
            history=raw["history"],
            voluntary=raw["voluntary"],
            involuntary=raw["involuntary"],
            random_behavior=raw["random_behavior"],
            total=raw["total"],
            weights=tuple(raw["weights"]),
        )


@dataclass(frozen=True)
class EnergyRequest:
    """A consumer's demand: amount, stay window, position, plus scoring fields.

    ``reliability``, ``reward``, and ``actual_reward`` start out ``None`` and
    are filled by the selection stage. An annotated request must satisfy
    ``actual_reward == reward * reliability.total`` within :data:`TOLERANCE`.
    """

    request_id: str
    consumer_id: str
    requested_pct: float
    location: tuple[float, float]
    window_start: int
    window_end: int
    reliability: ReliabilityBreakdown | None = None
    reward: float | None = None
    actual_reward: float | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "location", _as_point(self.location))
        object.__setattr__(self, "window_start", int(self.window_start))
        object.__setattr__(self, "window_end", int(self.window_end))
        object.__setattr__(self, "requested_pct", _require_fraction("requested_pct", self.requested_pct))
        _require_window(f"request {self.request_id}", self.window_start, self.window_end)
        if self.reliability is not None:
            if self.reward is None or self.actual_reward is None:
                raise ValueError(
                    f"request {self.request_id}: reliability present but reward fields missing"
                )
            object.__setattr__(self, "reward", _require_fraction("reward", self.reward))
            object.__setattr__(self, "actual_reward", _require_unit("actual_reward", self.actual_reward))
            expected = self.reward * self.reliability.total
            if abs(self.actual_reward - expected) > TOLERANCE:
                raise ValueError(
                    f"request {self.request_id}: actual_reward {self.actual_reward!r} "
                    f"inconsistent with reward * reliability ({expected!r})"
                )

    def to_dict(self) -> dict[str, Any]:
        return {
            "request_id": self.request_id,
            "consumer_id": self.consumer_id,
            "requested_pct": self.requested_pct,
            "location": list(self.location),
            "window_start": self.window_start,
            "window_end": self.window_end,
            "reliability": None if self.reliability is None else self.reliability.to_dict(),
            "reward": self.reward,
            "actual_reward": self.actual_reward,
        }

    @classmethod
    def from_dict(cls, raw: Mapping[str, Any]) -> "EnergyRequest":
        breakdown = raw.get("reliability")
        return cls(
            request_id=raw["request_id"],
            consumer_id=raw["consumer_id"],
            requested_pct=raw["requested_pct"],
            location=tuple(raw["location"]),
            window_start=raw["window_start"],
            window_end=raw["window_end"],
            reliability=None if breakdown is None else ReliabilityBreakdown.from_dict(breakdown),
            reward=raw.get("reward"),
            actual_reward=raw.get("actual_reward"),
        )


def validate_request(req: EnergyRequest) -> EnergyRequest:
    """Re-check all request invariants and return the request unchanged.

    Raises :class:`InvalidWindow` or :class:`InvalidAmount` as appropriate.
    Constructing an :class:`EnergyRequest` runs the same checks, so parsed or
    hand-built instances are already valid; this entry point exists for
    callers that want an explicit validation step in a pipeline.
    """

    _require_window(f"request {req.request_id}", req.window_start, req.window_end)
    _require_fraction("requested_pct", req.requested_pct)
    if req.reliability is not None:
        _require_fraction("reward", req.reward)  # type: ignore[arg-type]
        _require_unit("actual_reward", req.actual_reward)  # type: ignore[arg-type]
    return req


@dataclass(frozen=True)
class SessionRecord:
    """One past charging session of a consumer.

    ``required_time`` is the connected time needed to receive everything that
    was requested; ``stay_time`` is the time actually spent connected.
    ``disconnections`` are ``(start, end)`` gaps, ordered, non-overlapping,
    and contained in ``[session_start, session_end]``.
    """

    requested_energy: float
    received_energy: float
    required_time: int
    stay_time: int
    session_start: int
    session_end: int
    disconnections: tuple[tuple[int, int], ...] = ()
    success: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "requested_energy", _require_fraction("requested_energy", self.requested_energy))
        object.__setattr__(self, "received_energy", _require_finite("received_energy", self.received_energy))
        object.__setattr__(self, "required_time", int(self.required_time))
        object.__setattr__(self, "stay_time", int(self.stay_time))
        object.__setattr__(self, "session_start", int(self.session_start))
        object.__setattr__(self, "session_end", int(self.session_end))
        object.__setattr__(
            self, "disconnections", tuple((int(s), int(e)) for s, e in self.disconnections)
        )
        if not 0.0 <= self.received_energy <= self.requested_energy:
            raise InvalidSession(
                f"received_energy {self.received_energy} outside [0, {self.requested_energy}]"
            )
        if self.required_time < 1:
            raise InvalidSession(f"required_time must be >= 1 s, got {self.required_time}")
        if self.stay_time < 0:
            raise InvalidSession(f"stay_time must be >= 0, got {self.stay_time}")
        if self.session_end < self.session_start:
            raise InvalidSession(
                f"session_end {self.session_end} precedes session_start {self.session_start}"
            )
        cursor = self.session_start
        for start, end in self.disconnections:
            if start < cursor or end <= start or end > self.session_end:
                raise InvalidSession(
                    f"disconnection ({start}, {end}) not ordered/contained in "
                    f"[{self.session_start}, {self.session_end}]"
                )
            cursor = end
        if self.success != (self.received_energy == self.requested_energy):
            raise InvalidSession(
                f"success={self.success} inconsistent with received "
                f"{self.received_energy} of {self.requested_energy}"
            )

    def to_dict(self) -> dict[str, Any]:
        return {
            "requested_energy": self.requested_energy,
            "received_energy": self.received_energy,
            "required_time": self.required_time,
            "stay_time": self.stay_time,
            "session_start": self.session_start,
            "session_end": self.session_end,
            "disconnections": [list(gap) for gap in self.disconnections],
            "success": self.success,
        }

    @classmethod
    def from_dict(cls, raw: Mapping[str, Any]) -> "SessionRecord":
        return cls(
            requested_energy=raw["requested_energy"],
            received_energy=raw["received_energy"],
            required_time=raw["required_time"],
            stay_time=raw["stay_time"],
            session_start=raw["session_start"],
            session_end=raw["session_end"],
            disconnections=tuple(tuple(gap) for gap in raw["disconnections"]),
            success=raw["success"],
        )


@dataclass(frozen=True)
class ConsumerHistory:
    """All recorded past sessions of one consumer, oldest first."""

    consumer_id: str
    sessions: tuple[SessionRecord, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "sessions", tuple(self.sessions))

    def __len__(self) -> int:
        return len(self.sessions)

    def to_dict(self) -> dict[str, Any]:
        return {
            "consumer_id": self.consumer_id,
            "sessions": [s.to_dict() for s in self.sessions],
        }

    @classmethod
    def from_dict(cls, raw: Mapping[str, Any]) -> "ConsumerHistory":
        return cls(
            consumer_id=raw["consumer_id"],
            sessions=tuple(SessionRecord.from_dict(s) for s in raw["sessions"]),
        )


@dataclass(frozen=True)
class ScheduledRequest:
    """An admitted request together with its scheduled transfer interval."""

    request: EnergyRequest
    scheduled_start: int
    scheduled_end: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "scheduled_start", int(self.scheduled_start))
        object.__setattr__(self, "scheduled_end", int(self.scheduled_end))
        _require_window(f"schedule for {self.request.request_id}", self.scheduled_start, self.scheduled_end)


@dataclass(frozen=True)
class CompositionResult:
    """Outcome of one composition: the schedule plus aggregate metrics.

    ``total_reliability`` is a sum over admitted consumers and may exceed 1.
    ``elapsed`` is the wall-clock duration of the composition call in seconds.
    Feasibility invariants (non-overlap, budget, containment) are deliberately
    not enforced here; the checker module re-validates them independently.
    """

    selected: tuple[ScheduledRequest, ...]
    total_reliability: float
    total_actual_reward: float
    remaining_energy_pct: float
    elapsed: float
    strategy: str

    def __post_init__(self) -> None:
        object.__setattr__(self, "selected", tuple(self.selected))
        for name in ("total_reliability", "total_actual_reward"):
            value = _require_finite(name, getattr(self, name))
            object.__setattr__(self, name, value)
            if value < 0.0:
                raise InvalidAmount(f"{name} must be non-negative, got {value}")
        object.__setattr__(
            self, "remaining_energy_pct", _require_unit("remaining_energy_pct", self.remaining_energy_pct)
        )
        elapsed = _require_finite("elapsed", self.elapsed)
        if elapsed < 0.0:
            raise InvalidAmount(f"elapsed must be non-negative, got {elapsed}")
        object.__setattr__(self, "elapsed", elapsed)

    def request_ids(self) -> tuple[str, ...]:
        return tuple(item.request.request_id for item in self.selected)

    def to_document(self) -> dict[str, Any]:
        """Shape used by the ``compose`` CLI output and the ``verify`` input."""
        return {
            "strategy": self.strategy,
            "selected": [
                {
                    "request_id": item.request.request_id,
                    "scheduled_start": item.scheduled_start,
                    "scheduled_end": item.scheduled_end,
                }
                for item in self.selected
            ],
            "total_reliability": self.total_reliability,
            "total_actual_reward": self.total_actual_reward,
            "remaining_energy_pct": self.remaining_energy_pct,
            "elapsed_micros": self.elapsed * 1e6,
        }


@dataclass(frozen=True)
class Scenario:
    """One microcell instance: a service, candidate requests, and histories.

    ``metadata`` carries generator provenance (seed, per-consumer battery
    levels, synthesis notes); it is preserved by serialization but ignored by
    all scoring and composition code.
    """

    service: EnergyService
    requests: tuple[EnergyRequest, ...]
    histories: tuple[ConsumerHistory, ...]
    disruption_config: DisruptionConfig = DisruptionConfig()
    weights: tuple[float, float, float, float] = EQUAL_WEIGHTS
    metadata: Mapping[str, Any] | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "requests", tuple(self.requests))
        object.__setattr__(self, "histories", tuple(self.histories))
        object.__setattr__(self, "weights", _check_weights(self.weights))

    def histories_by_consumer(self) -> dict[str, ConsumerHistory]:
        return {h.consumer_id: h for h in self.histories}

    def to_dict(self) -> dict[str, Any]:
        doc: dict[str, Any] = {
            "service": self.service.to_dict(),
            "requests": [r.to_dict() for r in self.requests],
            "histories": [h.to_dict() for h in self.histories],
            "disruption_config": self.disruption_config.to_dict(),
            "weights": list(self.weights),
        }
        if self.metadata is not None:
            doc["metadata"] = self.metadata
        return doc

    @classmethod
    def from_dict(cls, raw: Mapping[str, Any]) -> "Scenario":
        try:
            return cls(
                service=EnergyService.from_dict(raw["service"]),
                requests=tuple(EnergyRequest.from_dict(r) for r in raw["requests"]),
                histories=tuple(ConsumerHistory.from_dict(h) for h in raw["histories"]),
                disruption_config=DisruptionConfig.from_dict(raw["disruption_config"]),
                weights=tuple(raw["weights"]),
                metadata=raw.get("metadata"),
            )
        except KeyError as exc:
            raise ValueError(f"scenario document missing field {exc.args[0]!r}") from exc


def dump_scenario(scenario: Scenario, path: str | Path) -> None:
    Path(path).write_text(json.dumps(scenario.to_dict(), indent=2) + "\n", encoding="utf-8")


def load_scenario(path: str | Path) -> Scenario:
    return Scenario.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
