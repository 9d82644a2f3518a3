"""Synthetic scenario generation and transaction-CSV ingestion.

A scenario models one microcell during one provider's stay: the service, the
requests arriving inside its window, and a history for every consumer. All
quantities are drawn uniformly from configured ranges; window starts and
durations land on whole minutes, mirroring transaction-log granularity.

Histories are synthesized causally: each session's received energy and stay
time are derived from the gaps injected into it, so a consumer who abandons a
session mid-transfer really does show a shortfall, and the reliability model
scores something internally consistent. The per-pattern mix below (how often
a disrupted session is an abandonment versus intermittent drops) is the
generator's own choice and is echoed into the scenario metadata.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterator

import numpy as np

from .model import (
    EQUAL_WEIGHTS,
    ConsumerHistory,
    DisruptionConfig,
    EnergyRequest,
    EnergyService,
    InvalidConfig,
    Scenario,
    SessionRecord,
)

# Consumers come in two archetypes whose mix is chosen so the population
# marginal equals the configured disruption rate: committed consumers rarely
# disrupt and, when they do, usually reconnect; flaky consumers disrupt most
# sessions and usually abandon them. The split gives the reliability model a
# real signal to discriminate on.
COMMITTED_RATE = 0.08
FLAKY_RATE = 0.85
# Probability that a disrupted session is an abandonment / intermittent
# drops / a benign trailing drop, per archetype.
COMMITTED_MIX = (0.15, 0.65, 0.20)
FLAKY_MIX = (0.75, 0.20, 0.05)
# Fraction of the needed transfer completed before a voluntary abandonment.
ABANDON_SPAN = (0.10, 0.90)
# Chance that an abandonment is preceded by one interior drop.
P_PRIOR_DROP = 0.30
# Chance that a clean session still carries one sub-threshold blip.
P_NOISE_BLIP = 0.25
# Chance that a clean session overstays (exercises time-ratio clamping).
P_OVERSTAY = 0.15

_MINUTES_PER_DAY = 1440


@dataclass(frozen=True)
class GeneratorConfig:
    """Workload knobs; ranges are inclusive ``(low, high)`` bounds."""

    seed: int = 0
    n_services: int = 8000
    requests_per_microcell_day: int = 560
    service_duration_min: tuple[int, int] = (30, 120)
    request_duration_min: tuple[int, int] = (5, 30)
    provided_energy_pct: tuple[float, float] = (0.50, 1.00)
    requested_energy_pct: tuple[float, float] = (0.01, 1.00)
    battery_level_pct: tuple[float, float] = (0.01, 0.60)
    history_sessions_per_consumer: tuple[int, int] = (5, 20)
    disruption_rate: float = 0.4
    microcell_radius_m: float = 10.0

    def __post_init__(self) -> None:
        for name in (
            "service_duration_min",
            "request_duration_min",
            "provided_energy_pct",
            "requested_energy_pct",
            "battery_level_pct",
            "history_sessions_per_consumer",
        ):
            low, high = getattr(self, name)
            if not 0 < low <= high:
                raise InvalidConfig(f"{name} must satisfy 0 < low <= high, got ({low}, {high})")
        if self.n_services < 1:
            raise InvalidConfig(f"n_services must be >= 1, got {self.n_services}")
        if self.requests_per_microcell_day < 1:
            raise InvalidConfig(
                f"requests_per_microcell_day must be >= 1, got {self.requests_per_microcell_day}"
            )
        if not 0.0 <= self.disruption_rate <= 1.0:
            raise InvalidConfig(f"disruption_rate must lie in [0, 1], got {self.disruption_rate}")
        if self.microcell_radius_m <= 0:
            raise InvalidConfig(f"microcell_radius_m must be positive, got {self.microcell_radius_m}")

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "n_services": self.n_services,
            "requests_per_microcell_day": self.requests_per_microcell_day,
            "service_duration_min": list(self.service_duration_min),
            "request_duration_min": list(self.request_duration_min),
            "provided_energy_pct": list(self.provided_energy_pct),
            "requested_energy_pct": list(self.requested_energy_pct),
            "battery_level_pct": list(self.battery_level_pct),
            "history_sessions_per_consumer": list(self.history_sessions_per_consumer),
            "disruption_rate": self.disruption_rate,
            "microcell_radius_m": self.microcell_radius_m,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "GeneratorConfig":
        kwargs = {}
        for key in cls.__dataclass_fields__:
            if key in raw:
                value = raw[key]
                kwargs[key] = tuple(value) if isinstance(value, list) else value
        return cls(**kwargs)


class MalformedCSV(ValueError):
    """A transaction CSV row could not be parsed; carries the line number."""

    def __init__(self, message: str, line_no: int):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


def _int_between(rng: np.random.Generator, bounds: tuple[int, int]) -> int:
    low, high = bounds
    return int(rng.integers(low, high + 1))


def _float_between(rng: np.random.Generator, bounds: tuple[float, float]) -> float:
    low, high = bounds
    return float(rng.uniform(low, high))


def _disc_point(
    rng: np.random.Generator, center: tuple[float, float], radius: float
) -> tuple[float, float]:
    r = radius * float(np.sqrt(rng.uniform(0.0, 1.0)))
    theta = float(rng.uniform(0.0, 2.0 * np.pi))
    return (center[0] + r * float(np.cos(theta)), center[1] + r * float(np.sin(theta)))


def _interior_gaps(
    rng: np.random.Generator,
    start: int,
    connected: int,
    durations: list[int],
) -> tuple[list[tuple[int, int]], int]:
    """Place gaps between connected stretches; returns (gaps, total gap time)."""
    cuts = sorted(
        int(c) for c in rng.choice(np.arange(1, connected), size=len(durations), replace=False)
    )
    gaps: list[tuple[int, int]] = []
    offset = 0
    for cut, gap in zip(cuts, durations):
        gaps.append((start + cut + offset, start + cut + offset + gap))
        offset += gap
    return gaps, offset


def _archetype(rng: np.random.Generator, disruption_rate: float) -> tuple[float, tuple[float, float, float]]:
    """Pick (per-session disruption probability, pattern mix) for one consumer.

    The committed/flaky mix is solved so the expected per-session disruption
    probability across consumers equals ``disruption_rate``; rates outside the
    archetype band fall back to a homogeneous population.
    """

    if not COMMITTED_RATE < disruption_rate < FLAKY_RATE:
        mix = FLAKY_MIX if disruption_rate >= FLAKY_RATE else COMMITTED_MIX
        return disruption_rate, mix
    flaky_share = (disruption_rate - COMMITTED_RATE) / (FLAKY_RATE - COMMITTED_RATE)
    if rng.uniform() < flaky_share:
        return FLAKY_RATE, FLAKY_MIX
    return COMMITTED_RATE, COMMITTED_MIX


def _synthesize_session(
    rng: np.random.Generator,
    start: int,
    cfg: GeneratorConfig,
    disruption: DisruptionConfig,
    session_rate: float,
    pattern_mix: tuple[float, float, float],
) -> SessionRecord:
    requested = _float_between(rng, cfg.requested_energy_pct)
    required = 60 * _int_between(rng, cfg.request_duration_min)
    delta, epsilon, alpha = disruption.delta_sec, disruption.epsilon_sec, disruption.alpha_sec

    if rng.uniform() >= session_rate:
        # Clean session: full receipt, possibly a noise blip or an overstay.
        gaps: list[tuple[int, int]] = []
        gap_time = 0
        if delta >= 2 and rng.uniform() < P_NOISE_BLIP:
            gaps, gap_time = _interior_gaps(rng, start, required, [_int_between(rng, (1, delta - 1))])
        stay = required
        if rng.uniform() < P_OVERSTAY:
            stay = required + _int_between(rng, (60, 600))
        end = start + stay + gap_time
        return SessionRecord(
            requested_energy=requested,
            received_energy=requested,
            required_time=required,
            stay_time=stay,
            session_start=start,
            session_end=end,
            disconnections=tuple(gaps),
            success=True,
        )

    pattern = rng.choice(3, p=pattern_mix)
    if pattern == 2 and alpha <= delta:  # no room for a trailing drop band
        pattern = 1

    if pattern == 0:
        # Abandonment: partial transfer, then a terminal gap with no return.
        fraction = _float_between(rng, ABANDON_SPAN)
        connected = min(required - 1, max(2, round(fraction * required)))
        gaps = []
        gap_time = 0
        if rng.uniform() < P_PRIOR_DROP:
            gaps, gap_time = _interior_gaps(
                rng, start, connected, [_int_between(rng, (delta, epsilon - 1))]
            )
        terminal = _int_between(rng, (epsilon, 3 * epsilon))
        end = start + connected + gap_time + terminal
        gaps.append((start + connected + gap_time, end))
        ratio = connected / required
        return SessionRecord(
            requested_energy=requested,
            received_energy=requested * ratio,
            required_time=required,
            stay_time=connected,
            session_start=start,
            session_end=end,
            disconnections=tuple(gaps),
            success=False,
        )

    if pattern == 1:
        # Intermittent drops: the transfer completes but takes longer.
        count = int(rng.choice([1, 2, 3], p=[0.6, 0.3, 0.1]))
        durations = [_int_between(rng, (delta, epsilon - 1)) for _ in range(count)]
        gaps, gap_time = _interior_gaps(rng, start, required, durations)
        end = start + required + gap_time
        return SessionRecord(
            requested_energy=requested,
            received_energy=requested,
            required_time=required,
            stay_time=required,
            session_start=start,
            session_end=end,
            disconnections=tuple(gaps),
            success=True,
        )

    # Trailing drop: complete transfer, then a short benign gap at the end.
    trailing = _int_between(rng, (delta, max(delta, alpha - 1)))
    end = start + required + trailing
    return SessionRecord(
        requested_energy=requested,
        received_energy=requested,
        required_time=required,
        stay_time=required,
        session_start=start,
        session_end=end,
        disconnections=((start + required, end),),
        success=True,
    )


def _synthesize_history(
    rng: np.random.Generator,
    consumer_id: str,
    cfg: GeneratorConfig,
    disruption: DisruptionConfig,
) -> ConsumerHistory:
    count = _int_between(rng, cfg.history_sessions_per_consumer)
    session_rate, pattern_mix = _archetype(rng, cfg.disruption_rate)
    sessions = []
    cursor = 0
    for _ in range(count):
        session = _synthesize_session(rng, cursor, cfg, disruption, session_rate, pattern_mix)
        sessions.append(session)
        cursor = session.session_end + 3600
    return ConsumerHistory(consumer_id, tuple(sessions))


def request_count(cfg: GeneratorConfig, duration_min: int) -> int:
    """Deterministic request count for a window of the given length."""
    return max(1, round(cfg.requests_per_microcell_day * duration_min / _MINUTES_PER_DAY))


def generate_scenario(
    cfg: GeneratorConfig,
    disruption: DisruptionConfig = DisruptionConfig(),
    weights: tuple[float, float, float, float] = EQUAL_WEIGHTS,
) -> Scenario:
    """Generate one scenario; a fixed seed reproduces it byte for byte."""

    rng = np.random.default_rng(cfg.seed)
    duration_min = _int_between(rng, cfg.service_duration_min)
    start_min = int(rng.integers(0, _MINUTES_PER_DAY - duration_min + 1))
    provider_loc = (0.0, 0.0)
    service = EnergyService(
        service_id="svc-0001",
        provider_id="prov-0001",
        capacity_pct=_float_between(rng, cfg.provided_energy_pct),
        location=provider_loc,
        window_start=start_min * 60,
        window_end=(start_min + duration_min) * 60,
    )

    requests: list[EnergyRequest] = []
    histories: list[ConsumerHistory] = []
    battery: dict[str, float] = {}
    for i in range(request_count(cfg, duration_min)):
        consumer_id = f"cons-{i:04d}"
        req_dur = _int_between(
            rng,
            (
                min(cfg.request_duration_min[0], duration_min),
                min(cfg.request_duration_min[1], duration_min),
            ),
        )
        req_start = int(rng.integers(start_min, start_min + duration_min - req_dur + 1))
        requests.append(
            EnergyRequest(
                request_id=f"er-{i:04d}",
                consumer_id=consumer_id,
                requested_pct=_float_between(rng, cfg.requested_energy_pct),
                location=_disc_point(rng, provider_loc, cfg.microcell_radius_m),
                window_start=req_start * 60,
                window_end=(req_start + req_dur) * 60,
            )
        )
        histories.append(_synthesize_history(rng, consumer_id, cfg, disruption))
        battery[consumer_id] = _float_between(rng, cfg.battery_level_pct)

    metadata = {
        "generator": cfg.to_dict(),
        "archetype_rates": [COMMITTED_RATE, FLAKY_RATE],
        "battery_level_pct": battery,
    }
    return Scenario(
        service=service,
        requests=tuple(requests),
        histories=tuple(histories),
        disruption_config=disruption,
        weights=weights,
        metadata=metadata,
    )


def derive_seed(*parts: int) -> int:
    """Stable 64-bit seed derived from a tuple of integers."""
    return int(np.random.SeedSequence(list(parts)).generate_state(1, np.uint64)[0])


def generate_scenarios(
    cfg: GeneratorConfig,
    disruption: DisruptionConfig = DisruptionConfig(),
    weights: tuple[float, float, float, float] = EQUAL_WEIGHTS,
) -> Iterator[Scenario]:
    """Yield ``cfg.n_services`` scenarios with independent derived seeds."""
    for index in range(cfg.n_services):
        child = replace(cfg, seed=derive_seed(cfg.seed, index))
        yield generate_scenario(child, disruption, weights)


_CSV_COLUMNS = ("consumer_id", "date", "time", "location_x", "location_y", "shop_id")


def _parse_timestamp(date_text: str, time_text: str, line_no: int) -> int:
    for fmt in ("%Y-%m-%d %H:%M:%S", "%Y-%m-%d %H:%M"):
        try:
            stamp = datetime.strptime(f"{date_text} {time_text}", fmt)
            return int(stamp.replace(tzinfo=timezone.utc).timestamp())
        except ValueError:
            continue
    raise MalformedCSV(f"unparseable date/time {date_text!r} {time_text!r}", line_no)


def ingest_transactions(
    csv_path: str | Path,
    cfg: GeneratorConfig,
    disruption: DisruptionConfig = DisruptionConfig(),
    weights: tuple[float, float, float, float] = EQUAL_WEIGHTS,
) -> Scenario:
    """Build a scenario from transaction rows: the transaction time and place
    become each request's start and location, while every other quantity is
    drawn from the generator's distributions."""

    rng = np.random.default_rng(cfg.seed)
    rows: list[dict[str, str]] = []
    with open(csv_path, newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        header = reader.fieldnames or []
        missing = [col for col in _CSV_COLUMNS if col not in header]
        if missing and header:
            raise MalformedCSV(f"missing columns {missing}", 1)
        for line_no, row in enumerate(reader, start=2):
            if any(row.get(col) is None for col in _CSV_COLUMNS):
                raise MalformedCSV("wrong number of fields", line_no)
            rows.append({**row, "_line": str(line_no)})

    requests: list[EnergyRequest] = []
    starts: list[int] = []
    locations: list[tuple[float, float]] = []
    consumers: list[str] = []
    for index, row in enumerate(rows):
        line_no = int(row["_line"])
        start = _parse_timestamp(row["date"], row["time"], line_no)
        try:
            location = (float(row["location_x"]), float(row["location_y"]))
        except ValueError:
            raise MalformedCSV(
                f"non-numeric location ({row['location_x']!r}, {row['location_y']!r})", line_no
            ) from None
        duration = 60 * _int_between(rng, cfg.request_duration_min)
        requests.append(
            EnergyRequest(
                request_id=f"er-{index:05d}",
                consumer_id=row["consumer_id"],
                requested_pct=_float_between(rng, cfg.requested_energy_pct),
                location=location,
                window_start=start,
                window_end=start + duration,
            )
        )
        starts.append(start)
        locations.append(location)
        if row["consumer_id"] not in consumers:
            consumers.append(row["consumer_id"])

    duration_min = _int_between(rng, cfg.service_duration_min)
    if starts:
        window_start = min(starts) // 60 * 60
        center = (
            sum(x for x, _ in locations) / len(locations),
            sum(y for _, y in locations) / len(locations),
        )
    else:
        window_start = 0
        center = (0.0, 0.0)
    service = EnergyService(
        service_id="svc-0001",
        provider_id="prov-0001",
        capacity_pct=_float_between(rng, cfg.provided_energy_pct),
        location=center,
        window_start=window_start,
        window_end=window_start + duration_min * 60,
    )

    histories = []
    battery: dict[str, float] = {}
    for consumer_id in consumers:
        histories.append(_synthesize_history(rng, consumer_id, cfg, disruption))
        battery[consumer_id] = _float_between(rng, cfg.battery_level_pct)

    metadata = {
        "generator": cfg.to_dict(),
        "source_rows": len(rows),
        "battery_level_pct": battery,
    }
    return Scenario(
        service=service,
        requests=tuple(requests),
        histories=tuple(histories),
        disruption_config=disruption,
        weights=weights,
        metadata=metadata,
    )
