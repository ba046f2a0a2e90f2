"""Gaze event detection and the windowed ambient/focal attention coefficient.

A stream of timestamped gaze samples from one user is segmented into
fixations and saccades with a dispersion-threshold pass.  Fixation/saccade
pairs that end inside a sliding time window are then z-scored against the
window's own statistics to produce the attention coefficient: positive
values read as focal behavior (long fixations, short saccades), negative
values as ambient scanning.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

#: Sign convention for the attention coefficient.  +1.0 keeps "positive =
#: focal (long fixations, short saccades)"; flip to -1.0 to report the
#: opposite orientation without touching any other code.
FOCAL_POSITIVE_SIGN = 1.0


class OrderingError(ValueError):
    """An input sequence violates its required time ordering."""


class EventKind(Enum):
    FIXATION = "fixation"
    SACCADE = "saccade"


@dataclass(frozen=True)
class GazeSample:
    """One timestamped gaze/pupil observation from a single user."""

    user_id: str
    seq: int
    t_origin: float  # ms since epoch, sender clock
    x: float
    y: float
    pupil_diameter: float
    confidence: float
    valid: bool = True

    def flagged(self, screen_width: float, screen_height: float) -> "GazeSample":
        """Return a copy with ``valid`` recomputed from screen bounds.

        Out-of-range or non-finite positions are flagged invalid, never
        dropped; downstream consumers decide how to treat them.
        """
        ok = (
            math.isfinite(self.x)
            and math.isfinite(self.y)
            and 0.0 <= self.x <= screen_width
            and 0.0 <= self.y <= screen_height
            and 0.0 <= self.confidence <= 1.0
        )
        if ok == self.valid:
            return self
        return GazeSample(
            user_id=self.user_id,
            seq=self.seq,
            t_origin=self.t_origin,
            x=self.x,
            y=self.y,
            pupil_diameter=self.pupil_diameter,
            confidence=self.confidence,
            valid=ok,
        )


@dataclass(frozen=True)
class GazeEvent:
    """A detected fixation (centroid, duration) or saccade (amplitude)."""

    kind: EventKind
    t_start: float
    t_end: float
    centroid_x: float | None = None  # fixations only
    centroid_y: float | None = None
    amplitude: float | None = None  # saccades only, px between centroids

    @property
    def duration(self) -> float:
        return self.t_end - self.t_start


@dataclass(frozen=True)
class DetectorConfig:
    """Dispersion-threshold (I-DT) segmentation parameters.

    Defaults suit a 1920x1080 desktop tracker sampled around 30 Hz:
    60 px dispersion is roughly one degree of visual angle on a 23.8"
    screen at typical viewing distance.
    """

    dispersion_threshold: float = 60.0  # px, (max x - min x) + (max y - min y)
    min_fixation_duration: float = 100.0  # ms
    max_gap: float = 75.0  # ms of tolerated invalid/missing samples inside a run

    def __post_init__(self) -> None:
        if self.dispersion_threshold <= 0:
            raise ValueError("dispersion_threshold must be positive")
        if self.min_fixation_duration <= 0:
            raise ValueError("min_fixation_duration must be positive")
        if self.max_gap <= 0:
            raise ValueError("max_gap must be positive")


@dataclass(frozen=True)
class KValue:
    """An attention-coefficient value for one window or one experiment."""

    t_window_end: float
    value: float
    n_pairs: int
    user_id: str | None = None  # None for group-scope values


def _check_time_ordered(times: Iterable[float], what: str) -> None:
    prev = None
    for i, t in enumerate(times):
        if prev is not None and t < prev:
            raise OrderingError(f"{what} not time-ordered at index {i}: {t} < {prev}")
        prev = t


def detect_events(
    samples: Sequence[GazeSample], cfg: DetectorConfig
) -> list[GazeEvent]:
    """Segment one user's time-ordered samples into fixations and saccades.

    A maximal run of valid samples whose bounding-box dispersion stays at or
    under the threshold, and whose span reaches the minimum duration, becomes
    a fixation (centroid = mean of member positions).  The interval between
    consecutive fixations becomes a saccade whose amplitude is the distance
    between their centroids.  Output alternates fixation/saccade and starts
    and ends with a fixation; leading/trailing unstable samples are dropped.
    """
    events, _ = detect_events_frontier(samples, cfg)
    return events


def detect_events_frontier(
    samples: Sequence[GazeSample], cfg: DetectorConfig
) -> tuple[list[GazeEvent], float]:
    """detect_events plus the time up to which its output is final.

    The returned frontier is the start of the earliest dispersion run that
    was cut short by the end of the data rather than by a threshold break.
    Events whose defining samples lie before the frontier cannot change when
    more samples arrive, so any analysis window closing at or before it can
    be published immediately on a live stream.
    """
    _check_time_ordered((s.t_origin for s in samples), "samples")
    valid = [s for s in samples if s.valid]
    if not valid:
        return [], float("-inf")

    runs: list[tuple[int, int]] = []  # inclusive index ranges into `valid`
    open_start: int | None = None
    i = 0
    n = len(valid)
    while i < n:
        min_x = max_x = valid[i].x
        min_y = max_y = valid[i].y
        j = i
        broke = False
        while j + 1 < n:
            nxt = valid[j + 1]
            if nxt.t_origin - valid[j].t_origin > cfg.max_gap:
                broke = True
                break
            lo_x, hi_x = min(min_x, nxt.x), max(max_x, nxt.x)
            lo_y, hi_y = min(min_y, nxt.y), max(max_y, nxt.y)
            if (hi_x - lo_x) + (hi_y - lo_y) > cfg.dispersion_threshold:
                broke = True
                break
            min_x, max_x, min_y, max_y = lo_x, hi_x, lo_y, hi_y
            j += 1
        if not broke and open_start is None:
            open_start = i
        if valid[j].t_origin - valid[i].t_origin >= cfg.min_fixation_duration:
            runs.append((i, j))
            i = j + 1
        else:
            i += 1
    frontier = valid[open_start].t_origin if open_start is not None else valid[-1].t_origin

    events: list[GazeEvent] = []
    prev_fix: GazeEvent | None = None
    for a, b in runs:
        members = valid[a : b + 1]
        cx = sum(s.x for s in members) / len(members)
        cy = sum(s.y for s in members) / len(members)
        fix = GazeEvent(
            kind=EventKind.FIXATION,
            t_start=members[0].t_origin,
            t_end=members[-1].t_origin,
            centroid_x=cx,
            centroid_y=cy,
        )
        if prev_fix is not None:
            events.append(
                GazeEvent(
                    kind=EventKind.SACCADE,
                    t_start=prev_fix.t_end,
                    t_end=fix.t_start,
                    amplitude=math.hypot(
                        fix.centroid_x - prev_fix.centroid_x,
                        fix.centroid_y - prev_fix.centroid_y,
                    ),
                )
            )
        events.append(fix)
        prev_fix = fix
    return events, frontier


def _pair_values(
    events: Sequence[GazeEvent], window_start: float, window_end: float
) -> list[tuple[float, float]]:
    """Collect (fixation duration, following-saccade amplitude) pairs.

    A pair belongs to the window only when both the fixation and the saccade
    that immediately follows it end inside [window_start, window_end).
    """
    _check_time_ordered((e.t_end for e in events), "events")
    pairs: list[tuple[float, float]] = []
    for k in range(len(events) - 1):
        ev, nxt = events[k], events[k + 1]
        if ev.kind is not EventKind.FIXATION or nxt.kind is not EventKind.SACCADE:
            continue
        if window_start <= ev.t_end < window_end and window_start <= nxt.t_end < window_end:
            pairs.append((ev.duration, float(nxt.amplitude)))
    return pairs


def _population_stats(values: Sequence[float]) -> tuple[float, float]:
    first = values[0]
    if all(v == first for v in values):
        # exact, so the sigma=0 convention fires even when a rounded mean
        # would leave a spurious ~1e-13 deviation
        return first, 0.0
    mu = sum(values) / len(values)
    var = sum((v - mu) ** 2 for v in values) / len(values)
    return mu, math.sqrt(var)


def _zscore(value: float, mu: float, sigma: float) -> float:
    if sigma == 0.0:
        return 0.0
    return (value - mu) / sigma


def window_k(
    events: Sequence[GazeEvent],
    window_start: float,
    window_end: float,
    user_id: str | None = None,
) -> KValue | None:
    """Attention coefficient for one time window, or None when under-filled.

    Each pair contributes z(duration) - z(amplitude), where the z-scores use
    the population mean/std of the pair durations and pair amplitudes in the
    window; a z term is 0 when its std is 0.  Fewer than two pairs yield
    None, distinguishing "no data" from "balanced attention".
    """
    if window_end <= window_start:
        raise ValueError("window must have positive length")
    pairs = _pair_values(events, window_start, window_end)
    if len(pairs) < 2:
        return None
    durations = [d for d, _ in pairs]
    amplitudes = [a for _, a in pairs]
    mu_d, sd_d = _population_stats(durations)
    mu_a, sd_a = _population_stats(amplitudes)
    total = 0.0
    for d, a in pairs:
        total += _zscore(d, mu_d, sd_d) - _zscore(a, mu_a, sd_a)
    value = FOCAL_POSITIVE_SIGN * total / len(pairs)
    return KValue(
        t_window_end=window_end, value=value, n_pairs=len(pairs), user_id=user_id
    )


def experiment_k(window_values: Sequence[KValue]) -> KValue | None:
    """Experiment-level coefficient: plain mean of the per-window values."""
    if not window_values:
        return None
    value = sum(v.value for v in window_values) / len(window_values)
    return KValue(
        t_window_end=max(v.t_window_end for v in window_values),
        value=value,
        n_pairs=sum(v.n_pairs for v in window_values),
        user_id=window_values[0].user_id,
    )


def group_k(user_values: Sequence[KValue]) -> KValue | None:
    """Group coefficient: unweighted mean across users, one value apiece."""
    if not user_values:
        return None
    seen: set[str] = set()
    for v in user_values:
        if v.user_id is None:
            raise ValueError("group_k inputs must carry a user_id")
        if v.user_id in seen:
            raise ValueError(f"duplicate user_id {v.user_id!r}")
        seen.add(v.user_id)
    value = sum(v.value for v in user_values) / len(user_values)
    return KValue(
        t_window_end=max(v.t_window_end for v in user_values),
        value=value,
        n_pairs=sum(v.n_pairs for v in user_values),
        user_id=None,
    )


@dataclass(frozen=True)
class TraditionalMeasures:
    """Per-window means of the classic positional measures."""

    mean_fixation_ms: float | None
    mean_saccade_ms: float | None
    mean_saccade_px: float | None

    def is_empty(self) -> bool:
        return (
            self.mean_fixation_ms is None
            and self.mean_saccade_ms is None
            and self.mean_saccade_px is None
        )

    def as_dict(self) -> dict[str, float]:
        out: dict[str, float] = {}
        if self.mean_fixation_ms is not None:
            out["fixation_ms"] = self.mean_fixation_ms
        if self.mean_saccade_ms is not None:
            out["saccade_ms"] = self.mean_saccade_ms
        if self.mean_saccade_px is not None:
            out["saccade_px"] = self.mean_saccade_px
        return out


def traditional_measures(
    events: Sequence[GazeEvent], window_start: float, window_end: float
) -> TraditionalMeasures:
    """Mean fixation duration, saccade duration and saccade amplitude.

    Averages run over events ending inside [window_start, window_end); a
    field is None when no event of that kind contributes.
    """
    _check_time_ordered((e.t_end for e in events), "events")
    fix_durs: list[float] = []
    sac_durs: list[float] = []
    sac_amps: list[float] = []
    for ev in events:
        if not (window_start <= ev.t_end < window_end):
            continue
        if ev.kind is EventKind.FIXATION:
            fix_durs.append(ev.duration)
        else:
            sac_durs.append(ev.duration)
            sac_amps.append(float(ev.amplitude))
    return TraditionalMeasures(
        mean_fixation_ms=sum(fix_durs) / len(fix_durs) if fix_durs else None,
        mean_saccade_ms=sum(sac_durs) / len(sac_durs) if sac_durs else None,
        mean_saccade_px=sum(sac_amps) / len(sac_amps) if sac_amps else None,
    )
