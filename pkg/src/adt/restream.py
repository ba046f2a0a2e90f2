"""Session recordings: persistence, timed replay, and synthetic traces.

A recording is an append-only, time-ordered log of gaze/pupil rows plus a
metadata header.  Replay ("restreaming") re-emits rows against a wall
clock so a recorded session drives the live pipeline exactly like a real
acquisition: a row with timestamp t is due once t <= t0 + elapsed * speed,
is never emitted early, and lands within one scheduler tick of due time.
"""

from __future__ import annotations

import json
import math
import random
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, IO, Iterable, Sequence

from .transport import Envelope


class RecordingError(ValueError):
    """A malformed or inconsistent recording; carries the line number."""

    def __init__(self, line_no: int, reason: str):
        super().__init__(f"line {line_no}: {reason}")
        self.line_no = line_no


@dataclass(frozen=True)
class RecordingRow:
    t: float  # ms, non-decreasing across the file, strictly increasing per user
    user_id: str
    seq: int
    x: float
    y: float
    pupil: float
    confidence: float

    def to_envelope(self, session_id: str) -> Envelope:
        return Envelope(
            session_id=session_id,
            user_id=self.user_id,
            seq=self.seq,
            t_origin=self.t,
            x=self.x,
            y=self.y,
            pupil_diameter=self.pupil,
            confidence=self.confidence,
        )


@dataclass
class SessionRecording:
    session_id: str
    screen_width: int
    screen_height: int
    nominal_rate: float
    user_ids: list[str]
    rows: list[RecordingRow] = field(default_factory=list)

    @property
    def span_ms(self) -> float:
        if not self.rows:
            return 0.0
        return self.rows[-1].t - self.rows[0].t

    def envelopes(self) -> list[Envelope]:
        return [r.to_envelope(self.session_id) for r in self.rows]


_ROW_KEYS = ("t", "u", "q", "x", "y", "p", "c")


def load_recording(source: str | Path | IO[str]) -> SessionRecording:
    """Parse and validate a JSONL recording.

    The first line must be the metadata header; every later line is a row.
    Ordering violations (global t decreasing, per-user t or seq not strictly
    increasing) are reported with their line number.
    """
    if hasattr(source, "read"):
        lines = source.read().splitlines()
        name = getattr(source, "name", "<stream>")
    else:
        path = Path(source)
        lines = path.read_text(encoding="utf-8").splitlines()
        name = str(path)

    if not lines:
        raise RecordingError(1, f"{name}: empty file, metadata header required")

    def parse(line_no: int, line: str) -> dict:
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise RecordingError(line_no, f"not valid JSON: {exc.msg}") from exc
        if not isinstance(obj, dict):
            raise RecordingError(line_no, "expected a JSON object")
        return obj

    meta = parse(1, lines[0])
    if meta.get("kind") != "meta":
        raise RecordingError(1, "first line must be the metadata header")
    try:
        rec = SessionRecording(
            session_id=str(meta["s"]),
            screen_width=int(meta["w"]),
            screen_height=int(meta["h"]),
            nominal_rate=float(meta["rate"]),
            user_ids=[str(u) for u in meta["users"]],
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise RecordingError(1, f"bad metadata header: {exc!r}") from exc

    last_t_global: float | None = None
    last_per_user: dict[str, tuple[float, int]] = {}
    for line_no, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        obj = parse(line_no, line)
        if obj.get("kind") != "row":
            raise RecordingError(line_no, f"unexpected kind {obj.get('kind')!r}")
        missing = [k for k in _ROW_KEYS if k not in obj]
        if missing:
            raise RecordingError(line_no, f"missing row fields {missing}")
        try:
            row = RecordingRow(
                t=float(obj["t"]),
                user_id=str(obj["u"]),
                seq=int(obj["q"]),
                x=float(obj["x"]),
                y=float(obj["y"]),
                pupil=float(obj["p"]),
                confidence=float(obj["c"]),
            )
        except (TypeError, ValueError) as exc:
            raise RecordingError(line_no, f"bad row value: {exc!r}") from exc
        if not all(
            math.isfinite(v) for v in (row.t, row.x, row.y, row.pupil, row.confidence)
        ):
            raise RecordingError(line_no, "non-finite row value")
        if last_t_global is not None and row.t < last_t_global:
            raise RecordingError(line_no, f"timestamp regression: {row.t} < {last_t_global}")
        last_t_global = row.t
        prev = last_per_user.get(row.user_id)
        if prev is not None:
            if row.t <= prev[0]:
                raise RecordingError(
                    line_no, f"per-user timestamp not strictly increasing for {row.user_id!r}"
                )
            if row.seq <= prev[1]:
                raise RecordingError(
                    line_no, f"per-user seq regression for {row.user_id!r}: {row.seq} <= {prev[1]}"
                )
        last_per_user[row.user_id] = (row.t, row.seq)
        rec.rows.append(row)
    return rec


def save_recording(rec: SessionRecording, target: str | Path | IO[str]) -> None:
    """Write the JSONL form: metadata header, then one row per line."""
    meta = {
        "kind": "meta",
        "s": rec.session_id,
        "w": rec.screen_width,
        "h": rec.screen_height,
        "rate": rec.nominal_rate,
        "users": rec.user_ids,
    }
    own = not hasattr(target, "write")
    out = open(target, "w", encoding="utf-8") if own else target
    try:
        out.write(json.dumps(meta, separators=(",", ":")) + "\n")
        for r in rec.rows:
            obj = {
                "kind": "row",
                "t": r.t,
                "u": r.user_id,
                "q": r.seq,
                "x": r.x,
                "y": r.y,
                "p": r.pupil,
                "c": r.confidence,
            }
            out.write(json.dumps(obj, separators=(",", ":")) + "\n")
    finally:
        if own:
            out.close()


@dataclass(frozen=True)
class RestreamReport:
    rows_emitted: int
    wall_ms: float
    #: scheduler clock read (ms since start) at which each row was emitted
    emission_wall_ms: list[float] = field(default_factory=list)


def restream(
    rec: SessionRecording,
    sink: Callable[[RecordingRow], None],
    speed: float = 1.0,
    tick_ms: float = 50.0,
    clock: Callable[[], float] | None = None,
    sleep: Callable[[float], None] | None = None,
) -> RestreamReport:
    """Replay a recording into ``sink`` with original (speed-scaled) pacing.

    Every tick, all not-yet-emitted rows whose timestamp satisfies
    t <= t0 + elapsed * speed go out in recording order.  Between ticks the
    scheduler also wakes exactly at the next row's due time, so emissions
    never precede and closely trail their due times.  The report carries
    the clock reads used for each emission so callers can audit timing.
    """
    if speed <= 0:
        raise ValueError("speed must be positive")
    if tick_ms <= 0:
        raise ValueError("tick must be positive")
    clock = clock or time.monotonic
    sleep = sleep or time.sleep

    if not rec.rows:
        return RestreamReport(rows_emitted=0, wall_ms=0.0)

    t0 = rec.rows[0].t
    start = clock()
    emissions: list[float] = []
    idx = 0
    n = len(rec.rows)
    while idx < n:
        elapsed_ms = (clock() - start) * 1000.0
        frontier = t0 + elapsed_ms * speed
        while idx < n and rec.rows[idx].t <= frontier:
            sink(rec.rows[idx])
            emissions.append(elapsed_ms)
            idx += 1
        if idx >= n:
            break
        next_due_ms = (rec.rows[idx].t - t0) / speed
        next_tick_ms = (math.floor(elapsed_ms / tick_ms) + 1) * tick_ms
        target_ms = min(next_tick_ms, next_due_ms)
        # floor the wait so float rounding in the due computation can never
        # produce a zero-length sleep and stall the loop
        sleep(max((target_ms - elapsed_ms) / 1000.0, 1e-4))
    wall_ms = (clock() - start) * 1000.0
    return RestreamReport(rows_emitted=n, wall_ms=wall_ms, emission_wall_ms=emissions)


@dataclass(frozen=True)
class BehaviorProfile:
    """Parameters for a deterministic synthetic gaze/pupil trace.

    Ambient profiles skew toward short fixations and long saccades, focal
    profiles the reverse; the pupil track adds a profile-dependent
    low-frequency oscillation on top of a fixed high-frequency ripple.
    """

    kind: str  # "ambient" | "focal"
    fixation_duration_range: tuple[float, float]  # ms
    saccade_amplitude_range: tuple[float, float]  # px
    jitter_px: float
    seed: int
    pupil_low_amplitude: float = 0.1  # mm, low-frequency oscillation
    pupil_high_amplitude: float = 0.02

    def __post_init__(self) -> None:
        if self.kind not in ("ambient", "focal"):
            raise ValueError(f"unknown behavior kind {self.kind!r}")
        lo, hi = self.fixation_duration_range
        if not 0 < lo <= hi:
            raise ValueError("fixation_duration_range must be positive and ordered")
        lo, hi = self.saccade_amplitude_range
        if not 0 < lo <= hi:
            raise ValueError("saccade_amplitude_range must be positive and ordered")


def ambient_profile(seed: int = 0) -> BehaviorProfile:
    return BehaviorProfile(
        kind="ambient",
        fixation_duration_range=(150.0, 350.0),
        saccade_amplitude_range=(300.0, 900.0),
        jitter_px=4.0,
        seed=seed,
        pupil_low_amplitude=0.08,
    )


def focal_profile(seed: int = 0) -> BehaviorProfile:
    return BehaviorProfile(
        kind="focal",
        fixation_duration_range=(600.0, 1200.0),
        saccade_amplitude_range=(40.0, 120.0),
        jitter_px=4.0,
        seed=seed,
        pupil_low_amplitude=0.25,
    )


_PUPIL_BASELINE_MM = 3.5
_PUPIL_LOW_HZ = 0.8
_PUPIL_HIGH_HZ = 6.0
_SCREEN_MARGIN_PX = 60.0


def generate_synthetic(
    profile: BehaviorProfile,
    duration_ms: float,
    rate: float,
    user_id: str = "u1",
    session_id: str | None = None,
    screen: tuple[int, int] = (1920, 1080),
) -> SessionRecording:
    """Deterministic alternating fixation/saccade trace with a pupil track.

    The same profile (including seed) always yields a bit-identical
    recording, which makes synthetic sessions reproducible test vehicles.
    """
    if duration_ms <= 0 or rate <= 0:
        raise ValueError("duration and rate must be positive")
    rng = random.Random(f"{profile.kind}:{profile.seed}")
    width, height = screen
    dt = 1000.0 / rate
    rows: list[RecordingRow] = []

    x = rng.uniform(_SCREEN_MARGIN_PX, width - _SCREEN_MARGIN_PX)
    y = rng.uniform(_SCREEN_MARGIN_PX, height - _SCREEN_MARGIN_PX)
    t = 0.0
    seq = 1

    def emit(px: float, py: float) -> None:
        nonlocal t, seq
        ts = t / 1000.0
        pupil = (
            _PUPIL_BASELINE_MM
            + profile.pupil_low_amplitude * math.sin(2 * math.pi * _PUPIL_LOW_HZ * ts)
            + profile.pupil_high_amplitude * math.sin(2 * math.pi * _PUPIL_HIGH_HZ * ts)
            + rng.gauss(0.0, 0.005)
        )
        rows.append(
            RecordingRow(
                t=t,
                user_id=user_id,
                seq=seq,
                x=min(max(px, 0.0), float(width)),
                y=min(max(py, 0.0), float(height)),
                pupil=pupil,
                confidence=0.9 + rng.uniform(0.0, 0.1),
            )
        )
        seq += 1
        t += dt

    while t < duration_ms:
        fix_end = t + rng.uniform(*profile.fixation_duration_range)
        while t < min(fix_end, duration_ms):
            emit(x + rng.gauss(0, profile.jitter_px), y + rng.gauss(0, profile.jitter_px))
        if t >= duration_ms:
            break
        amplitude = rng.uniform(*profile.saccade_amplitude_range)
        target_x = target_y = None
        for _ in range(40):
            angle = rng.uniform(0.0, 2 * math.pi)
            cand_x = x + amplitude * math.cos(angle)
            cand_y = y + amplitude * math.sin(angle)
            if (
                _SCREEN_MARGIN_PX <= cand_x <= width - _SCREEN_MARGIN_PX
                and _SCREEN_MARGIN_PX <= cand_y <= height - _SCREEN_MARGIN_PX
            ):
                target_x, target_y = cand_x, cand_y
                break
        if target_x is None:  # cornered; fall back to the screen center
            target_x, target_y = width / 2.0, height / 2.0
        sac_dur = 20.0 + 0.05 * amplitude
        sac_start = t
        sac_end = t + sac_dur
        while t < min(sac_end, duration_ms):
            frac = (t - sac_start) / sac_dur
            emit(x + (target_x - x) * frac, y + (target_y - y) * frac)
        x, y = target_x, target_y

    sid = session_id or f"sim-{profile.kind}-{profile.seed}"
    return SessionRecording(
        session_id=sid,
        screen_width=width,
        screen_height=height,
        nominal_rate=rate,
        user_ids=[user_id],
        rows=rows,
    )


def merge_recordings(
    recordings: Sequence[SessionRecording], session_id: str
) -> SessionRecording:
    """Interleave several single-user recordings into one multi-user log."""
    if not recordings:
        raise ValueError("need at least one recording")
    base = recordings[0]
    users: list[str] = []
    for rec in recordings:
        for u in rec.user_ids:
            if u in users:
                raise ValueError(f"duplicate user {u!r} across recordings")
            users.append(u)
    rows = sorted(
        (r for rec in recordings for r in rec.rows),
        key=lambda r: (r.t, r.user_id, r.seq),
    )
    return SessionRecording(
        session_id=session_id,
        screen_width=base.screen_width,
        screen_height=base.screen_height,
        nominal_rate=base.nominal_rate,
        user_ids=users,
        rows=rows,
    )
