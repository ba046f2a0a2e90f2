"""Wire envelope codec, out-of-order recovery, clock offset and latency.

Senders wrap every gaze sample in a small JSON envelope carrying an origin
timestamp and a per-user sequence number.  The receiving side restores
per-user temporal order with a bounded reorder buffer, estimates the
sender/receiver clock offset from a four-timestamp exchange, and keeps
per-session latency statistics.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

WIRE_FIELDS = {
    "s": "session_id",
    "u": "user_id",
    "q": "seq",
    "t": "t_origin",
    "x": "x",
    "y": "y",
    "p": "pupil_diameter",
    "c": "confidence",
}


class DecodeError(ValueError):
    """A wire record that cannot be decoded; carries the offending field."""

    def __init__(self, field_name: str, reason: str):
        super().__init__(f"bad envelope field {field_name!r}: {reason}")
        self.field_name = field_name


@dataclass(frozen=True)
class Envelope:
    """One gaze sample as transmitted: identity, ordering, payload."""

    session_id: str
    user_id: str
    seq: int
    t_origin: float  # ms epoch on the sender clock
    x: float
    y: float
    pupil_diameter: float
    confidence: float


def encode_envelope(e: Envelope) -> bytes:
    record = {
        "s": e.session_id,
        "u": e.user_id,
        "q": e.seq,
        "t": e.t_origin,
        "x": e.x,
        "y": e.y,
        "p": e.pupil_diameter,
        "c": e.confidence,
    }
    try:
        return json.dumps(record, separators=(",", ":"), allow_nan=False).encode("utf-8")
    except ValueError as exc:
        raise ValueError(f"envelope has a non-finite field: {exc}") from exc


def decode_envelope(data: bytes | str) -> Envelope:
    """Parse a wire record; unknown fields are ignored, bad ones rejected."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        record = json.loads(data)
    except json.JSONDecodeError as exc:
        raise DecodeError("<record>", f"not valid JSON: {exc}") from exc
    if not isinstance(record, dict):
        raise DecodeError("<record>", "not a JSON object")

    values = {}
    for key, name in WIRE_FIELDS.items():
        if key not in record:
            raise DecodeError(name, "missing")
        raw = record[key]
        if key in ("s", "u"):
            if not isinstance(raw, str):
                raise DecodeError(name, f"expected string, got {type(raw).__name__}")
            values[name] = raw
        elif key == "q":
            if isinstance(raw, bool) or not isinstance(raw, int) or raw < 0:
                raise DecodeError(name, "expected non-negative integer")
            values[name] = raw
        else:
            if isinstance(raw, bool) or not isinstance(raw, (int, float)):
                raise DecodeError(name, f"expected number, got {type(raw).__name__}")
            num = float(raw)
            if not math.isfinite(num):
                raise DecodeError(name, "not finite")
            values[name] = num
    return Envelope(**values)


def gaze_topic(session_id: str, user_id: str) -> str:
    return f"adt/{session_id}/gaze/{user_id}"


def ctl_topic(session_id: str) -> str:
    return f"adt/{session_id}/ctl"


@dataclass(frozen=True)
class Notice:
    """An anomaly report from the reorder stage."""

    kind: str  # "gap" | "duplicate" | "late"
    user_id: str
    first_seq: int
    last_seq: int

    @property
    def seqs(self) -> range:
        return range(self.first_seq, self.last_seq + 1)


class ReorderBuffer:
    """Restores strictly increasing sequence order for one sender stream.

    An envelope is released when it carries the next expected sequence
    number, when the buffer grows to ``capacity``, or when ``max_wait_ms``
    has elapsed since the envelope after a hole arrived.  Skipping a hole
    produces a gap notice; late arrivals for skipped or already-released
    numbers are dropped with a notice, so every input is accounted for.
    """

    def __init__(
        self,
        user_id: str,
        first_seq: int = 1,
        capacity: int = 64,
        max_wait_ms: float = 500.0,
    ):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        if max_wait_ms <= 0:
            raise ValueError("max_wait_ms must be positive")
        self.user_id = user_id
        self.capacity = capacity
        self.max_wait_ms = max_wait_ms
        self._next = first_seq
        self._pending: dict[int, tuple[Envelope, float]] = {}
        self._skipped: set[int] = set()

    @property
    def next_seq(self) -> int:
        return self._next

    def push(
        self, env: Envelope, now_ms: float
    ) -> tuple[list[Envelope], list[Notice]]:
        notices: list[Notice] = []
        if env.seq < self._next:
            kind = "late" if env.seq in self._skipped else "duplicate"
            self._skipped.discard(env.seq)
            notices.append(Notice(kind, self.user_id, env.seq, env.seq))
            return [], notices
        if env.seq in self._pending:
            notices.append(Notice("duplicate", self.user_id, env.seq, env.seq))
            return [], notices
        self._pending[env.seq] = (env, now_ms)
        released = self._drain(notices, force_capacity=True)
        return released, notices

    def poll(self, now_ms: float) -> tuple[list[Envelope], list[Notice]]:
        """Release envelopes stuck behind a hole for longer than max_wait."""
        notices: list[Notice] = []
        released: list[Envelope] = []
        while self._pending:
            lowest = min(self._pending)
            if lowest == self._next:
                released.extend(self._drain(notices, force_capacity=True))
                continue
            arrival = self._pending[lowest][1]
            if now_ms - arrival < self.max_wait_ms:
                break
            self._skip_to(lowest, notices)
            released.extend(self._drain(notices, force_capacity=False))
        return released, notices

    def flush(self) -> tuple[list[Envelope], list[Notice]]:
        """Release everything left, in order, recording remaining gaps."""
        notices: list[Notice] = []
        released: list[Envelope] = []
        while self._pending:
            lowest = min(self._pending)
            if lowest != self._next:
                self._skip_to(lowest, notices)
            env, _ = self._pending.pop(lowest)
            released.append(env)
            self._next = lowest + 1
        return released, notices

    def pending_count(self) -> int:
        return len(self._pending)

    def _skip_to(self, seq: int, notices: list[Notice]) -> None:
        notices.append(Notice("gap", self.user_id, self._next, seq - 1))
        self._skipped.update(range(self._next, seq))
        self._next = seq

    def _drain(self, notices: list[Notice], force_capacity: bool) -> list[Envelope]:
        released: list[Envelope] = []
        while True:
            while self._next in self._pending:
                env, _ = self._pending.pop(self._next)
                released.append(env)
                self._next += 1
            if force_capacity and len(self._pending) >= self.capacity:
                self._skip_to(min(self._pending), notices)
                continue
            return released


class Reorderer:
    """Per-user reorder buffers behind a single push/poll interface."""

    def __init__(
        self, first_seq: int = 1, capacity: int = 64, max_wait_ms: float = 500.0
    ):
        self.first_seq = first_seq
        self.capacity = capacity
        self.max_wait_ms = max_wait_ms
        self._buffers: dict[str, ReorderBuffer] = {}

    def buffer_for(self, user_id: str) -> ReorderBuffer:
        buf = self._buffers.get(user_id)
        if buf is None:
            buf = ReorderBuffer(
                user_id, self.first_seq, self.capacity, self.max_wait_ms
            )
            self._buffers[user_id] = buf
        return buf

    def push(self, env: Envelope, now_ms: float):
        return self.buffer_for(env.user_id).push(env, now_ms)

    def poll(self, now_ms: float) -> tuple[list[Envelope], list[Notice]]:
        released: list[Envelope] = []
        notices: list[Notice] = []
        for buf in self._buffers.values():
            r, n = buf.poll(now_ms)
            released.extend(r)
            notices.extend(n)
        return released, notices

    def flush(self) -> tuple[list[Envelope], list[Notice]]:
        released: list[Envelope] = []
        notices: list[Notice] = []
        for buf in self._buffers.values():
            r, n = buf.flush()
            released.extend(r)
            notices.extend(n)
        return released, notices


def encode_syn(t1: float) -> bytes:
    """Sync request: client stamps its send time t1."""
    return json.dumps({"k": "syn", "t1": t1}, allow_nan=False).encode("utf-8")


def encode_ack(t1: float, t2: float, t3: float) -> bytes:
    """Sync reply: echoes t1, adds server receive (t2) and send (t3) stamps."""
    return json.dumps(
        {"k": "ack", "t1": t1, "t2": t2, "t3": t3}, allow_nan=False
    ).encode("utf-8")


def decode_sync(data: bytes | str) -> dict:
    """Parse a syn or ack control message; returns the field dict."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        record = json.loads(data)
    except json.JSONDecodeError as exc:
        raise DecodeError("<record>", f"not valid JSON: {exc}") from exc
    kind = record.get("k")
    if kind == "syn":
        wanted = ("t1",)
    elif kind == "ack":
        wanted = ("t1", "t2", "t3")
    else:
        raise DecodeError("k", f"unknown sync kind {kind!r}")
    out = {"k": kind}
    for name in wanted:
        raw = record.get(name)
        if isinstance(raw, bool) or not isinstance(raw, (int, float)):
            raise DecodeError(name, "expected number")
        value = float(raw)
        if not math.isfinite(value):
            raise DecodeError(name, "not finite")
        out[name] = value
    return out


def answer_syn(data: bytes | str, now_ms: float) -> bytes:
    """Build the ack for a received syn (t2 = t3 = receipt time here;
    callers that do work between receive and reply should stamp both)."""
    record = decode_sync(data)
    if record["k"] != "syn":
        raise DecodeError("k", "expected a syn message")
    return encode_ack(record["t1"], now_ms, now_ms)


def offset_from_ack(data: bytes | str, t4: float) -> ClockOffset:
    """Turn a received ack plus its local receipt time into an offset."""
    record = decode_sync(data)
    if record["k"] != "ack":
        raise DecodeError("k", "expected an ack message")
    return estimate_offset(record["t1"], record["t2"], record["t3"], t4)


def sync_via_broker(broker, session_id: str, clock=None) -> "ClockOffset":
    """Run one syn/ack exchange over a session's control topic.

    The processing host answers syn messages on the same topic (see
    Session.attach); with the in-process broker the reply arrives during
    publish, so this returns immediately.  Senders call it once at session
    start and apply the offset to their origin timestamps downstream.
    """
    import time as _time

    clock = clock or (lambda: _time.time() * 1000.0)
    topic = ctl_topic(session_id)
    replies: list[bytes] = []

    def on_ctl(_topic: str, payload: bytes) -> None:
        try:
            record = decode_sync(payload)
        except DecodeError:
            return
        if record["k"] == "ack":
            replies.append(payload)

    sub = broker.subscribe(topic, on_ctl)
    try:
        t1 = clock()
        broker.publish(topic, encode_syn(t1))
        if not replies:
            raise TimeoutError(f"no sync reply on {topic}")
        return offset_from_ack(replies[-1], t4=clock())
    finally:
        sub.cancel()


@dataclass(frozen=True)
class ClockOffset:
    """Additive correction: sender clock + offset = receiver clock."""

    offset_ms: float
    estimated_at: float


def estimate_offset(t1: float, t2: float, t3: float, t4: float) -> ClockOffset:
    """Four-timestamp exchange: request leaves at t1 (client), arrives t2
    (server), reply leaves t3 (server), arrives t4 (client).

    The estimate is exact for symmetric path delays; otherwise it is off by
    (forward - return) / 2.
    """
    if t4 < t1:
        raise ValueError("t4 must not precede t1 on the client clock")
    if t3 < t2:
        raise ValueError("t3 must not precede t2 on the server clock")
    offset = ((t2 - t1) + (t3 - t4)) / 2.0
    return ClockOffset(offset_ms=offset, estimated_at=t4)


@dataclass(frozen=True)
class LatencyStats:
    """Per-session transmission delay summary (population std)."""

    count: int
    mean_ms: float
    std_ms: float
    max_ms: float
    clamped_negative: int = 0

    def format_row(self) -> str:
        return f"{self.mean_ms:.0f} ± {self.std_ms:.0f} ms, max {self.max_ms:.0f} ms"


def latency_stats(pairs: Sequence[tuple[float, float]]) -> LatencyStats:
    """Summarize (origin-corrected send time, receive time) pairs.

    Negative deltas, which clock-offset error can produce, clamp to zero
    and are tallied separately.
    """
    if not pairs:
        raise ValueError("latency_stats requires at least one pair")
    clamped = 0
    deltas = []
    for t_origin, t_recv in pairs:
        d = t_recv - t_origin
        if d < 0:
            d = 0.0
            clamped += 1
        deltas.append(d)
    mean = sum(deltas) / len(deltas)
    var = sum((d - mean) ** 2 for d in deltas) / len(deltas)
    return LatencyStats(
        count=len(deltas),
        mean_ms=mean,
        std_ms=math.sqrt(var),
        max_ms=max(deltas),
        clamped_negative=clamped,
    )


class LatencyAccumulator:
    """Streaming collector for latency pairs, one per accepted envelope."""

    def __init__(self) -> None:
        self._pairs: list[tuple[float, float]] = []

    def record(self, t_origin_corrected: float, t_received: float) -> None:
        self._pairs.append((t_origin_corrected, t_received))

    def __len__(self) -> int:
        return len(self._pairs)

    def stats(self) -> LatencyStats | None:
        if not self._pairs:
            return None
        return latency_stats(self._pairs)
