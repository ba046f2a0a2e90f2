"""Session orchestration: ingest, windowed measures, persistence, analysis.

A session owns one reorder buffer per user, turns the ordered envelope
streams into per-user and group measure series on a window grid keyed to
origin timestamps (so arrival jitter can never move a value between
windows), records every accepted sample, broadcasts new measure points to
any number of dashboard subscribers, and summarizes itself for offline
comparison across sessions.
"""

from __future__ import annotations

import math
import queue
import threading
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Iterable, Mapping, Sequence

from .measures import (
    DetectorConfig,
    GazeSample,
    KValue,
    detect_events_frontier,
    experiment_k,
    group_k,
    traditional_measures,
    window_k,
)
from .pubsub import Broker, Subscription
from .restream import RecordingRow, SessionRecording, save_recording
from .ripa import RipaConfig, RipaValue, group_ripa, preprocess_pupil, ripa_window
from .transport import (
    ClockOffset,
    Envelope,
    LatencyAccumulator,
    LatencyStats,
    Notice,
    Reorderer,
    answer_syn,
    ctl_topic,
    decode_envelope,
    decode_sync,
    gaze_topic,
)

K_GROUP_CHANNEL = "k.group"
RIPA_GROUP_CHANNEL = "ripa.group"
SNAPSHOT_DEPTH = 200


def k_channel(user_id: str) -> str:
    return f"k.user.{user_id}"


def ripa_channel(user_id: str) -> str:
    return f"ripa.user.{user_id}"


def trad_channel(user_id: str) -> str:
    return f"trad.user.{user_id}"


@dataclass(frozen=True)
class MeasurePoint:
    """One timestamped measure value on a named channel.

    ``value`` is a float for the coefficient/index channels, a small dict
    for the traditional channel, and None for a data-gap window (rendered
    as a chart break, never as a zero).
    """

    channel: str
    t: float
    value: float | dict | None

    def to_wire(self, snapshot: bool = False) -> dict:
        msg: dict = {"chan": self.channel, "t": self.t, "v": self.value}
        if snapshot:
            msg["snapshot"] = True
        return msg


@dataclass(frozen=True)
class SessionConfig:
    session_id: str
    user_ids: tuple[str, ...]
    screen_width: int = 1920
    screen_height: int = 1080
    nominal_rate: float = 30.0
    k_window_ms: float = 3000.0
    k_stride_ms: float = 300.0
    detector: DetectorConfig = field(default_factory=DetectorConfig)
    ripa: RipaConfig = field(default_factory=RipaConfig)
    chart_update_s: float = 1.0
    reorder_capacity: int = 64
    reorder_max_wait_ms: float = 500.0

    def __post_init__(self) -> None:
        if not self.user_ids:
            raise ValueError("session needs at least one user")
        if len(set(self.user_ids)) != len(self.user_ids):
            raise ValueError("duplicate user ids")
        if self.k_window_ms <= 0 or self.k_stride_ms <= 0:
            raise ValueError("window and stride must be positive")
        if self.k_stride_ms > self.k_window_ms:
            raise ValueError("k_stride_ms must not exceed k_window_ms")
        if self.nominal_rate <= 0 or self.chart_update_s <= 0:
            raise ValueError("rates must be positive")

    def channels(self) -> list[str]:
        out: list[str] = []
        for u in self.user_ids:
            out.extend((trad_channel(u), k_channel(u), ripa_channel(u)))
        out.extend((K_GROUP_CHANNEL, RIPA_GROUP_CHANNEL))
        return out

    @classmethod
    def from_mapping(cls, raw: Mapping[str, str]) -> "SessionConfig":
        """Build a config from flat key/value text (see from_file)."""
        def get(key: str, default):
            if key not in raw:
                return default
            kind = type(default)
            if kind is float:
                return float(raw[key])
            if kind is int:
                return int(raw[key])
            return raw[key]

        users = tuple(
            u.strip() for u in raw.get("users", "u1").split(",") if u.strip()
        )
        detector = DetectorConfig(
            dispersion_threshold=float(raw.get("detector.dispersion_px", 60.0)),
            min_fixation_duration=float(raw.get("detector.min_fixation_ms", 100.0)),
            max_gap=float(raw.get("detector.max_gap_ms", 75.0)),
        )
        ripa = RipaConfig(
            low_filter=(
                int(raw.get("ripa.low_m", 7)),
                int(raw.get("ripa.low_n", 2)),
            ),
            high_filter=(
                int(raw.get("ripa.high_m", 2)),
                int(raw.get("ripa.high_n", 2)),
            ),
            lam=float(raw.get("ripa.lambda", 1.0)),
            window_samples=int(raw.get("ripa.window_samples", raw.get("rate", 30))),
            epsilon=float(raw.get("ripa.epsilon", 1e-9)),
            confidence_min=float(raw.get("ripa.confidence_min", 0.5)),
            max_interp_gap=int(raw.get("ripa.max_interp_gap", 6)),
        )
        return cls(
            session_id=get("session_id", "session"),
            user_ids=users,
            screen_width=get("screen_width", 1920),
            screen_height=get("screen_height", 1080),
            nominal_rate=get("rate", 30.0),
            k_window_ms=get("k_window_ms", 3000.0),
            k_stride_ms=get("k_stride_ms", 300.0),
            detector=detector,
            ripa=ripa,
            chart_update_s=get("chart_update_s", 1.0),
            reorder_capacity=get("reorder_capacity", 64),
            reorder_max_wait_ms=get("reorder_max_wait_ms", 500.0),
        )

    @classmethod
    def from_file(cls, path: str | Path) -> "SessionConfig":
        """Parse `key = value` lines; `#` starts a comment."""
        raw: dict[str, str] = {}
        for line_no, line in enumerate(Path(path).read_text().splitlines(), 1):
            stripped = line.split("#", 1)[0].strip()
            if not stripped:
                continue
            if "=" not in stripped:
                raise ValueError(f"{path}:{line_no}: expected 'key = value'")
            key, value = stripped.split("=", 1)
            raw[key.strip()] = value.strip()
        return cls.from_mapping(raw)

    def for_recording(self, rec: SessionRecording) -> "SessionConfig":
        """Derive a config matching a recording's metadata."""
        ripa = self.ripa
        if int(rec.nominal_rate) != ripa.window_samples:
            ripa = replace(ripa, window_samples=max(int(rec.nominal_rate), 15))
        return replace(
            self,
            session_id=rec.session_id,
            user_ids=tuple(rec.user_ids),
            screen_width=rec.screen_width,
            screen_height=rec.screen_height,
            nominal_rate=rec.nominal_rate,
            ripa=ripa,
        )


def compute_series(
    cfg: SessionConfig, samples_by_user: Mapping[str, Sequence[GazeSample]]
) -> dict[str, list[MeasurePoint]]:
    """Pure, deterministic measure computation over ordered sample streams.

    Window boundaries depend only on the earliest accepted origin timestamp
    and the config; identical data always yields bit-identical series no
    matter how delivery was timed.
    """
    series: dict[str, list[MeasurePoint]] = {c: [] for c in cfg.channels()}
    users = [u for u in cfg.user_ids if samples_by_user.get(u)]
    if not users:
        return series
    t0 = min(samples_by_user[u][0].t_origin for u in users)
    t_last = max(samples_by_user[u][-1].t_origin for u in users)

    events = {
        u: detect_events_frontier(samples_by_user[u], cfg.detector)[0] for u in users
    }

    end = t0 + cfg.k_window_ms
    while end <= t_last:
        start = end - cfg.k_window_ms
        present: list[KValue] = []
        for u in users:
            kv = window_k(events[u], start, end, user_id=u)
            series[k_channel(u)].append(
                MeasurePoint(k_channel(u), end, kv.value if kv else None)
            )
            if kv is not None:
                present.append(kv)
            tm = traditional_measures(events[u], start, end)
            series[trad_channel(u)].append(
                MeasurePoint(trad_channel(u), end, tm.as_dict() or None)
            )
        gk = group_k(present) if present else None
        series[K_GROUP_CHANNEL].append(
            MeasurePoint(K_GROUP_CHANNEL, end, gk.value if gk else None)
        )
        end += cfg.k_stride_ms

    f = cfg.ripa.window_samples
    period = 1000.0 / cfg.nominal_rate
    segments = {u: preprocess_pupil(samples_by_user[u], cfg.ripa) for u in users}
    window_count = {u: len(samples_by_user[u]) // f for u in users}
    for j in range(max(window_count.values())):
        t_point = t0 + (j + 1) * f * period
        present_r: list[RipaValue] = []
        for u in users:
            if j >= window_count[u]:
                continue
            lo, hi = j * f, (j + 1) * f
            seg = next((s for s in segments[u] if s.covers(lo, hi)), None)
            if seg is None:
                value = None
            else:
                value = ripa_window(seg.values[lo - seg.start : hi - seg.start], cfg.ripa)
                present_r.append(RipaValue(t_point, value, u))
            series[ripa_channel(u)].append(
                MeasurePoint(ripa_channel(u), t_point, value)
            )
        gr = group_ripa(present_r) if present_r else None
        series[RIPA_GROUP_CHANNEL].append(
            MeasurePoint(RIPA_GROUP_CHANNEL, t_point, gr.value if gr else None)
        )
    return series


@dataclass
class SessionSummary:
    """Per-session aggregate row for cross-session comparison."""

    session_id: str
    per_user_k: dict[str, float | None]
    group_k: float | None  # mean across users of their experiment-level K
    k_std: float | None  # population std of all windowed K values
    per_user_ripa: dict[str, float | None]
    group_ripa: float | None
    total_time_s: float
    n_samples: int
    latency: LatencyStats | None = None

    def to_dict(self) -> dict:
        return {
            "session_id": self.session_id,
            "per_user_k": self.per_user_k,
            "group_k": self.group_k,
            "k_std": self.k_std,
            "per_user_ripa": self.per_user_ripa,
            "group_ripa": self.group_ripa,
            "total_time_s": self.total_time_s,
            "n_samples": self.n_samples,
            "latency": None
            if self.latency is None
            else {
                "count": self.latency.count,
                "mean_ms": self.latency.mean_ms,
                "std_ms": self.latency.std_ms,
                "max_ms": self.latency.max_ms,
            },
        }


def _now_ms() -> float:
    return time.time() * 1000.0


class Session:
    """One live or replayed session: ingest, series, broadcast, summary."""

    def __init__(self, cfg: SessionConfig):
        self.cfg = cfg
        self._lock = threading.RLock()
        self._reorderer = Reorderer(
            capacity=cfg.reorder_capacity, max_wait_ms=cfg.reorder_max_wait_ms
        )
        self._samples: dict[str, list[GazeSample]] = {u: [] for u in cfg.user_ids}
        self._offsets: dict[str, float] = {}
        self._latency = LatencyAccumulator()
        self._notices: list[Notice] = []
        self._warnings: list[str] = []
        self._published: dict[str, list[MeasurePoint]] = {c: [] for c in cfg.channels()}
        self._subscribers: list[queue.Queue] = []
        self._broker: Broker | None = None
        self._broker_subs: list[Subscription] = []
        self.finished = False

    # -- ingest ----------------------------------------------------------

    def attach(self, broker: Broker) -> None:
        """Join an in-process broker: consume this session's gaze topics
        and answer clock-sync requests on the control topic."""
        self._broker = broker
        self._broker_subs.append(
            broker.subscribe(gaze_topic(self.cfg.session_id, "+"), self._on_message)
        )
        self._broker_subs.append(
            broker.subscribe(ctl_topic(self.cfg.session_id), self._on_ctl)
        )

    def detach(self) -> None:
        for sub in self._broker_subs:
            sub.cancel()
        self._broker_subs.clear()
        self._broker = None

    def _on_ctl(self, topic: str, payload: bytes) -> None:
        try:
            record = decode_sync(payload)
        except ValueError as exc:
            with self._lock:
                self._warnings.append(f"bad control message on {topic}: {exc}")
            return
        if record["k"] != "syn" or self._broker is None:
            return  # acks and other control chatter are not ours to answer
        self._broker.publish(topic, answer_syn(payload, _now_ms()))

    def _on_message(self, topic: str, payload: bytes) -> None:
        try:
            env = decode_envelope(payload)
        except ValueError as exc:
            with self._lock:
                self._warnings.append(f"undecodable message on {topic}: {exc}")
            return
        self.ingest_envelope(env)

    def set_clock_offset(self, user_id: str, offset: ClockOffset) -> None:
        with self._lock:
            self._offsets[user_id] = offset.offset_ms

    def ingest_envelope(self, env: Envelope, recv_ms: float | None = None) -> None:
        """Feed one envelope through reorder and into the sample streams."""
        recv = _now_ms() if recv_ms is None else recv_ms
        with self._lock:
            if self.finished:
                self._warnings.append(f"envelope after finish from {env.user_id!r}")
                return
            if env.user_id not in self._samples:
                self._warnings.append(f"unknown user {env.user_id!r}; sample ignored")
                return
            released, notices = self._reorderer.push(env, recv)
            self._notices.extend(notices)
            self._accept(released, recv)

    def poll(self, now_ms: float | None = None) -> None:
        """Give stalled reorder buffers a chance to skip over holes."""
        now = _now_ms() if now_ms is None else now_ms
        with self._lock:
            released, notices = self._reorderer.poll(now)
            self._notices.extend(notices)
            self._accept(released, now)

    def _accept(self, envelopes: Iterable[Envelope], recv_ms: float) -> None:
        for env in envelopes:
            sample = GazeSample(
                user_id=env.user_id,
                seq=env.seq,
                t_origin=env.t_origin,
                x=env.x,
                y=env.y,
                pupil_diameter=env.pupil_diameter,
                confidence=env.confidence,
            ).flagged(self.cfg.screen_width, self.cfg.screen_height)
            self._samples[env.user_id].append(sample)
            offset = self._offsets.get(env.user_id, 0.0)
            self._latency.record(env.t_origin + offset, recv_ms)

    # -- publishing ------------------------------------------------------

    def advance(self) -> int:
        """Publish every measure point that can no longer change.

        A user window is final once the event detector's stability frontier
        passes its end (coefficient and traditional channels) or once enough
        samples exist that pupil interpolation is settled (index channel);
        group points wait for every configured user.  Returns the number of
        points published.
        """
        with self._lock:
            if not all(self._samples[u] for u in self.cfg.user_ids):
                return 0  # window grid anchors on the earliest first sample
            series = compute_series(self.cfg, self._samples)
            frontiers = {
                u: detect_events_frontier(self._samples[u], self.cfg.detector)[1]
                for u in self.cfg.user_ids
            }
            limits: dict[str, float | int] = {}
            f = self.cfg.ripa.window_samples
            guard = self.cfg.ripa.max_interp_gap + 1
            ripa_final = {
                u: max(0, (len(self._samples[u]) - guard) // f)
                for u in self.cfg.user_ids
            }
            for u in self.cfg.user_ids:
                limits[k_channel(u)] = frontiers[u]
                limits[trad_channel(u)] = frontiers[u]
                limits[ripa_channel(u)] = ripa_final[u]
            limits[K_GROUP_CHANNEL] = min(frontiers.values())
            limits[RIPA_GROUP_CHANNEL] = min(ripa_final.values())
            return self._publish(series, limits)

    def finish(self) -> None:
        """Flush reorder buffers and publish the complete series."""
        with self._lock:
            if self.finished:
                return
            released, notices = self._reorderer.flush()
            self._notices.extend(notices)
            self._accept(released, _now_ms())
            series = compute_series(self.cfg, self._samples)
            self._publish(series, limits=None)
            self.finished = True

    def _publish(
        self,
        series: Mapping[str, list[MeasurePoint]],
        limits: Mapping[str, float | int] | None,
    ) -> int:
        sent = 0
        for channel, points in series.items():
            done = self._published[channel]
            for point in points[len(done) :]:
                if limits is not None:
                    limit = limits[channel]
                    if channel.startswith("ripa"):
                        # limit counts final windows for index channels
                        if len(done) >= int(limit):
                            break
                    elif point.t > limit:
                        break
                done.append(point)
                sent += 1
                wire = point.to_wire()
                for q in list(self._subscribers):
                    q.put(wire)
        return sent

    # -- consumption -----------------------------------------------------

    def subscribe(self) -> tuple[queue.Queue, list[dict]]:
        """Register a dashboard client; returns (live queue, snapshot).

        The snapshot holds the most recent points per channel, and the queue
        receives everything published afterwards: no duplicates, no gaps.
        """
        with self._lock:
            snapshot = [
                p.to_wire(snapshot=True)
                for points in self._published.values()
                for p in points[-SNAPSHOT_DEPTH:]
            ]
            q: queue.Queue = queue.Queue()
            self._subscribers.append(q)
            return q, snapshot

    def unsubscribe(self, q: queue.Queue) -> None:
        with self._lock:
            try:
                self._subscribers.remove(q)
            except ValueError:
                pass

    def series(self) -> dict[str, list[MeasurePoint]]:
        with self._lock:
            return {c: list(points) for c, points in self._published.items()}

    def notices(self) -> list[Notice]:
        with self._lock:
            return list(self._notices)

    def warnings(self) -> list[str]:
        with self._lock:
            return list(self._warnings)

    def sample_count(self) -> int:
        with self._lock:
            return sum(len(v) for v in self._samples.values())

    # -- outputs ----------------------------------------------------------

    def recording(self) -> SessionRecording:
        """Accepted samples as a persistable recording (time-major order)."""
        with self._lock:
            rows = [
                RecordingRow(
                    t=s.t_origin,
                    user_id=s.user_id,
                    seq=s.seq,
                    x=s.x,
                    y=s.y,
                    pupil=s.pupil_diameter,
                    confidence=s.confidence,
                )
                for u in self.cfg.user_ids
                for s in self._samples[u]
            ]
            rows.sort(key=lambda r: (r.t, r.user_id, r.seq))
            return SessionRecording(
                session_id=self.cfg.session_id,
                screen_width=self.cfg.screen_width,
                screen_height=self.cfg.screen_height,
                nominal_rate=self.cfg.nominal_rate,
                user_ids=list(self.cfg.user_ids),
                rows=rows,
            )

    def persist(self, path: str | Path) -> None:
        try:
            save_recording(self.recording(), path)
        except OSError as exc:
            raise RuntimeError(f"cannot persist session to {path}: {exc}") from exc

    def summary(self) -> SessionSummary:
        with self._lock:
            if not self.finished:
                series = compute_series(self.cfg, self._samples)
            else:
                series = self._published
            per_user_k: dict[str, float | None] = {}
            per_user_ripa: dict[str, float | None] = {}
            k_values: list[KValue] = []
            all_window_k: list[float] = []
            ripa_values: list[RipaValue] = []
            for u in self.cfg.user_ids:
                windows = [
                    KValue(p.t, p.value, 0, u)
                    for p in series.get(k_channel(u), [])
                    if p.value is not None
                ]
                all_window_k.extend(w.value for w in windows)
                exp = experiment_k(windows)
                per_user_k[u] = exp.value if exp else None
                if exp is not None:
                    k_values.append(exp)
                rips = [
                    RipaValue(p.t, p.value, u)
                    for p in series.get(ripa_channel(u), [])
                    if p.value is not None
                ]
                if rips:
                    mean_r = sum(r.value for r in rips) / len(rips)
                    per_user_ripa[u] = mean_r
                    ripa_values.append(RipaValue(rips[-1].t_window_end, mean_r, u))
                else:
                    per_user_ripa[u] = None
            gk = group_k(k_values) if k_values else None
            gr = group_ripa(ripa_values) if ripa_values else None
            if all_window_k:
                mu = sum(all_window_k) / len(all_window_k)
                k_std = math.sqrt(
                    sum((v - mu) ** 2 for v in all_window_k) / len(all_window_k)
                )
            else:
                k_std = None
            t_bounds = [
                (s[0].t_origin, s[-1].t_origin)
                for s in self._samples.values()
                if s
            ]
            total_s = (
                (max(b for _, b in t_bounds) - min(a for a, _ in t_bounds)) / 1000.0
                if t_bounds
                else 0.0
            )
            return SessionSummary(
                session_id=self.cfg.session_id,
                per_user_k=per_user_k,
                group_k=gk.value if gk else None,
                k_std=k_std,
                per_user_ripa=per_user_ripa,
                group_ripa=gr.value if gr else None,
                total_time_s=total_s,
                n_samples=sum(len(v) for v in self._samples.values()),
                latency=self._latency.stats(),
            )


class MeasurePump(threading.Thread):
    """Drives a live session: periodic reorder polls and point publishing."""

    def __init__(self, session: Session, interval_s: float | None = None):
        super().__init__(daemon=True)
        self.session = session
        self.interval_s = interval_s or session.cfg.chart_update_s
        self._stop = threading.Event()

    def run(self) -> None:
        while not self._stop.wait(self.interval_s):
            self.session.poll()
            self.session.advance()

    def stop(self) -> None:
        self._stop.set()
        self.join(timeout=5.0)


def replay_recording(
    rec: SessionRecording,
    cfg: SessionConfig | None = None,
    arrival_delay: Callable[[int, RecordingRow], float] | None = None,
) -> Session:
    """Feed a recording through a fresh session pipeline without pacing.

    ``arrival_delay`` simulates network jitter: rows are delivered in order
    of (row time + delay) instead of recording order, exercising the reorder
    path while measure values stay pinned to origin timestamps.
    """
    if cfg is None:
        cfg = SessionConfig(
            session_id=rec.session_id, user_ids=tuple(rec.user_ids)
        ).for_recording(rec)
    session = Session(cfg)
    order = list(range(len(rec.rows)))
    if arrival_delay is not None:
        arrivals = [
            (rec.rows[i].t + arrival_delay(i, rec.rows[i]), i) for i in order
        ]
        arrivals.sort()
        order = [i for _, i in arrivals]
    for pos, i in enumerate(order):
        session.ingest_envelope(
            rec.rows[i].to_envelope(cfg.session_id), recv_ms=float(pos)
        )
    session.finish()
    return session


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    """Product-moment correlation; needs n >= 3 and variance on both sides."""
    if len(x) != len(y):
        raise ValueError(f"length mismatch: {len(x)} vs {len(y)}")
    if len(x) < 3:
        raise ValueError("need at least 3 points")
    n = len(x)
    mx = sum(x) / n
    my = sum(y) / n
    sxx = sum((a - mx) ** 2 for a in x)
    syy = sum((b - my) ** 2 for b in y)
    if sxx == 0.0 or syy == 0.0:
        raise ValueError("undefined correlation: zero variance")
    sxy = sum((a - mx) * (b - my) for a, b in zip(x, y))
    return sxy / math.sqrt(sxx * syy)


@dataclass(frozen=True)
class CorrelationResult:
    r: float
    n: int


@dataclass
class OfflineReport:
    summaries: list[SessionSummary]
    k_vs_time: CorrelationResult | None
    ripa_vs_time: CorrelationResult | None
    note: str | None = None


def analyze_offline(
    recordings: Sequence[SessionRecording],
    completion_times_s: Mapping[str, float] | None = None,
) -> OfflineReport:
    """Summarize each recording and correlate group measures with times.

    Completion time defaults to the recording span.  Correlations need at
    least three sessions with defined values; with fewer, summaries are
    still produced and the correlations are marked unavailable.
    """
    summaries: list[SessionSummary] = []
    for rec in recordings:
        session = replay_recording(rec)
        summary = session.summary()
        if completion_times_s and rec.session_id in completion_times_s:
            summary.total_time_s = completion_times_s[rec.session_id]
        summaries.append(summary)

    def correlate(pairs: list[tuple[float, float]]) -> CorrelationResult | None:
        if len(pairs) < 3:
            return None
        xs = [p[0] for p in pairs]
        ys = [p[1] for p in pairs]
        try:
            return CorrelationResult(r=pearson(xs, ys), n=len(pairs))
        except ValueError:
            return None

    k_pairs = [
        (s.group_k, s.total_time_s) for s in summaries if s.group_k is not None
    ]
    r_pairs = [
        (s.group_ripa, s.total_time_s) for s in summaries if s.group_ripa is not None
    ]
    k_corr = correlate(k_pairs)
    r_corr = correlate(r_pairs)
    note = None
    if k_corr is None or r_corr is None:
        note = "correlation unavailable: need at least 3 sessions with values"
    return OfflineReport(
        summaries=summaries, k_vs_time=k_corr, ripa_vs_time=r_corr, note=note
    )


class SessionRegistry:
    """Thread-safe name -> session map shared by server and CLI."""

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._sessions: dict[str, Session] = {}

    def register(self, session: Session) -> None:
        with self._lock:
            sid = session.cfg.session_id
            if sid in self._sessions:
                raise ValueError(f"session {sid!r} already registered")
            self._sessions[sid] = session

    def get(self, session_id: str) -> Session | None:
        with self._lock:
            return self._sessions.get(session_id)

    def ids(self) -> list[str]:
        with self._lock:
            return sorted(self._sessions)
