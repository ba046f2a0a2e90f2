"""Command-line entry points.

Subcommands: serve (HTTP/WS dashboard feed), restream (replay a recording
through the live pipeline with original pacing), simulate (synthetic
sessions), analyze (summaries + correlations), latency-report (measured
transport delay for a recording rerun).
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path


def _read_pairs_csv(path: str) -> list[tuple[float, float]]:
    pairs = []
    for line_no, line in enumerate(Path(path).read_text().splitlines(), 1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        parts = [p.strip() for p in stripped.split(",")]
        if len(parts) != 2:
            raise SystemExit(f"{path}:{line_no}: expected 'value,seconds'")
        try:
            pairs.append((float(parts[0]), float(parts[1])))
        except ValueError:
            if line_no == 1:
                continue  # tolerate a header row
            raise SystemExit(f"{path}:{line_no}: not numeric: {stripped!r}")
    return pairs


def _read_times_csv(path: str) -> dict[str, float]:
    times: dict[str, float] = {}
    for line_no, line in enumerate(Path(path).read_text().splitlines(), 1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        parts = [p.strip() for p in stripped.split(",")]
        if len(parts) != 2:
            raise SystemExit(f"{path}:{line_no}: expected 'session_id,seconds'")
        try:
            times[parts[0]] = float(parts[1])
        except ValueError:
            if line_no == 1:
                continue
            raise SystemExit(f"{path}:{line_no}: not numeric: {parts[1]!r}")
    return times


def _print_summaries(summaries) -> None:
    print(f"{'session':<20} {'group_k':>12} {'k_std':>10} {'group_ripa':>12} {'total_s':>9}")
    for s in summaries:
        gk = "-" if s.group_k is None else f"{s.group_k:.4f}"
        ks = "-" if s.k_std is None else f"{s.k_std:.4f}"
        gr = "-" if s.group_ripa is None else f"{s.group_ripa:.4f}"
        print(f"{s.session_id:<20} {gk:>12} {ks:>10} {gr:>12} {s.total_time_s:>9.1f}")


def cmd_analyze(args: argparse.Namespace) -> int:
    from .session import analyze_offline, pearson

    if args.pairs:
        pairs = _read_pairs_csv(args.pairs)
        if len(pairs) < 3:
            print("pearson_r=unavailable n=%d (need >= 3 pairs)" % len(pairs))
            return 1
        r = pearson([p[0] for p in pairs], [p[1] for p in pairs])
        print(f"pearson_r={r:.6f} n={len(pairs)}")
        return 0

    if not args.recordings:
        print("nothing to analyze: pass recordings or --pairs", file=sys.stderr)
        return 2
    from .restream import load_recording

    recs = [load_recording(p) for p in args.recordings]
    times = _read_times_csv(args.times) if args.times else None
    report = analyze_offline(recs, times)
    _print_summaries(report.summaries)
    if report.k_vs_time is not None:
        print(f"pearson_r_k_vs_time={report.k_vs_time.r:.6f} n={report.k_vs_time.n}")
    if report.ripa_vs_time is not None:
        print(
            f"pearson_r_ripa_vs_time={report.ripa_vs_time.r:.6f} n={report.ripa_vs_time.n}"
        )
    if report.note:
        print(report.note)
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    from .restream import (
        ambient_profile,
        focal_profile,
        generate_synthetic,
        merge_recordings,
        save_recording,
    )
    from .session import replay_recording

    profile_fn = focal_profile if args.behavior == "focal" else ambient_profile
    recs = [
        generate_synthetic(
            profile_fn(seed=args.seed + i),
            duration_ms=args.duration_s * 1000.0,
            rate=args.rate,
            user_id=f"u{i + 1}",
        )
        for i in range(args.users)
    ]
    session_id = f"sim-{args.behavior}-{args.seed}"
    rec = merge_recordings(recs, session_id=session_id) if len(recs) > 1 else recs[0]
    rec.session_id = session_id
    if args.out:
        save_recording(rec, args.out)
        print(f"wrote {len(rec.rows)} rows to {args.out}")
    session = replay_recording(rec)
    _print_summaries([session.summary()])
    return 0


def _sync_clocks(session, rec) -> None:
    """One sync exchange per session start: recording timeline vs wall clock.

    The restreamed rows keep their original origin timestamps (so measure
    windows replay exactly); the offset makes receive-side latency
    accounting read against the replay start instead of a historical epoch.
    """
    from .transport import estimate_offset

    if not rec.rows:
        return
    t0 = rec.rows[0].t
    wall = time.time() * 1000.0
    offset = estimate_offset(t0, wall, wall, t0)
    for user in rec.user_ids:
        session.set_clock_offset(user, offset)


def cmd_restream(args: argparse.Namespace) -> int:
    from .pubsub import Broker
    from .restream import load_recording, restream
    from .session import Session, SessionConfig
    from .transport import encode_envelope, gaze_topic

    rec = load_recording(args.recording)
    session_id = args.session or rec.session_id
    rec.session_id = session_id
    if args.user and len(rec.user_ids) == 1:
        old = rec.user_ids[0]
        rec.user_ids = [args.user]
        rec.rows = [
            type(r)(r.t, args.user, r.seq, r.x, r.y, r.pupil, r.confidence)
            for r in rec.rows
        ]
        print(f"restreaming {old!r} as {args.user!r}")
    cfg = SessionConfig(session_id=session_id, user_ids=tuple(rec.user_ids)).for_recording(rec)
    broker = Broker()
    session = Session(cfg)
    session.attach(broker)
    _sync_clocks(session, rec)

    def sink(row):
        broker.publish(
            gaze_topic(session_id, row.user_id),
            encode_envelope(row.to_envelope(session_id)),
        )

    report = restream(rec, sink, speed=args.speed, tick_ms=args.tick_ms)
    session.finish()
    print(
        f"emitted {report.rows_emitted} rows in {report.wall_ms / 1000.0:.2f} s "
        f"(speed {args.speed:g})"
    )
    _print_summaries([session.summary()])
    return 0


def cmd_latency_report(args: argparse.Namespace) -> int:
    from .pubsub import Broker
    from .restream import load_recording, restream
    from .session import Session, SessionConfig
    from .transport import encode_envelope, gaze_topic

    rec = load_recording(args.recording)
    if not rec.rows:
        print("recording has no rows", file=sys.stderr)
        return 2
    cfg = SessionConfig(
        session_id=rec.session_id, user_ids=tuple(rec.user_ids)
    ).for_recording(rec)
    broker = Broker()
    session = Session(cfg)
    session.attach(broker)

    t0 = rec.rows[0].t
    start_wall = time.time() * 1000.0

    def sink(row):
        env = row.to_envelope(rec.session_id)
        # stamp origination at the rebased acquisition time, as a live
        # sender would; receive-side latency then measures scheduling lag
        # plus transport overhead
        rebased = type(env)(
            env.session_id,
            env.user_id,
            env.seq,
            start_wall + (row.t - t0) / args.speed,
            env.x,
            env.y,
            env.pupil_diameter,
            env.confidence,
        )
        broker.publish(gaze_topic(rec.session_id, row.user_id), encode_envelope(rebased))

    restream(rec, sink, speed=args.speed, tick_ms=args.tick_ms)
    session.finish()
    stats = session.summary().latency
    if stats is None:
        print("no latency data collected", file=sys.stderr)
        return 2
    print(f"samples: {stats.count}")
    print(f"latency: {stats.format_row()}")
    if stats.clamped_negative:
        print(f"warning: {stats.clamped_negative} negative deltas clamped to 0")
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import threading

    import uvicorn

    from .pubsub import Broker
    from .restream import load_recording, restream
    from .server import create_app
    from .session import MeasurePump, Session, SessionConfig, SessionRegistry
    from .transport import encode_envelope, gaze_topic

    cfg = SessionConfig.from_file(args.config)
    registry = SessionRegistry()
    broker = Broker()
    session = Session(cfg)
    session.attach(broker)
    registry.register(session)
    pump = MeasurePump(session)
    pump.start()

    def run_restream(path: str) -> None:
        rec = load_recording(path)
        _sync_clocks(session, rec)

        def sink(row):
            broker.publish(
                gaze_topic(cfg.session_id, row.user_id),
                encode_envelope(row.to_envelope(cfg.session_id)),
            )

        report = restream(rec, sink, speed=args.speed, tick_ms=args.tick_ms)
        print(f"restream of {path} done: {report.rows_emitted} rows")

    for path in args.restream or []:
        threading.Thread(target=run_restream, args=(path,), daemon=True).start()

    app = create_app(registry, dashboard_dir=args.dashboard)
    print(f"session {cfg.session_id!r} with users {', '.join(cfg.user_ids)}")
    if args.dashboard:
        print(f"dashboard UI: http://{args.host}:{args.port}/")
    print(f"dashboard feed: ws://{args.host}:{args.port}/ws/sessions/{cfg.session_id}")
    try:
        uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    finally:
        pump.stop()
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="adt", description="distributed gaze analytics toolkit"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("serve", help="run the dashboard feed server")
    p.add_argument("--config", required=True, help="session config file")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument(
        "--restream",
        action="append",
        metavar="REC",
        help="recording to restream into the session (repeatable)",
    )
    p.add_argument("--speed", type=float, default=1.0)
    p.add_argument("--tick-ms", type=float, default=50.0)
    p.add_argument(
        "--dashboard",
        help="directory with the built dashboard (index.html + dist/)",
    )
    p.set_defaults(fn=cmd_serve)

    p = sub.add_parser("restream", help="replay a recording through the pipeline")
    p.add_argument("recording")
    p.add_argument("--session", help="override session id")
    p.add_argument("--user", help="override user id (single-user recordings)")
    p.add_argument("--speed", type=float, default=1.0)
    p.add_argument("--tick-ms", type=float, default=50.0)
    p.set_defaults(fn=cmd_restream)

    p = sub.add_parser("simulate", help="run synthetic sessions")
    p.add_argument("--users", type=int, default=1)
    p.add_argument("--behavior", choices=("ambient", "focal"), default="focal")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--duration-s", type=float, default=60.0)
    p.add_argument("--rate", type=float, default=30.0)
    p.add_argument("--out", help="write the generated recording here")
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("analyze", help="summaries and correlations")
    p.add_argument("recordings", nargs="*", help="recording files")
    p.add_argument("--times", help="CSV of session_id,seconds")
    p.add_argument(
        "--pairs",
        help="CSV of value,seconds pairs; correlate directly without recordings",
    )
    p.set_defaults(fn=cmd_analyze)

    p = sub.add_parser("latency-report", help="measured delay for a recording rerun")
    p.add_argument("recording")
    p.add_argument("--speed", type=float, default=10.0)
    p.add_argument("--tick-ms", type=float, default=50.0)
    p.set_defaults(fn=cmd_latency_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
