import threading
import time

import pytest
from fastapi.testclient import TestClient

from adt.restream import focal_profile, generate_synthetic, merge_recordings
from adt.server import create_app
from adt.session import Session, SessionConfig, SessionRegistry, replay_recording


@pytest.fixture()
def setup():
    rec = merge_recordings(
        [
            generate_synthetic(focal_profile(seed=1), 12000.0, 30.0, user_id="alice"),
            generate_synthetic(focal_profile(seed=2), 12000.0, 30.0, user_id="bob"),
        ],
        session_id="duo",
    )
    registry = SessionRegistry()
    session = replay_recording(rec)
    registry.register(session)
    client = TestClient(create_app(registry))
    return registry, session, client, rec


class TestHttp:
    def test_list_sessions(self, setup):
        _, session, client, rec = setup
        resp = client.get("/sessions")
        assert resp.status_code == 200
        body = resp.json()
        assert body == [
            {
                "id": "duo",
                "users": ["alice", "bob"],
                "finished": True,
                "samples": len(rec.rows),
            }
        ]

    def test_summary(self, setup):
        _, session, client, _ = setup
        resp = client.get("/sessions/duo/summary")
        assert resp.status_code == 200
        body = resp.json()
        assert body["session_id"] == "duo"
        assert set(body["per_user_k"]) == {"alice", "bob"}

    def test_summary_unknown_404(self, setup):
        _, _, client, _ = setup
        assert client.get("/sessions/nope/summary").status_code == 404

    def test_stop(self, setup):
        registry, _, client, _ = setup
        cfg = SessionConfig(session_id="live", user_ids=("a",))
        registry.register(Session(cfg))
        resp = client.post("/sessions/live/stop")
        assert resp.status_code == 200
        assert registry.get("live").finished

    def test_stop_unknown_404(self, setup):
        _, _, client, _ = setup
        assert client.post("/sessions/nope/stop").status_code == 404


class TestWebSocket:
    def test_unknown_session_refused(self, setup):
        _, _, client, _ = setup
        from starlette.websockets import WebSocketDisconnect as ClientDisconnect

        with pytest.raises(ClientDisconnect) as exc:
            with client.websocket_connect("/ws/sessions/ghost"):
                pass
        assert exc.value.code == 1008

    def test_snapshot_matches_series_tail(self, setup):
        _, session, client, _ = setup
        series = session.series()
        expected = sum(min(len(v), 200) for v in series.values())
        with client.websocket_connect("/ws/sessions/duo") as ws:
            frames = [ws.receive_json() for _ in range(expected)]
        assert all(f.get("snapshot") for f in frames)
        by_chan = {}
        for f in frames:
            by_chan.setdefault(f["chan"], []).append((f["t"], f["v"]))
        for chan, pts in by_chan.items():
            tail = [(p.t, p.value) for p in series[chan][-200:]]
            assert pts == tail

    def test_snapshot_then_live_tail_no_dup_no_gap(self, setup):
        registry, _, client, _ = setup
        rec = merge_recordings(
            [generate_synthetic(focal_profile(seed=7), 9000.0, 30.0, user_id="a")],
            session_id="live2",
        )
        cfg = SessionConfig(session_id="live2", user_ids=("a",))
        session = Session(cfg)
        registry.register(session)
        # ingest half, publish stable prefix
        half = len(rec.rows) // 2
        for i, row in enumerate(rec.rows[:half]):
            session.ingest_envelope(row.to_envelope("live2"), recv_ms=float(i))
        session.advance()
        with client.websocket_connect("/ws/sessions/live2") as ws:
            pre = session.series()
            snapshot_n = sum(min(len(v), 200) for v in pre.values())
            frames = [ws.receive_json() for _ in range(snapshot_n)]
            assert all(f.get("snapshot") for f in frames)
            # finish the session while the client is connected
            for i, row in enumerate(rec.rows[half:]):
                session.ingest_envelope(row.to_envelope("live2"), recv_ms=float(i))
            session.finish()
            final = session.series()
            total = sum(len(v) for v in final.values())
            live_frames = [ws.receive_json() for _ in range(total - snapshot_n)]
        assert not any(f.get("snapshot") for f in live_frames)
        seen = {}
        for f in frames + live_frames:
            seen.setdefault(f["chan"], []).append((f["t"], f["v"]))
        for chan, pts in final.items():
            assert seen.get(chan, []) == [(p.t, p.value) for p in pts]

    def test_two_clients_identical_streams(self, setup):
        _, session, client, _ = setup
        with client.websocket_connect("/ws/sessions/duo") as w1:
            with client.websocket_connect("/ws/sessions/duo") as w2:
                n = sum(min(len(v), 200) for v in session.series().values())
                f1 = [w1.receive_json() for _ in range(n)]
                f2 = [w2.receive_json() for _ in range(n)]
        assert f1 == f2

    def test_malformed_client_message_ignored(self, setup):
        registry, _, client, _ = setup
        cfg = SessionConfig(session_id="robust", user_ids=("a",))
        session = Session(cfg)
        registry.register(session)
        rec = generate_synthetic(focal_profile(seed=3), 6000.0, 30.0, user_id="a")
        with client.websocket_connect("/ws/sessions/robust") as ws:
            ws.send_text("{not json at all")
            ws.send_text("PING")
            for i, row in enumerate(rec.rows):
                session.ingest_envelope(row.to_envelope("robust"), recv_ms=float(i))
            session.finish()
            total = sum(len(v) for v in session.series().values())
            frames = [ws.receive_json() for _ in range(total)]
        assert len(frames) == total

    def test_client_disconnect_leaves_pipeline_running(self, setup):
        registry, _, client, _ = setup
        cfg = SessionConfig(session_id="solo", user_ids=("a",))
        session = Session(cfg)
        registry.register(session)
        with client.websocket_connect("/ws/sessions/solo"):
            pass  # connect and immediately drop
        rec = generate_synthetic(focal_profile(seed=5), 5000.0, 30.0, user_id="a")
        for i, row in enumerate(rec.rows):
            session.ingest_envelope(row.to_envelope("solo"), recv_ms=float(i))
        session.finish()
        assert session.sample_count() == len(rec.rows)
        deadline = time.time() + 5.0
        while session._subscribers and time.time() < deadline:
            time.sleep(0.05)
        assert session._subscribers == []
