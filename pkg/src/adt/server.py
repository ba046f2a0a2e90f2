"""HTTP and WebSocket surface for dashboard clients.

Clients connect to `/ws/sessions/<id>`, receive a snapshot of the most
recent points per channel (frames tagged `"snapshot": true`), then a live
tail with no duplicates or gaps at the seam.  Any number of read-only
clients may watch one session; a client disconnecting (or sending garbage)
never affects the measure pipeline.
"""

from __future__ import annotations

import functools
import logging
import queue
from pathlib import Path

import anyio
from fastapi import FastAPI, HTTPException, WebSocket, WebSocketDisconnect

from .session import Session, SessionRegistry

log = logging.getLogger(__name__)

_POLL_S = 0.2


def create_app(registry: SessionRegistry, dashboard_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="gaze analytics dashboard feed")

    @app.get("/sessions")
    def list_sessions() -> list[dict]:
        out = []
        for sid in registry.ids():
            session = registry.get(sid)
            if session is None:
                continue
            out.append(
                {
                    "id": sid,
                    "users": list(session.cfg.user_ids),
                    "finished": session.finished,
                    "samples": session.sample_count(),
                }
            )
        return out

    @app.get("/sessions/{session_id}/summary")
    def session_summary(session_id: str) -> dict:
        session = registry.get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id!r}")
        return session.summary().to_dict()

    @app.post("/sessions/{session_id}/stop")
    def stop_session(session_id: str) -> dict:
        session = registry.get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id!r}")
        session.finish()
        return {"id": session_id, "finished": True}

    @app.websocket("/ws/sessions/{session_id}")
    async def session_stream(ws: WebSocket, session_id: str) -> None:
        session = registry.get(session_id)
        if session is None:
            # refuse before accepting; reason carried in the close frame
            await ws.close(code=1008, reason=f"unknown session {session_id!r}")
            return
        await ws.accept()
        q, snapshot = session.subscribe()
        try:
            for frame in snapshot:
                await ws.send_json(frame)
            async with anyio.create_task_group() as tg:
                tg.start_soon(_pump_points, ws, q, tg)
                tg.start_soon(_drain_client, ws, session_id, tg)
        except WebSocketDisconnect:
            pass
        finally:
            session.unsubscribe(q)

    if dashboard_dir is not None:
        from fastapi.staticfiles import StaticFiles

        root = Path(dashboard_dir)
        if not (root / "index.html").exists():
            raise FileNotFoundError(f"no index.html under {root}")
        app.mount("/", StaticFiles(directory=root, html=True), name="dashboard")

    return app


async def _pump_points(ws: WebSocket, q: queue.Queue, tg) -> None:
    get = functools.partial(q.get, timeout=_POLL_S)
    while True:
        try:
            frame = await anyio.to_thread.run_sync(get)
        except queue.Empty:
            continue
        try:
            await ws.send_json(frame)
        except (WebSocketDisconnect, RuntimeError):
            tg.cancel_scope.cancel()
            return


async def _drain_client(ws: WebSocket, session_id: str, tg) -> None:
    """Read and discard client messages; malformed input is only logged."""
    while True:
        try:
            message = await ws.receive_text()
        except (WebSocketDisconnect, RuntimeError):
            tg.cancel_scope.cancel()
            return
        log.warning("ignoring client message on %s: %.80r", session_id, message)
