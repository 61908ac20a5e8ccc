"""Websocket transport for live copilot sessions.

Three activities talk only through queues: the tick loop (sole owner of the
environment and session state), the websocket receive path (pushes the
freshest InputMsg into a size-1 slot), and the frame sender (bounded queue,
drop-oldest). One console at a time; disconnect pauses the environment and a
reconnect resumes the episode where it stopped.

Note: no postponed annotations here; FastAPI must resolve the WebSocket
annotation eagerly from this scope.
"""

import json
import logging
import queue
import threading
import time
from pathlib import Path

from guardrl.harness.config import RunConfig
from guardrl.server.protocol import PROTOCOL_VERSION
from guardrl.server.session import CopilotSession

log = logging.getLogger(__name__)


class SessionHub:
    """Shared state between the tick loop and the websocket endpoint."""

    def __init__(self, session: CopilotSession, tick_hz: float):
        self.session = session
        self.tick_hz = tick_hz
        self.input_slot: queue.Queue = queue.Queue(maxsize=1)
        self.frame_queue: queue.Queue = queue.Queue(maxsize=4)
        self.connected = threading.Event()
        self.stop = threading.Event()
        self.dropped_frames = 0
        self.jitter_max_s = 0.0

    def submit_input(self, msg: dict) -> None:
        try:
            self.input_slot.put_nowait(msg)
        except queue.Full:
            try:
                self.input_slot.get_nowait()
            except queue.Empty:
                pass
            self.input_slot.put_nowait(msg)

    def latest_input(self):
        try:
            return self.input_slot.get_nowait()
        except queue.Empty:
            return None

    def publish_frame(self, frame: dict) -> None:
        try:
            self.frame_queue.put_nowait(frame)
        except queue.Full:
            self.dropped_frames += 1
            try:
                self.frame_queue.get_nowait()
            except queue.Empty:
                pass
            self.frame_queue.put_nowait(frame)

    def tick_loop(self, max_ticks=None) -> None:
        period = 1.0 / self.tick_hz
        next_at = time.perf_counter()
        ticks = 0
        while not self.stop.is_set():
            if max_ticks is not None and ticks >= max_ticks:
                break
            self.session.paused = not self.connected.is_set()
            frame = self.session.tick(self.latest_input())
            self.publish_frame(frame)
            ticks += 1
            next_at += period
            now = time.perf_counter()
            lag = now - next_at
            if lag > 0:
                self.jitter_max_s = max(self.jitter_max_s, lag)
                next_at = now  # resynchronize rather than rushing
            else:
                time.sleep(-lag)
        self.session.close()


def make_app(hub: SessionHub):
    from fastapi import FastAPI, WebSocket, WebSocketDisconnect

    app = FastAPI(title="guardrl copilot server")

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket):
        await ws.accept()
        if hub.connected.is_set():
            await ws.send_text(json.dumps({"v": PROTOCOL_VERSION, "type": "bye", }))
            await ws.close()
            return
        try:
            hello = json.loads(await ws.receive_text())
            if hello.get("type") != "hello" or hello.get("v") != PROTOCOL_VERSION:
                await ws.close()
                return
        except (json.JSONDecodeError, WebSocketDisconnect):
            await ws.close()
            return
        hub.connected.set()
        log.info("console connected: %s", hello.get("client", "?"))

        import asyncio

        async def sender():
            while True:
                try:
                    frame = hub.frame_queue.get_nowait()
                except queue.Empty:
                    await asyncio.sleep(0.005)
                    continue
                await ws.send_text(json.dumps(frame, separators=(",", ":")))

        task = asyncio.create_task(sender())
        try:
            while True:
                raw = await ws.receive_text()
                try:
                    msg = json.loads(raw)
                except json.JSONDecodeError:
                    continue
                if msg.get("type") == "bye":
                    break
                if msg.get("type") == "input":
                    hub.submit_input(msg)
        except WebSocketDisconnect:
            pass
        finally:
            task.cancel()
            hub.connected.clear()
            log.info("console disconnected; environment paused")

    return app


def serve(cfg: RunConfig, out_dir, host: str = "127.0.0.1", port: int = 8700, tick_hz: float = 10.0):
    """Run a live session until interrupted; artifacts land in out_dir."""
    import uvicorn

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cfg.save(out / "config.json")
    session = CopilotSession(cfg, log_path=out / "session.jsonl", update_budget_s=0.02)
    hub = SessionHub(session, tick_hz)
    thread = threading.Thread(target=hub.tick_loop, daemon=True)
    thread.start()
    try:
        uvicorn.run(make_app(hub), host=host, port=port, log_level="warning")
    finally:
        hub.stop.set()
        thread.join(timeout=2.0)
        from guardrl.learner.core import save_learner

        save_learner(session.learner, out / "checkpoint.bin", cfg.config_hash(), meta={"mode": "live-session"})
        log.info("session saved to %s (max jitter %.3f s)", out, hub.jitter_max_s)
