"""WebSocket service streaming simulator state and accepting steering commands.

One session per connection: a reader task applies inbound command frames to
the session core while a paced loop ticks the simulator at the control rate
and pushes state frames. Frames are one JSON record each (see session module
for the schema).
"""

from __future__ import annotations

import asyncio
import json
from pathlib import Path

from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.staticfiles import StaticFiles

from .config import RobotConfig
from .session import TeleopSession, decode_frame, encode_frame

PROTOCOL_VERSION = 1


def build_app(cfg: RobotConfig, frontend_dir=None) -> FastAPI:
    app = FastAPI(title="seesim live session")

    @app.get("/healthz")
    def healthz():
        return {"status": "ok", "control_rate": cfg.control.control_rate}

    @app.websocket("/session")
    async def session_endpoint(ws: WebSocket):
        await ws.accept()
        session = TeleopSession(cfg)
        loop = asyncio.get_running_loop()
        start = loop.time()
        stop = asyncio.Event()

        async def reader():
            while not stop.is_set():
                try:
                    raw = await ws.receive_text()
                except WebSocketDisconnect:
                    stop.set()
                    return
                try:
                    msg = decode_frame(raw)
                except (ValueError, json.JSONDecodeError) as exc:
                    await ws.send_text(
                        encode_frame(
                            {"v": PROTOCOL_VERSION, "type": "error", "message": f"bad frame: {exc}"}
                        )
                    )
                    continue
                err = session.submit(msg, loop.time() - start)
                if err is not None:
                    await ws.send_text(encode_frame(err))

        reader_task = asyncio.create_task(reader())
        try:
            seq = 0
            while not stop.is_set():
                seq += 1
                deadline = start + seq / cfg.control.control_rate
                delay = deadline - loop.time()
                if delay > 0:
                    await asyncio.sleep(delay)
                frame = session.tick()
                await ws.send_text(encode_frame(frame))
                if frame["type"] == "fatal":
                    break
        except WebSocketDisconnect:
            pass
        finally:
            stop.set()
            reader_task.cancel()

    if frontend_dir is not None and Path(frontend_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(frontend_dir), html=True), name="ui")
    return app


def serve(cfg: RobotConfig, host: str = "127.0.0.1", port: int = 8710, frontend_dir=None) -> None:
    import uvicorn

    app = build_app(cfg, frontend_dir=frontend_dir)
    uvicorn.run(app, host=host, port=port, log_level="warning")
