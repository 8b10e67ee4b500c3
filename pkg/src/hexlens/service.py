"""HTTP + WebSocket session service for interactive inspection.

Endpoints:
  POST /sessions                  create a session from a mesh file,
                                  synthetic spec, or inline mesh text
  GET  /sessions/{id}/lod         edge line sets per LoD level (JSON)
  POST /sessions/{id}/render      render request -> PNG bytes
  POST /sessions/{id}/pick        anchor an object lens at the surface
                                  point under a pixel
  WS   /sessions/{id}/stream      parameter deltas in, frames out
                                  (latest-request-wins per session)

WebSocket frames: a JSON text metadata message followed by a binary
message of a 16-byte header (frame id u64 LE, payload length u64 LE)
plus the PNG payload.
"""
from __future__ import annotations

import asyncio
import io
import json
import logging
import struct
import threading
import uuid
from dataclasses import dataclass, field

from fastapi import FastAPI, HTTPException, WebSocket, WebSocketDisconnect
from fastapi.responses import Response
from PIL import Image

from .mesh import MeshError
from .meshio import MeshFormatError, load_mesh
from .render import Camera, CapacityError, LensState, RenderParams, render
from .render.params import ParamError
from .render.pick import make_object_lens
from .session import MeshBundle, build_bundle, load_source

logger = logging.getLogger("hexlens.service")

MAX_UPLOAD_BYTES = 512 * 1024 * 1024
FRAME_HEADER = struct.Struct("<QQ")


@dataclass
class Session:
    id: str
    bundle: MeshBundle
    params: RenderParams
    lens: LensState
    camera: Camera
    lock: threading.Lock = field(default_factory=threading.Lock)
    frame_counter: int = 0

    def apply_delta(self, delta: dict) -> None:
        """Atomically merge a partial params/lens/camera update."""
        with self.lock:
            if "params" in delta:
                merged = self.params.to_json()
                merged.update(delta["params"])
                self.params = RenderParams.from_json(merged)
            if "lens" in delta:
                merged = self.lens.to_json()
                merged.update(delta["lens"])
                self.lens = LensState.from_json(merged)
            if "camera" in delta:
                merged = self.camera.to_json()
                merged.update(delta["camera"])
                self.camera = Camera.from_json(merged)

    def snapshot(self) -> tuple[RenderParams, LensState, Camera]:
        with self.lock:
            return self.params, self.lens, self.camera

    def next_frame_id(self, request_id: int | None = None) -> int:
        with self.lock:
            base = self.frame_counter
            if request_id is not None:
                base = max(base, int(request_id))
            self.frame_counter = base + 1
            return self.frame_counter


def encode_png(result) -> bytes:
    buf = io.BytesIO()
    Image.fromarray(result.to_uint8(), mode="RGBA").save(buf, format="PNG")
    return buf.getvalue()


def create_app() -> FastAPI:
    app = FastAPI(title="hexlens inspector service")
    sessions: dict[str, Session] = {}
    app.state.sessions = sessions

    def get_session(session_id: str) -> Session:
        session = sessions.get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id!r}")
        return session

    @app.post("/sessions")
    def create_session(body: dict):
        metric = body.get("metric", "scaled-jacobian")
        try:
            if "mesh_text" in body:
                text = body["mesh_text"]
                if len(text) > MAX_UPLOAD_BYTES:
                    raise HTTPException(status_code=400, detail="mesh upload too large")
                mesh = load_mesh(io.BytesIO(text.encode()), fmt=body.get("format"))
            elif "source" in body:
                mesh = load_source(body["source"])
            else:
                raise HTTPException(status_code=400, detail="need 'source' or 'mesh_text'")
            bundle = build_bundle(mesh, metric)
        except (MeshError, MeshFormatError, FileNotFoundError, KeyError, ValueError) as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        session = Session(
            id=uuid.uuid4().hex,
            bundle=bundle,
            params=RenderParams(),
            lens=LensState(),
            camera=bundle.default_camera(),
        )
        sessions[session.id] = session
        return {
            "session_id": session.id,
            "mesh": bundle.summary(),
            "lod": bundle.lod_summary(),
            "params": session.params.to_json(),
            "lens": session.lens.to_json(),
            "camera": session.camera.to_json(),
        }

    @app.get("/sessions/{session_id}/lod")
    def get_lod(session_id: str):
        session = get_session(session_id)
        return session.bundle.lod_lines()

    @app.post("/sessions/{session_id}/render")
    def render_once(session_id: str, body: dict | None = None):
        session = get_session(session_id)
        body = body or {}
        try:
            session.apply_delta(body)
        except (ParamError, ValueError, TypeError) as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        params, lens, camera = session.snapshot()
        try:
            result = render(session.bundle.scene, camera=camera, params=params, lens=lens)
        except CapacityError as exc:
            raise HTTPException(
                status_code=507,
                detail={"error": str(exc), "required_capacity": exc.required},
            )
        frame_id = session.next_frame_id(body.get("frame_id"))
        timings = result.stats["timings_s"]
        return Response(
            content=encode_png(result),
            media_type="image/png",
            headers={
                "X-Frame-Id": str(body.get("frame_id", frame_id)),
                "X-Timing-Raster": str(timings["raster"]),
                "X-Timing-Composite": str(timings["composite"]),
            },
        )

    @app.post("/sessions/{session_id}/pick")
    def pick(session_id: str, body: dict):
        """Pick the nearest boundary surface point under a pixel and
        anchor an object-space lens there; {"hit": false} on a miss."""
        session = get_session(session_id)
        try:
            px = float(body["px"])
            py = float(body["py"])
            width = int(body.get("width", session.params.width))
            height = int(body.get("height", session.params.height))
            world_radius = float(body.get("world_radius", session.lens.world_radius))
            depth = float(body.get("depth", 0.0))
        except (KeyError, TypeError, ValueError) as exc:
            raise HTTPException(status_code=400, detail=f"bad pick request: {exc}")
        _, _, camera = session.snapshot()
        lens = make_object_lens(
            session.bundle.scene, camera, px, py, width, height,
            world_radius=world_radius, depth=depth,
        )
        if lens is None:
            return {"hit": False, "lens": session.lens.to_json()}
        with session.lock:
            session.lens = lens
        return {"hit": True, "lens": lens.to_json()}

    @app.websocket("/sessions/{session_id}/stream")
    async def stream(ws: WebSocket, session_id: str):
        session = sessions.get(session_id)
        if session is None:
            await ws.close(code=4404)
            return
        await ws.accept()
        wake = asyncio.Event()
        latest_request: dict = {"id": None}
        stopped = {"flag": False}
        wake.set()          # render one initial frame on connect

        async def reader():
            try:
                while True:
                    msg = await ws.receive_text()
                    try:
                        delta = json.loads(msg)
                        if not isinstance(delta, dict):
                            raise ValueError("delta must be a JSON object")
                        session.apply_delta(delta)
                    except (ValueError, TypeError, ParamError) as exc:
                        logger.warning("malformed stream payload: %s", exc)
                        await ws.send_text(json.dumps({"type": "error", "error": str(exc)}))
                        continue
                    if "request_id" in delta:
                        latest_request["id"] = delta["request_id"]
                    wake.set()
            except WebSocketDisconnect:
                pass
            finally:
                stopped["flag"] = True
                wake.set()

        reader_task = asyncio.create_task(reader())
        try:
            while True:
                await wake.wait()
                wake.clear()
                if stopped["flag"]:
                    break
                request_id = latest_request["id"]
                params, lens, camera = session.snapshot()
                try:
                    result = await asyncio.to_thread(
                        render, session.bundle.scene,
                        camera=camera, params=params, lens=lens,
                    )
                except CapacityError as exc:
                    await ws.send_text(json.dumps({
                        "type": "error",
                        "error": str(exc),
                        "required_capacity": exc.required,
                    }))
                    continue
                frame_id = session.next_frame_id(request_id)
                payload = encode_png(result)
                meta = {
                    "type": "frame",
                    "frame_id": frame_id,
                    "request_id": request_id,
                    "width": params.width,
                    "height": params.height,
                    "timings_s": result.stats["timings_s"],
                    "params": params.to_json(),
                    "lens": lens.to_json(),
                    "camera": camera.to_json(),
                }
                await ws.send_text(json.dumps(meta))
                await ws.send_bytes(FRAME_HEADER.pack(frame_id, len(payload)) + payload)
        except WebSocketDisconnect:
            pass
        finally:
            reader_task.cancel()

    return app
