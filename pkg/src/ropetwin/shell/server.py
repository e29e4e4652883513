"""Real-time teleoperation service.

One authoritative simulation loop ticks at wall-clock 30 Hz. Client
websocket handlers never touch sim state: incoming messages are queued
and drained atomically at the start of each tick (last cmd per arm
wins), outgoing frames fan out through per-client queues that drop the
oldest frame when a slow reader falls behind.
"""
import asyncio
import contextlib
import itertools
import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.responses import PlainTextResponse

from ropetwin import quat
from ropetwin.errors import DivergenceError, ProtocolError
from ropetwin.extract import ParticleState, resample_arclength
from ropetwin.metrics import crossings, overhand_knot_curve
from ropetwin.playback import PARK_LEFT, PARK_RIGHT
from ropetwin.rodsim import (GripperState, RodMaterial, SimConfig, init_rod,
                             step_frame, update_grasp)
from ropetwin.shell import protocol

PARTICLES = 100
OUTBOX_DEPTH = 8          # frames a slow client may lag before dropping


def straight_centerline(length: float = 1.0, height: float = 0.005):
    pts = np.zeros((PARTICLES, 3))
    pts[:, 0] = np.linspace(0.0, length, PARTICLES)
    pts[:, 2] = height
    return pts


def preset_centerline(name: str, material: RodMaterial) -> np.ndarray:
    if name == "straight":
        return straight_centerline(height=material.radius)
    if name.startswith("overhand"):
        _, _, seed = name.partition(":")
        return overhand_knot_curve(int(seed) if seed else 0,
                                   radius=material.radius)
    raise ProtocolError(f"unknown rope preset: {name!r}")


@dataclass
class ServeSettings:
    material: RodMaterial = field(default_factory=RodMaterial)
    config: SimConfig = field(default_factory=SimConfig)
    preset: str = "straight"
    record_dir: Path = Path(".")


class _Recorder:
    """Streams demo-v1 lines to disk, one frame per tick."""

    def __init__(self, record_dir: Path, rope_id: str, rate_hz: float):
        record_dir.mkdir(parents=True, exist_ok=True)
        stamp = time.strftime("%Y%m%d-%H%M%S")
        base = f"{rope_id}_{stamp}"
        path = record_dir / f"{base}.demo.jsonl"
        for n in itertools.count(1):       # same rope, same second
            if not path.exists():
                break
            path = record_dir / f"{base}_{n}.demo.jsonl"
        self.path = path
        self.rope_id = rope_id
        self.rate_hz = rate_hz
        self.frames = 0
        self._fh = open(path, "w")
        self._fh.write(json.dumps({"format": "demo-v1", "rope_id": rope_id,
                                   "rate_hz": rate_hz}) + "\n")

    def append(self, left: GripperState, right: GripperState) -> None:
        def arm(g):
            return {"pos": [float(x) for x in g.position],
                    "quat": [float(x) for x in g.orientation],
                    "open": float(g.openness)}
        self._fh.write(json.dumps({"t": self.frames / self.rate_hz,
                                   "left": arm(left),
                                   "right": arm(right)}) + "\n")
        self.frames += 1

    def close(self) -> str:
        self._fh.flush()
        self._fh.close()
        return str(self.path)


class SimService:
    """Owns the rod, gripper targets, recorder, and client registry."""

    def __init__(self, settings: ServeSettings):
        self.settings = settings
        self.material = settings.material
        self.config = settings.config
        self.inbox: asyncio.Queue = asyncio.Queue()
        self.clients = {}                      # id -> outbound queue
        self._next_client = itertools.count(1)
        self.tick = 0
        self.recorder: Optional[_Recorder] = None
        self._reset_to(preset_centerline(settings.preset, self.material))

    # -- state management ------------------------------------------------

    def _reset_to(self, centerline: np.ndarray) -> None:
        pts = np.asarray(centerline, dtype=np.float64)
        if pts.shape != (PARTICLES, 3):
            pts = resample_arclength(pts, PARTICLES).points
        self.rod = init_rod(pts, self.material, self.config)
        self.left = GripperState.parked(PARK_LEFT)
        self.right = GripperState.parked(PARK_RIGHT)

    def particles(self) -> np.ndarray:
        return self.rod.positions

    # -- client registry ---------------------------------------------------

    def register(self):
        cid = next(self._next_client)
        q: asyncio.Queue = asyncio.Queue(maxsize=OUTBOX_DEPTH)
        self.clients[cid] = q
        return cid, q

    def unregister(self, cid) -> None:
        self.clients.pop(cid, None)

    @staticmethod
    def _offer(q: asyncio.Queue, text: str) -> None:
        while True:
            try:
                q.put_nowait(text)
                return
            except asyncio.QueueFull:     # drop the oldest frame, not physics
                with contextlib.suppress(asyncio.QueueEmpty):
                    q.get_nowait()

    def broadcast(self, text: str) -> None:
        for q in self.clients.values():
            self._offer(q, text)

    # -- one tick ----------------------------------------------------------

    def _apply(self, msg, outq) -> None:
        if msg.type == "cmd":
            target = GripperState(
                np.asarray(msg.pos), quat.normalize(np.asarray(msg.quat)),
                msg.open,
                (self.left if msg.arm == "left" else self.right).attachment)
            if msg.arm == "left":
                self.left = target
            else:
                self.right = target
        elif msg.type == "snapshot":
            self._offer(outq, protocol.snapshot_ack(self.particles()))
        elif msg.type == "reset":
            if self.recorder is not None:
                self._finish_recording()
            try:
                if msg.centerline is not None:
                    self._reset_to(np.asarray(msg.centerline))
                else:
                    self._reset_to(preset_centerline(
                        msg.preset or self.settings.preset, self.material))
            except ProtocolError as exc:
                self._offer(outq, protocol.error_message(exc.code, str(exc)))
                return
            self._offer(outq, protocol.reset_ack())
        elif msg.type == "record_start":
            if self.recorder is not None:
                self._offer(outq, protocol.error_message(
                    "already_recording", "recording already in progress"))
                return
            self.recorder = _Recorder(self.settings.record_dir, msg.rope_id,
                                      1.0 / self.config.frame_dt)
            self.broadcast(protocol.recording_message(
                True, 0, rope_id=msg.rope_id))
        elif msg.type == "record_stop":
            if self.recorder is None:
                self._offer(outq, protocol.error_message(
                    "not_recording", "no recording in progress"))
                return
            self._finish_recording()

    def _finish_recording(self) -> None:
        rec = self.recorder
        self.recorder = None
        path = rec.close()
        self.broadcast(protocol.recording_message(
            False, rec.frames, rope_id=rec.rope_id, path=path))

    def step_once(self) -> None:
        while True:
            try:
                _cid, msg, outq = self.inbox.get_nowait()
            except asyncio.QueueEmpty:
                break
            self._apply(msg, outq)

        self.left = update_grasp(self.rod, self.left, self.config)
        self.right = update_grasp(self.rod, self.right, self.config)
        try:
            self.rod = step_frame(self.rod, self.left, self.right,
                                  self.material, self.config)
        except DivergenceError as exc:
            self.broadcast(protocol.error_message(
                "diverged", f"solver diverged, rope reset: {exc}"))
            self._reset_to(preset_centerline(self.settings.preset,
                                             self.material))

        if self.recorder is not None:
            self.recorder.append(self.left, self.right)
            self.broadcast(protocol.recording_message(
                True, self.recorder.frames, rope_id=self.recorder.rope_id))

        n_cross = len(crossings(ParticleState(self.particles().copy())))
        self.broadcast(protocol.state_message(
            self.tick * self.config.frame_dt, self.particles(),
            self.left, self.right, n_cross))
        self.tick += 1

    async def run(self) -> None:
        loop = asyncio.get_running_loop()
        dt = self.config.frame_dt
        next_t = loop.time() + dt
        while True:
            delay = next_t - loop.time()
            if delay > 0.0:
                await asyncio.sleep(delay)
            next_t += dt
            if loop.time() > next_t + 3.0 * dt:   # overloaded: resync clock
                next_t = loop.time() + dt
            self.step_once()


async def _writer(ws: WebSocket, q: asyncio.Queue) -> None:
    while True:
        await ws.send_text(await q.get())


def build_app(settings: Optional[ServeSettings] = None) -> FastAPI:
    settings = settings or ServeSettings()
    service = SimService(settings)

    @contextlib.asynccontextmanager
    async def lifespan(_app):
        task = asyncio.create_task(service.run())
        try:
            yield
        finally:
            task.cancel()
            with contextlib.suppress(asyncio.CancelledError):
                await task

    app = FastAPI(lifespan=lifespan)
    app.state.service = service

    @app.get("/healthz", response_class=PlainTextResponse)
    async def healthz():
        return (f"ok tick={service.tick} clients={len(service.clients)} "
                f"recording={service.recorder is not None}")

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket):
        await ws.accept()
        cid, q = service.register()
        writer = asyncio.create_task(_writer(ws, q))
        try:
            while True:
                raw = await ws.receive_text()
                try:
                    msg = protocol.parse_client_message(raw)
                except ProtocolError as exc:
                    service._offer(q, protocol.error_message(exc.code,
                                                             str(exc)))
                    continue
                service.inbox.put_nowait((cid, msg, q))
        except WebSocketDisconnect:
            pass
        finally:
            writer.cancel()
            with contextlib.suppress(asyncio.CancelledError):
                await writer
            service.unregister(cid)

    return app
