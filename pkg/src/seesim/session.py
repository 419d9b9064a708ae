"""Live steering session: joystick-rate commands against the simulated plant.

The session core is deterministic and clock-free: callers submit inbound
command records with a receive time and call tick() once per control period.
Wire frames are JSON objects with a schema version; commands carry axial and
tilt rates in display units (mm/s, deg/s), state frames report the tip pose,
chamber volumes, contact wrench, and saturation flags.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .config import RobotConfig
from .control import open_loop_rates
from .errors import SeesimError
from .mechanics import rotation_vector
from .model import SeeState, _Walker, max_injected_volume

PROTOCOL_VERSION = 1


def encode_frame(frame: dict) -> str:
    """Canonical one-line JSON encoding (stable key order for replay)."""
    return json.dumps(frame, sort_keys=True, separators=(",", ":"))


def decode_frame(text: str) -> dict:
    obj = json.loads(text)
    if not isinstance(obj, dict):
        raise ValueError("frame must be a JSON object")
    return obj


@dataclass
class _Command:
    vz: float
    wx: float
    wy: float
    received_at: float


class TeleopSession:
    """One steering loop: latest-command hold with a dead-man timeout."""

    def __init__(self, cfg: RobotConfig):
        self.cfg = cfg
        self.contact = cfg.environment.make_patch()
        self._walker = _Walker(cfg.geometry, 1, contact=self.contact)
        if self.contact is not None:
            preload = np.zeros(6)
            preload[:3] = self.contact.force(self._walker.p[0])
            for frac in np.linspace(0.0, 1.0, 21)[1:]:
                self._walker.advance(self._walker.vol, (frac * preload)[None, :])
        self.seq = 0
        self.failed = False
        self._command: _Command | None = None
        self._saturated = np.zeros(cfg.geometry.n_sfa, dtype=bool)

    @property
    def dt(self) -> float:
        return 1.0 / self.cfg.control.control_rate

    @property
    def time(self) -> float:
        return self.seq * self.dt

    def state(self) -> SeeState:
        w = self._walker
        return SeeState(self.cfg.geometry, w.vol[0], w.p[0], w.R[0], w.tau[0])

    def submit(self, message: dict, received_at: float) -> dict | None:
        """Apply an inbound record. Returns an error frame for bad input."""
        try:
            if message.get("v") != PROTOCOL_VERSION:
                raise ValueError(f"unsupported protocol version {message.get('v')!r}")
            if message.get("type") != "command":
                raise ValueError(f"unsupported message type {message.get('type')!r}")
            vz = float(message.get("vz", 0.0))
            wx = float(message.get("wx", 0.0))
            wy = float(message.get("wy", 0.0))
            if not all(map(math.isfinite, (vz, wx, wy))):
                raise ValueError("command rates must be finite")
        except (TypeError, ValueError) as exc:
            return {"v": PROTOCOL_VERSION, "type": "error", "message": str(exc)}
        lim = self.cfg.teleop
        vz = float(np.clip(vz * 1e-3, -lim.max_axial_rate, lim.max_axial_rate))
        wx = float(np.clip(math.radians(wx), -lim.max_tilt_rate, lim.max_tilt_rate))
        wy = float(np.clip(math.radians(wy), -lim.max_tilt_rate, lim.max_tilt_rate))
        self._command = _Command(vz, wx, wy, received_at)
        return None

    def _active_rates(self) -> np.ndarray:
        cmd = self._command
        if cmd is None or self.time - cmd.received_at > self.cfg.teleop.command_timeout:
            return np.zeros(6)
        return np.array([0.0, 0.0, cmd.vz, cmd.wx, cmd.wy, 0.0])

    def tick(self) -> dict:
        """Advance one control period and emit the state frame."""
        if self.failed:
            raise SeesimError("session has terminated")
        state = self.state()
        try:
            rates = open_loop_rates(state, self._active_rates(), self.cfg.control)
            dv = rates * self.dt
            new_vol = np.clip(self._walker.vol[0] + dv, 0.0, max_injected_volume())
            self._saturated = (np.abs(rates) >= self.cfg.control.pump_rate_limit - 1e-18) | (
                new_vol != self._walker.vol[0] + dv
            )
            self._walker.advance(new_vol[None, :], self._walker.w_applied)
        except SeesimError as exc:
            self.failed = True
            return {"v": PROTOCOL_VERSION, "type": "fatal", "message": str(exc)}
        self.seq += 1
        return self._state_frame()

    def _state_frame(self) -> dict:
        state = self.state()
        tilt = rotation_vector(state.tip_rotation)
        force = self.contact.force(state.tip_position) if self.contact is not None else np.zeros(3)
        return {
            "v": PROTOCOL_VERSION,
            "type": "state",
            "seq": self.seq,
            "t": self.time,
            "position_mm": [float(x) for x in state.tip_position * 1e3],
            "tilt_deg": [float(np.degrees(a)) for a in tilt],
            "volumes_ml": [float(v) for v in state.volumes * 1e6],
            "volume_fraction": [float(v / max_injected_volume()) for v in state.volumes],
            "wrench": [float(f) for f in force] + [0.0, 0.0, 0.0],
            "saturated": [bool(s) for s in self._saturated],
        }


def replay_session(cfg: RobotConfig, inbound: list[tuple[float, str]], duration: float) -> list[str]:
    """Re-run a recorded inbound log (receive-time, raw-frame pairs).

    Produces the outbound frame log; identical inputs yield identical output
    bytes. Commands are delivered before the tick that crosses their
    receive time.
    """
    session = TeleopSession(cfg)
    outbound: list[str] = []
    pending = sorted(inbound, key=lambda item: item[0])
    idx = 0
    n_ticks = int(round(duration * cfg.control.control_rate))
    for _ in range(n_ticks):
        while idx < len(pending) and pending[idx][0] <= session.time:
            received_at, raw = pending[idx]
            idx += 1
            try:
                msg = decode_frame(raw)
            except (ValueError, json.JSONDecodeError) as exc:
                outbound.append(
                    encode_frame(
                        {"v": PROTOCOL_VERSION, "type": "error", "message": f"bad frame: {exc}"}
                    )
                )
                continue
            err = session.submit(msg, received_at)
            if err is not None:
                outbound.append(encode_frame(err))
        frame = session.tick()
        outbound.append(encode_frame(frame))
        if frame["type"] == "fatal":
            break
    return outbound
