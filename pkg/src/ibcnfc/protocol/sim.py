"""Two simulated handsets talking through an in-memory transport.

The transport delivers whole frames.  :class:`Loopback` keeps them in order;
:class:`LossyLink` drops each frame with some probability and can shuffle
the delivery order.  Neither retransmits: a lost handshake frame ends in a
timeout, never in a wrong key.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

from .. import ibe, pkg
from ..errors import AuthenticationFailure
from .entropy import entropy_mix, EntropySource, scripted_stream
from .frames import PairingFrame
from .session import (
    Event,
    FrameIn,
    Phase,
    SessionState,
    StartOfflineSession,
    StartSession,
    SealRequest,
    Tap,
    Tick,
    describe_frame,
    fsm_step,
    new_session,
)

Tamper = Callable[[int, str, bytes], bytes]


class Loopback:
    """FIFO delivery of every frame."""

    def __init__(self) -> None:
        self.queue: List[Tuple[str, bytes]] = []

    def send(self, dest: str, data: bytes) -> None:
        self.queue.append((dest, data))

    def pop(self) -> Optional[Tuple[str, bytes]]:
        return self.queue.pop(0) if self.queue else None


class LossyLink(Loopback):
    def __init__(self, loss: float = 0.0, reorder: bool = False, rng: Optional[random.Random] = None) -> None:
        super().__init__()
        self.loss = loss
        self.reorder = reorder
        self.rng = rng or random.Random(0)
        self.dropped = 0

    def send(self, dest: str, data: bytes) -> None:
        if self.rng.random() < self.loss:
            self.dropped += 1
            return
        super().send(dest, data)

    def pop(self) -> Optional[Tuple[str, bytes]]:
        if not self.queue:
            return None
        i = self.rng.randrange(len(self.queue)) if self.reorder else 0
        return self.queue.pop(i)


@dataclass
class Simulation:
    """Drives two FSMs named "A" and "B" over one transport."""

    devices: Dict[str, SessionState]
    transport: Loopback = field(default_factory=Loopback)
    tamper: Optional[Tamper] = None
    log: List[str] = field(default_factory=list)
    wire: List[Tuple[str, str, bytes]] = field(default_factory=list)
    delivered: Dict[str, List[bytes]] = field(default_factory=lambda: {"A": [], "B": []})
    history: List[Tuple[str, Event, SessionState]] = field(default_factory=list)

    def _peer(self, name: str) -> str:
        return "B" if name == "A" else "A"

    def step(self, name: str, event: Event) -> None:
        tr = fsm_step(self.devices[name], event)
        self.devices[name] = tr.state
        self.history.append((name, event, tr.state))
        for line in tr.log:
            self.log.append(f"[{name}] {line}")
        self.delivered[name].extend(tr.delivered)
        for frame in tr.frames:
            dest = self._peer(name)
            index = len(self.wire)
            if self.tamper is not None:
                frame = self.tamper(index, name, frame)
            self.wire.append((name, dest, frame))
            self.log.append(f"[{name}] -> {dest} {describe_frame(frame)}")
            self.transport.send(dest, frame)

    def pump(self, max_frames: int = 1000) -> None:
        for _ in range(max_frames):
            item = self.transport.pop()
            if item is None:
                return
            dest, frame = item
            self.step(dest, FrameIn(frame))

    def settle(self, ticks: int = 10) -> None:
        """Deliver everything, then let timers run until nothing is pending."""
        self.pump()
        for _ in range(ticks):
            if not any(s.phase in (Phase.AWAIT_DH_REPLY, Phase.AWAIT_CONFIRM) for s in self.devices.values()):
                break
            for name in ("A", "B"):
                self.step(name, Tick())
            self.pump()

    def run(self, *events: Tuple[str, Event]) -> "Simulation":
        for name, ev in events:
            self.step(name, ev)
            self.settle()
        return self

    @property
    def a(self) -> SessionState:
        return self.devices["A"]

    @property
    def b(self) -> SessionState:
        return self.devices["B"]


PHONE_A = "+34 600-111-222"
PHONE_B = "+34 600-333-444"
TOKEN = b"demo-token"


def issue_key(service: pkg.PkgService, token: bytes, identity: str) -> ibe.IdentityPrivateKey:
    status, payload = pkg.parse_response(service(pkg.extract_request(token, identity)))
    if status != pkg.STATUS_OK:
        raise AuthenticationFailure(f"PKG refused extraction (status {status})")
    params = ibe.SystemParams.from_bytes(pkg.parse_response(service(pkg.params_request()))[1])
    return ibe.IdentityPrivateKey.from_bytes(payload, params)


def make_devices(
    state: pkg.PkgState,
    seed: int = 0,
    phones: Tuple[str, str] = (PHONE_A, PHONE_B),
) -> Dict[str, SessionState]:
    """Register two handsets with the PKG and seed their DRBGs from sensors."""
    service = pkg.PkgService(state)
    token = next(iter(sorted(state.auth_tokens)))
    devices = {}
    for i, (name, phone) in enumerate(zip(("A", "B"), phones)):
        key = issue_key(service, token, phone)
        addr = hashlib.sha256(f"{name}{seed}".encode()).digest()[:6]
        info = PairingFrame(addr, f"Handset {name}", phone)
        drbg_seed = entropy_mix(EntropySource(), scripted_stream(seed * 2 + i))
        devices[name] = new_session(state.params, info, key, drbg_seed)
    return devices


def key_fingerprint(key: Optional[bytes]) -> str:
    return hashlib.sha256(key).hexdigest()[:16] if key else "-"


def honest_run(
    state: pkg.PkgState,
    seed: int = 0,
    transport: Optional[Loopback] = None,
    tamper: Optional[Tamper] = None,
    message: bytes = b"hello over the secured link",
) -> Simulation:
    """Tap, key agreement, one DATA frame each way."""
    sim = Simulation(make_devices(state, seed), transport or Loopback(), tamper)
    sim.run(("A", Tap()), ("A", StartSession()))
    if sim.a.established and sim.b.established:
        sim.run(("A", SealRequest(message)), ("B", SealRequest(message[::-1])))
    return sim


def offline_run(state: pkg.PkgState, payload: bytes, seed: int = 0) -> Tuple[Simulation, bytes]:
    """Pair, then A sends an OFFLINE frame that B only picks up later."""
    sim = Simulation(make_devices(state, seed))
    sim.run(("A", Tap()))
    tr = fsm_step(sim.a, StartOfflineSession(payload))
    sim.devices["A"] = tr.state
    stored = tr.frames[0]
    return sim, stored
