"""Device pairing and secure-channel protocol (setup and communication phases)."""

from ..identity import normalize_identity
from .entropy import EntropySource, HmacDrbg, SensorSample, entropy_mix, scripted_stream
from .frames import (
    PairingFrame,
    build_pairing_frame,
    decode_session_frame,
    encode_session_frame,
    parse_pairing_frame,
)
from .session import (
    FrameIn,
    Phase,
    SealRequest,
    SessionState,
    StartOfflineSession,
    StartSession,
    Tap,
    Tick,
    Transition,
    derive_session_key,
    fsm_step,
    new_session,
    offline_fallback,
    open_frame,
    seal,
)
from .sim import Loopback, LossyLink, Simulation, honest_run, make_devices, offline_run

__all__ = [
    "normalize_identity",
    "EntropySource",
    "HmacDrbg",
    "SensorSample",
    "entropy_mix",
    "scripted_stream",
    "PairingFrame",
    "build_pairing_frame",
    "parse_pairing_frame",
    "encode_session_frame",
    "decode_session_frame",
    "Phase",
    "SessionState",
    "Transition",
    "Tap",
    "FrameIn",
    "StartSession",
    "StartOfflineSession",
    "SealRequest",
    "Tick",
    "fsm_step",
    "new_session",
    "derive_session_key",
    "offline_fallback",
    "seal",
    "open_frame",
    "Loopback",
    "LossyLink",
    "Simulation",
    "honest_run",
    "make_devices",
    "offline_run",
]
