"""Per-device protocol state machine.

A device starts in ``IDLE``.  The NFC tap swaps pairing frames (phone
numbers become the identities) and both sides reach ``PAIRED``.  The
communication phase then runs an IBE-protected Diffie-Hellman exchange::

    A -> B   DH_INIT   IBE_B( aP | nonce_A | id_A )
    B -> A   DH_REPLY  IBE_A( bP | nonce_B | id_B )
    B -> A   CONFIRM   MAC(K, "responder" | transcript)
    A -> B   CONFIRM   MAC(K, "initiator" | transcript)

with ``K = KDF(abP | id_A | id_B | nonce_A | nonce_B)`` and the transcript
being the two DH frames as sent.  When the peer cannot take part, the
initiator picks K itself and ships it inside one OFFLINE frame.

:func:`fsm_step` is a pure function of ``(state, event)``; all randomness is
drawn from a DRBG whose state travels inside :class:`SessionState`.
"""

from __future__ import annotations

import enum
import hmac
from dataclasses import dataclass, field, replace
from typing import NamedTuple, Optional, Tuple, Union

from .. import ibe, suite
from ..curve import CurvePoint, decode_point_at, encode_point, scalar_mul
from ..errors import (
    AuthenticationFailure,
    FrameMalformed,
    HandshakeFailure,
    IbcError,
    InvalidIdentity,
    MalformedBlob,
    MalformedCiphertext,
    NotEstablished,
    ReplayDetected,
)
from ..identity import normalize_identity
from .entropy import HmacDrbg
from .frames import (
    ABORT,
    CONFIRM,
    DATA,
    DH_INIT,
    DH_REPLY,
    FRAME_NAMES,
    OFFLINE,
    PAIRING_MAGIC,
    PairingFrame,
    build_pairing_frame,
    decode_session_frame,
    encode_session_frame,
    parse_pairing_frame,
    session_header,
)

NONCE_LEN = 16
DIR_INITIATOR = 0x01
DIR_RESPONDER = 0x02
COUNTER_LIMIT = 1 << 64
DEFAULT_TIMEOUT_TICKS = 3
SESSION_INFO = b"ibcnfc/session/v1"


class Phase(str, enum.Enum):
    IDLE = "Idle"
    PAIRED = "Paired"
    AWAIT_DH_REPLY = "AwaitDhReply"
    AWAIT_CONFIRM = "AwaitConfirm"
    ESTABLISHED = "Established"
    FAILED = "Failed"


HANDSHAKE_PHASES = (Phase.AWAIT_DH_REPLY, Phase.AWAIT_CONFIRM)


# -- events ----------------------------------------------------------------


@dataclass(frozen=True)
class Tap:
    """The handsets touched: emit our pairing frame."""


@dataclass(frozen=True)
class FrameIn:
    data: bytes


@dataclass(frozen=True)
class StartSession:
    pass


@dataclass(frozen=True)
class StartOfflineSession:
    payload: bytes = b""


@dataclass(frozen=True)
class SealRequest:
    payload: bytes


@dataclass(frozen=True)
class Tick:
    pass


Event = Union[Tap, FrameIn, StartSession, StartOfflineSession, SealRequest, Tick]


# -- state -----------------------------------------------------------------


@dataclass(frozen=True)
class SessionState:
    params: ibe.SystemParams
    device: PairingFrame
    self_key: ibe.IdentityPrivateKey
    drbg_state: Tuple[bytes, bytes]
    phase: Phase = Phase.IDLE
    role: Optional[str] = None
    peer_identity: Optional[str] = None
    peer_device: Optional[PairingFrame] = None
    sent_pairing: bool = False
    dh_secret: int = 0
    nonce_self: bytes = b""
    nonce_peer: bytes = b""
    pending_key: Optional[bytes] = field(default=None, repr=False)
    session_key: Optional[bytes] = field(default=None, repr=False)
    send_counter: int = 0
    recv_counter: int = 0
    transcript: bytes = field(default=b"", repr=False)
    seen_nonces: frozenset = frozenset()
    idle_ticks: int = 0
    timeout_ticks: int = DEFAULT_TIMEOUT_TICKS
    failure: Optional[str] = None

    @property
    def self_identity(self) -> str:
        return self.self_key.identity

    @property
    def established(self) -> bool:
        return self.phase is Phase.ESTABLISHED


def new_session(
    params: ibe.SystemParams,
    device: PairingFrame,
    key: ibe.IdentityPrivateKey,
    seed: bytes,
    timeout_ticks: int = DEFAULT_TIMEOUT_TICKS,
) -> SessionState:
    if normalize_identity(device.phone_number) != key.identity:
        raise InvalidIdentity("device phone number does not match its private key")
    return SessionState(params, device, key, HmacDrbg(seed).state, timeout_ticks=timeout_ticks)


class Transition(NamedTuple):
    state: SessionState
    frames: Tuple[bytes, ...] = ()
    delivered: Tuple[bytes, ...] = ()
    log: Tuple[str, ...] = ()


def _fail(state: SessionState, reason: str, notify: bool = True) -> Transition:
    st = replace(
        state,
        phase=Phase.FAILED,
        session_key=None,
        pending_key=None,
        dh_secret=0,
        idle_ticks=0,
        failure=reason,
    )
    frames = (encode_session_frame(ABORT, reason.encode("utf-8")[:120]),) if notify else ()
    return Transition(st, frames, (), (f"FAILED: {reason}",))


def _drop(state: SessionState, why: str) -> Transition:
    return Transition(state, (), (), (f"dropped: {why}",))


# -- key derivation --------------------------------------------------------


def _lp(s: str) -> bytes:
    b = s.encode("ascii")
    return bytes([len(b)]) + b


def derive_session_key(
    shared: CurvePoint,
    id_initiator: str,
    id_responder: str,
    nonce_initiator: bytes,
    nonce_responder: bytes,
    suite_id: int = suite.SUITE_SHA256_AESGCM,
) -> bytes:
    ikm = encode_point(shared) + _lp(id_initiator) + _lp(id_responder) + nonce_initiator + nonce_responder
    return suite.kdf(ikm, SESSION_INFO, suite_id)


def confirmation_tag(key: bytes, role: str, transcript: bytes, suite_id: int = suite.SUITE_SHA256_AESGCM) -> bytes:
    return suite.mac(key, b"ibcnfc/confirm/" + role.encode("ascii") + transcript, suite_id)


def _dh_plaintext(X: CurvePoint, nonce: bytes, identity: str) -> bytes:
    return encode_point(X) + nonce + _lp(identity)


def _parse_dh_plaintext(state: SessionState, pt: bytes) -> Tuple[CurvePoint, bytes, str]:
    m = state.params.modulus
    try:
        X, off = decode_point_at(pt, 0, m)
    except MalformedBlob as exc:
        raise HandshakeFailure(f"bad DH share: {exc}") from None
    if X.is_infinity or not scalar_mul(m.q, X).is_infinity:
        raise HandshakeFailure("DH share is not a point of order q")
    nonce = pt[off : off + NONCE_LEN]
    off += NONCE_LEN
    if len(nonce) != NONCE_LEN or off >= len(pt) or off + 1 + pt[off] != len(pt):
        raise HandshakeFailure("malformed DH plaintext")
    ident = pt[off + 1 :].decode("ascii", "replace")
    return X, nonce, ident


def _ibe_open(state: SessionState, payload: bytes) -> bytes:
    try:
        return ibe.decrypt(state.params, state.self_key, payload)
    except (AuthenticationFailure, MalformedCiphertext) as exc:
        raise HandshakeFailure(f"IBE decryption failed: {exc}") from None


# -- data channel ------------------------------------------------------------


def _direction(role: Optional[str], sending: bool) -> int:
    mine = DIR_INITIATOR if role == "initiator" else DIR_RESPONDER
    if sending:
        return mine
    return DIR_RESPONDER if mine == DIR_INITIATOR else DIR_INITIATOR


def _data_nonce(direction: int, counter: int) -> bytes:
    return bytes([direction, 0, 0, 0]) + counter.to_bytes(8, "big")


def _seal_with(key: bytes, direction: int, counter: int, plaintext: bytes) -> bytes:
    body_len = 8 + len(plaintext) + 16
    aad = session_header(DATA, body_len)
    ct = suite.aead_seal(key, _data_nonce(direction, counter), plaintext, aad)
    return encode_session_frame(DATA, counter.to_bytes(8, "big") + ct)


def _open_with(key: bytes, direction: int, min_counter: int, data: bytes) -> Tuple[int, bytes]:
    ftype, body = decode_session_frame(data)
    if ftype != DATA or len(body) < 24:
        raise FrameMalformed("not a data frame")
    counter = int.from_bytes(body[:8], "big")
    if counter < min_counter:
        raise ReplayDetected(f"counter {counter} already used (next expected {min_counter})")
    pt = suite.aead_open(key, _data_nonce(direction, counter), body[8:], data[:9])
    return counter, pt


def seal(state: SessionState, plaintext: bytes) -> Tuple[SessionState, bytes]:
    """Encrypt ``plaintext`` under the session key as one DATA frame."""
    if state.phase is not Phase.ESTABLISHED:
        raise NotEstablished(f"cannot seal in phase {state.phase.value}")
    if state.send_counter >= COUNTER_LIMIT:
        raise NotEstablished("send counter exhausted")
    frame = _seal_with(state.session_key, _direction(state.role, True), state.send_counter, plaintext)
    return replace(state, send_counter=state.send_counter + 1), frame


def open_frame(state: SessionState, frame: bytes) -> Tuple[SessionState, bytes]:
    """Authenticate and decrypt a DATA frame from the peer.

    Counters must strictly increase; anything at or below the last accepted
    one raises ReplayDetected.
    """
    if state.phase is not Phase.ESTABLISHED:
        raise NotEstablished(f"cannot open in phase {state.phase.value}")
    counter, pt = _open_with(state.session_key, _direction(state.role, False), state.recv_counter, frame)
    return replace(state, recv_counter=counter + 1), pt


# -- offline fallback --------------------------------------------------------


def offline_fallback(
    state: SessionState, payload: bytes = b"", peer_identity: Optional[str] = None
) -> Tuple[SessionState, bytes]:
    """Initiator-chosen session key delivered in a single OFFLINE frame."""
    peer = normalize_identity(peer_identity) if peer_identity else state.peer_identity
    if peer is None:
        raise HandshakeFailure("offline session needs a known peer identity")
    drbg = HmacDrbg.from_state(state.drbg_state)
    key = drbg.randbytes(suite.KEY_LEN)
    nonce = drbg.randbytes(NONCE_LEN)
    sealed = _seal_with(key, DIR_INITIATOR, 0, payload)
    inner = key + nonce + _lp(state.self_identity) + sealed
    ct = ibe.encrypt(state.params, peer, inner, drbg)
    frame = encode_session_frame(OFFLINE, ct.to_bytes())
    st = replace(
        state,
        phase=Phase.ESTABLISHED,
        role="initiator",
        peer_identity=peer,
        session_key=key,
        pending_key=None,
        nonce_self=nonce,
        nonce_peer=b"",
        send_counter=1,
        recv_counter=0,
        seen_nonces=state.seen_nonces | {nonce},
        drbg_state=drbg.state,
        transcript=frame,
        failure=None,
    )
    return st, frame


def _on_offline(state: SessionState, payload: bytes) -> Transition:
    try:
        inner = ibe.decrypt(state.params, state.self_key, payload)
    except (AuthenticationFailure, MalformedCiphertext) as exc:
        return _drop(state, f"offline frame rejected: {exc}")
    key, nonce = inner[:32], inner[32:48]
    if len(inner) < 49 or 49 + inner[48] > len(inner):
        return _drop(state, "offline frame rejected: malformed body")
    n = inner[48]
    sender = inner[49 : 49 + n].decode("ascii", "replace")
    if state.peer_identity is not None and sender != state.peer_identity:
        return _drop(state, "offline frame rejected: unexpected sender")
    if nonce in state.seen_nonces:
        return _drop(state, "offline frame rejected: replayed nonce")
    try:
        counter, pt = _open_with(key, DIR_INITIATOR, 0, inner[49 + n :])
    except (IbcError, ValueError) as exc:
        return _drop(state, f"offline frame rejected: {exc}")
    st = replace(
        state,
        phase=Phase.ESTABLISHED,
        role="responder",
        peer_identity=sender,
        session_key=key,
        pending_key=None,
        nonce_peer=nonce,
        send_counter=0,
        recv_counter=counter + 1,
        seen_nonces=state.seen_nonces | {nonce},
        idle_ticks=0,
        failure=None,
    )
    return Transition(st, (), (pt,), ("ESTABLISHED (offline key from initiator)",))


# -- handshake handlers --------------------------------------------------------


def _start_session(state: SessionState) -> Transition:
    if state.peer_identity is None or state.phase not in (Phase.PAIRED, Phase.ESTABLISHED, Phase.FAILED):
        return _drop(state, f"StartSession out of phase ({state.phase.value})")
    drbg = HmacDrbg.from_state(state.drbg_state)
    q = state.params.modulus.q
    a = drbg.randrange(1, q)
    nonce = drbg.randbytes(NONCE_LEN)
    X = scalar_mul(a, state.params.P)
    ct = ibe.encrypt(state.params, state.peer_identity, _dh_plaintext(X, nonce, state.self_identity), drbg)
    frame = encode_session_frame(DH_INIT, ct.to_bytes())
    st = replace(
        state,
        phase=Phase.AWAIT_DH_REPLY,
        role="initiator",
        dh_secret=a,
        nonce_self=nonce,
        nonce_peer=b"",
        session_key=None,
        pending_key=None,
        send_counter=0,
        recv_counter=0,
        transcript=frame,
        seen_nonces=state.seen_nonces | {nonce},
        drbg_state=drbg.state,
        idle_ticks=0,
        failure=None,
    )
    return Transition(st, (frame,), (), ("sent DH_INIT",))


def _on_dh_init(state: SessionState, frame: bytes, payload: bytes) -> Transition:
    if state.phase in (Phase.IDLE, Phase.FAILED) or state.peer_identity is None:
        return _drop(state, f"DH_INIT out of phase ({state.phase.value})")
    try:
        X_a, nonce_a, ident = _parse_dh_plaintext(state, _ibe_open(state, payload))
        if ident != state.peer_identity:
            raise HandshakeFailure(f"DH_INIT from unexpected identity {ident!r}")
        if nonce_a in state.seen_nonces:
            raise HandshakeFailure("replayed nonce in DH_INIT")
    except HandshakeFailure as exc:
        return _fail(state, str(exc))
    if state.phase not in (Phase.PAIRED, Phase.ESTABLISHED):
        return _drop(state, f"DH_INIT out of phase ({state.phase.value})")

    drbg = HmacDrbg.from_state(state.drbg_state)
    b = drbg.randrange(1, state.params.modulus.q)
    nonce_b = drbg.randbytes(NONCE_LEN)
    X_b = scalar_mul(b, state.params.P)
    ct = ibe.encrypt(state.params, state.peer_identity, _dh_plaintext(X_b, nonce_b, state.self_identity), drbg)
    reply = encode_session_frame(DH_REPLY, ct.to_bytes())
    transcript = frame + reply
    key = derive_session_key(
        scalar_mul(b, X_a), state.peer_identity, state.self_identity, nonce_a, nonce_b, state.params.hash_suite_id
    )
    confirm = encode_session_frame(CONFIRM, confirmation_tag(key, "responder", transcript, state.params.hash_suite_id))
    st = replace(
        state,
        phase=Phase.AWAIT_CONFIRM,
        role="responder",
        dh_secret=0,
        nonce_self=nonce_b,
        nonce_peer=nonce_a,
        session_key=None,
        pending_key=key,
        send_counter=0,
        recv_counter=0,
        transcript=transcript,
        seen_nonces=state.seen_nonces | {nonce_a, nonce_b},
        drbg_state=drbg.state,
        idle_ticks=0,
        failure=None,
    )
    return Transition(st, (reply, confirm), (), ("received DH_INIT", "sent DH_REPLY", "sent CONFIRM"))


def _on_dh_reply(state: SessionState, frame: bytes, payload: bytes) -> Transition:
    if state.phase is not Phase.AWAIT_DH_REPLY or state.pending_key is not None:
        return _drop(state, f"DH_REPLY out of phase ({state.phase.value})")
    try:
        X_b, nonce_b, ident = _parse_dh_plaintext(state, _ibe_open(state, payload))
        if ident != state.peer_identity:
            raise HandshakeFailure(f"DH_REPLY from unexpected identity {ident!r}")
        if nonce_b in state.seen_nonces:
            raise HandshakeFailure("replayed nonce in DH_REPLY")
    except HandshakeFailure as exc:
        return _fail(state, str(exc))
    key = derive_session_key(
        scalar_mul(state.dh_secret, X_b),
        state.self_identity,
        state.peer_identity,
        state.nonce_self,
        nonce_b,
        state.params.hash_suite_id,
    )
    st = replace(
        state,
        dh_secret=0,
        nonce_peer=nonce_b,
        pending_key=key,
        transcript=state.transcript + frame,
        seen_nonces=state.seen_nonces | {nonce_b},
        idle_ticks=0,
    )
    return Transition(st, (), (), ("received DH_REPLY",))


def _on_confirm(state: SessionState, payload: bytes) -> Transition:
    sid = state.params.hash_suite_id
    if state.phase is Phase.AWAIT_DH_REPLY and state.pending_key is not None:
        want = confirmation_tag(state.pending_key, "responder", state.transcript, sid)
        if not hmac.compare_digest(payload, want):
            return _fail(state, "responder confirmation MAC mismatch")
        mine = confirmation_tag(state.pending_key, "initiator", state.transcript, sid)
        st = replace(state, phase=Phase.ESTABLISHED, session_key=state.pending_key, pending_key=None, idle_ticks=0)
        return Transition(st, (encode_session_frame(CONFIRM, mine),), (), ("received CONFIRM", "sent CONFIRM", "ESTABLISHED"))
    if state.phase is Phase.AWAIT_CONFIRM:
        want = confirmation_tag(state.pending_key, "initiator", state.transcript, sid)
        if not hmac.compare_digest(payload, want):
            return _fail(state, "initiator confirmation MAC mismatch")
        st = replace(state, phase=Phase.ESTABLISHED, session_key=state.pending_key, pending_key=None, idle_ticks=0)
        return Transition(st, (), (), ("received CONFIRM", "ESTABLISHED"))
    return _drop(state, f"CONFIRM out of phase ({state.phase.value})")


def _on_pairing(state: SessionState, data: bytes) -> Transition:
    if state.phase is not Phase.IDLE:
        return _drop(state, f"pairing frame out of phase ({state.phase.value})")
    try:
        peer = parse_pairing_frame(data)
    except (FrameMalformed, InvalidIdentity) as exc:
        return _drop(state, f"pairing frame rejected: {exc}")
    ident = peer.identity
    if ident == state.self_identity:
        return _drop(state, "pairing frame carries our own identity")
    out = () if state.sent_pairing else (build_pairing_frame(state.device),)
    st = replace(state, phase=Phase.PAIRED, peer_identity=ident, peer_device=peer, sent_pairing=True)
    return Transition(st, out, (), (f"paired with {peer.device_name!r} ({ident})",))


def _on_frame(state: SessionState, data: bytes) -> Transition:
    if data[:4] == PAIRING_MAGIC:
        return _on_pairing(state, data)
    try:
        ftype, payload = decode_session_frame(data)
    except FrameMalformed as exc:
        if state.phase in HANDSHAKE_PHASES:
            return _fail(state, f"malformed frame during handshake: {exc}")
        return _drop(state, f"malformed frame: {exc}")
    if ftype == DH_INIT:
        return _on_dh_init(state, data, payload)
    if ftype == DH_REPLY:
        return _on_dh_reply(state, data, payload)
    if ftype == CONFIRM:
        return _on_confirm(state, payload)
    if ftype == OFFLINE:
        if state.phase in HANDSHAKE_PHASES:
            return _drop(state, "OFFLINE frame during handshake")
        return _on_offline(state, payload)
    if ftype == ABORT:
        if state.phase in HANDSHAKE_PHASES or state.phase is Phase.ESTABLISHED:
            return _fail(state, "peer aborted: " + payload.decode("utf-8", "replace"), notify=False)
        return _drop(state, "ABORT with no session")
    # DATA
    if state.phase is not Phase.ESTABLISHED:
        return _drop(state, f"DATA out of phase ({state.phase.value})")
    try:
        st, pt = open_frame(state, data)
    except (IbcError, ValueError) as exc:
        return _drop(state, f"DATA rejected: {type(exc).__name__}: {exc}")
    return Transition(st, (), (pt,), (f"received DATA #{st.recv_counter - 1}",))


def fsm_step(state: SessionState, event: Event) -> Transition:
    """Advance one device by one event; returns the outbound frames."""
    if isinstance(event, FrameIn):
        return _on_frame(state, bytes(event.data))
    if isinstance(event, Tap):
        if state.phase is not Phase.IDLE or state.sent_pairing:
            return _drop(state, "tap ignored")
        st = replace(state, sent_pairing=True)
        return Transition(st, (build_pairing_frame(state.device),), (), ("NFC tap: sent pairing frame",))
    if isinstance(event, StartSession):
        return _start_session(state)
    if isinstance(event, StartOfflineSession):
        if state.phase in HANDSHAKE_PHASES or state.peer_identity is None:
            return _drop(state, f"StartOfflineSession out of phase ({state.phase.value})")
        st, frame = offline_fallback(state, event.payload)
        return Transition(st, (frame,), (), ("sent OFFLINE (initiator-chosen key)",))
    if isinstance(event, SealRequest):
        if state.phase is not Phase.ESTABLISHED:
            return _drop(state, f"SealRequest out of phase ({state.phase.value})")
        st, frame = seal(state, event.payload)
        return Transition(st, (frame,), (), (f"sent DATA #{state.send_counter}",))
    if isinstance(event, Tick):
        if state.phase not in HANDSHAKE_PHASES:
            return Transition(state)
        ticks = state.idle_ticks + 1
        if ticks >= state.timeout_ticks:
            return _fail(state, "handshake timed out")
        return Transition(replace(state, idle_ticks=ticks))
    raise TypeError(f"unknown event {event!r}")


def describe_frame(data: bytes) -> str:
    if data[:4] == PAIRING_MAGIC:
        return "PAIRING"
    try:
        ftype, payload = decode_session_frame(data)
    except FrameMalformed:
        return "MALFORMED"
    return f"{FRAME_NAMES[ftype]}({len(payload)}B)"
