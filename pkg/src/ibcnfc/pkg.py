"""Private Key Generator: holds the master key and answers framed requests.

Request frame::

    len(4) | opcode(1) | fields...
        EXTRACT    0x01: len(4) token | len(4) identity
        GET_PARAMS 0x02: (no fields)

Response frame::

    len(4) | status(1) | len(4) payload

All lengths are big-endian and ``len`` at the front counts the bytes after
itself.  :func:`handle_request` turns every bad input into a status code and
never raises.
"""

from __future__ import annotations

import hmac
import logging
import random
import socket
import socketserver
import struct
import threading
from dataclasses import dataclass, replace
from typing import Iterable, Optional, Tuple

from .errors import IbcError, InvalidIdentity, MalformedBlob
from .ibe import MasterKey, SystemParams, extract, setup

log = logging.getLogger(__name__)

OP_EXTRACT = 0x01
OP_GET_PARAMS = 0x02

STATUS_OK = 0x00
STATUS_AUTH_FAIL = 0x01
STATUS_BAD_IDENTITY = 0x02
STATUS_MALFORMED = 0x03

MAX_FRAME = 1 << 16
MAX_TOKEN = 1024
MAX_IDENTITY = 64

STATE_MAGIC = b"IBCS"
STATE_VERSION = 1


@dataclass(frozen=True)
class PkgState:
    params: SystemParams
    master: MasterKey
    auth_tokens: frozenset
    issue_log: tuple = ()

    def to_bytes(self) -> bytes:
        """``IBCS | 0x01 | len params | params | len s | s | count | tokens``."""
        pblob = self.params.to_bytes()
        s = self.master.to_bytes(self.params.modulus)
        out = [STATE_MAGIC, bytes([STATE_VERSION]), struct.pack(">I", len(pblob)), pblob]
        out += [struct.pack(">I", len(s)), s, struct.pack(">I", len(self.auth_tokens))]
        for tok in sorted(self.auth_tokens):
            out += [struct.pack(">I", len(tok)), tok]
        return b"".join(out)

    @classmethod
    def from_bytes(cls, blob: bytes) -> "PkgState":
        if blob[:4] != STATE_MAGIC or blob[4:5] != bytes([STATE_VERSION]):
            raise MalformedBlob("not a PKG state blob")
        off = 5
        chunks = []

        def take() -> bytes:
            nonlocal off
            if off + 4 > len(blob):
                raise MalformedBlob("truncated state blob")
            (n,) = struct.unpack_from(">I", blob, off)
            off += 4
            if off + n > len(blob):
                raise MalformedBlob("truncated state blob")
            chunk = blob[off : off + n]
            off += n
            return chunk

        params = SystemParams.from_bytes(take())
        s = int.from_bytes(take(), "big")
        if not 1 <= s < params.modulus.q:
            raise MalformedBlob("master key out of range")
        if off + 4 > len(blob):
            raise MalformedBlob("truncated state blob")
        (count,) = struct.unpack_from(">I", blob, off)
        off += 4
        for _ in range(count):
            chunks.append(take())
        if off != len(blob):
            raise MalformedBlob("trailing bytes in state blob")
        return cls(params, MasterKey(s), frozenset(chunks))


def pkg_init(q_bits: int, p_bits: int, tokens: Iterable[bytes], rng: Optional[random.Random] = None) -> PkgState:
    tokens = frozenset(bytes(t) for t in tokens)
    if not tokens:
        raise ValueError("a PKG needs at least one authentication token")
    params, master = setup(q_bits, p_bits, rng)
    return PkgState(params, master, tokens)


# -- frames ---------------------------------------------------------------


def _field(data: bytes) -> bytes:
    return struct.pack(">I", len(data)) + data


def frame(body: bytes) -> bytes:
    return struct.pack(">I", len(body)) + body


def extract_request(token: bytes, identity: str) -> bytes:
    ident = identity.encode("utf-8") if isinstance(identity, str) else bytes(identity)
    return frame(bytes([OP_EXTRACT]) + _field(token) + _field(ident))


def params_request() -> bytes:
    return frame(bytes([OP_GET_PARAMS]))


def response(status: int, payload: bytes = b"") -> bytes:
    return frame(bytes([status]) + _field(payload))


def parse_response(data: bytes) -> Tuple[int, bytes]:
    if len(data) < 9:
        raise MalformedBlob("response too short")
    (n,) = struct.unpack_from(">I", data, 0)
    if n != len(data) - 4:
        raise MalformedBlob("response length mismatch")
    (m,) = struct.unpack_from(">I", data, 5)
    if m != len(data) - 9:
        raise MalformedBlob("response payload length mismatch")
    return data[4], data[9:]


class _Malformed(Exception):
    pass


def _split_fields(body: bytes, count: int, limits: Tuple[int, ...]) -> list:
    fields, off = [], 0
    for i in range(count):
        if off + 4 > len(body):
            raise _Malformed
        (n,) = struct.unpack_from(">I", body, off)
        off += 4
        if n > limits[i] or off + n > len(body):
            raise _Malformed
        fields.append(body[off : off + n])
        off += n
    if off != len(body):
        raise _Malformed
    return fields


def _token_ok(state: PkgState, token: bytes) -> bool:
    ok = False
    for t in state.auth_tokens:
        ok |= hmac.compare_digest(t, token)
    return ok


def handle_request(state: PkgState, data: bytes, timestamp: Optional[float] = None) -> Tuple[PkgState, bytes]:
    """One request/response transition.

    ``timestamp`` is recorded in the issue log; by default a logical clock
    (the log length) is used so the transition stays a pure function.
    """
    try:
        if len(data) < 5 or len(data) > MAX_FRAME + 4:
            raise _Malformed
        (n,) = struct.unpack_from(">I", data, 0)
        if n != len(data) - 4:
            raise _Malformed
        op, body = data[4], data[5:]
        if op == OP_GET_PARAMS:
            if body:
                raise _Malformed
            return state, response(STATUS_OK, state.params.to_bytes())
        if op != OP_EXTRACT:
            raise _Malformed
        token, ident_raw = _split_fields(body, 2, (MAX_TOKEN, MAX_IDENTITY))
    except _Malformed:
        return state, response(STATUS_MALFORMED)

    if not _token_ok(state, token):
        return state, response(STATUS_AUTH_FAIL)
    try:
        key = extract(state.params, state.master, ident_raw.decode("ascii"))
    except (UnicodeDecodeError, InvalidIdentity):
        return state, response(STATUS_BAD_IDENTITY)
    except IbcError:  # pragma: no cover - defensive
        log.exception("extraction failed")
        return state, response(STATUS_MALFORMED)
    when = len(state.issue_log) if timestamp is None else timestamp
    state = replace(state, issue_log=state.issue_log + ((key.identity, when),))
    return state, response(STATUS_OK, key.to_bytes(state.params))


class PkgService:
    """Serializes requests against one mutable PKG state."""

    def __init__(self, state: PkgState) -> None:
        self._state = state
        self._lock = threading.Lock()
        self._params_reply = response(STATUS_OK, state.params.to_bytes())

    @property
    def state(self) -> PkgState:
        return self._state

    def __call__(self, data: bytes) -> bytes:
        if data == params_request():
            return self._params_reply
        with self._lock:
            self._state, reply = handle_request(self._state, data)
        return reply


# -- stream socket transport -------------------------------------------------


def _recv_exact(sock, n: int) -> bytes:
    buf = b""
    while len(buf) < n:
        chunk = sock.recv(n - len(buf))
        if not chunk:
            break
        buf += chunk
    return buf


def read_frame(sock) -> bytes:
    head = _recv_exact(sock, 4)
    if len(head) < 4:
        return head
    (n,) = struct.unpack(">I", head)
    if n > MAX_FRAME:
        return head
    return head + _recv_exact(sock, n)


class _Handler(socketserver.BaseRequestHandler):
    def handle(self) -> None:
        while True:
            data = read_frame(self.request)
            if not data:
                return
            self.request.sendall(self.server.service(data))
            if len(data) < 4:
                return


def make_server(service: PkgService, host: str = "127.0.0.1", port: int = 0) -> socketserver.TCPServer:
    """A single-threaded TCP server; one request at a time."""
    server = socketserver.TCPServer((host, port), _Handler)
    server.service = service  # type: ignore[attr-defined]
    return server


def request(address: Tuple[str, int], data: bytes, timeout: float = 10.0) -> bytes:
    with socket.create_connection(address, timeout=timeout) as sock:
        sock.sendall(data)
        return read_frame(sock)
