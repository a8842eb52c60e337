"""Boneh-Franklin identity-based encryption with a hybrid payload.

The pairing only ever masks a fresh 32-byte content encryption key (CEK);
the message itself goes through AES-256-GCM under that CEK.  Ciphertext
layout::

    0x01 | fingerprint(8) | nonce(12) | U (compressed point) | V(32) | len(4) | W

where ``U = rP``, ``V = CEK xor H2(e(Q_ID, P_pub)^r)`` and ``W`` is the GCM
output.  Everything before ``W`` is bound to ``W`` as associated data, so a
modified ciphertext never decrypts to anything.
"""

from __future__ import annotations

import hashlib
import random
import struct
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Tuple, Union

from .curve import (
    CurvePoint,
    decode_point_at,
    encode_point,
    hash_to_point,
    random_point,
    scalar_mul,
)
from .errors import (
    MalformedBlob,
    MalformedCiphertext,
    RngFailure,
    SetupError,
    ZeroEvaluation,
)
from .field import PrimeModulus, decode_modulus, encode_modulus, find_group_prime, int_to_bytes
from .identity import normalize_identity
from .pairing import PairingPrecomp, precompute, tate_pairing
from . import suite

__all__ = [
    "SystemParams",
    "MasterKey",
    "IdentityPrivateKey",
    "IbeCiphertext",
    "setup",
    "extract",
    "derive_public_key",
    "verify_private_key",
    "encrypt",
    "decrypt",
]

CEK_LEN = 32
CT_VERSION = 1
MAX_MESSAGE = 2**32 - 1
SETUP_REDRAWS = 64


@dataclass(frozen=True, eq=False)
class SystemParams:
    """Public IBE environment published by the PKG."""

    modulus: PrimeModulus
    P: CurvePoint
    P_pub: CurvePoint
    hash_suite_id: int = suite.SUITE_SHA256_AESGCM

    @property
    def hash_name(self) -> str:
        return suite.hash_name(self.hash_suite_id)

    @cached_property
    def blob(self) -> bytes:
        """``IBCF`` modulus blob, then suite id, P and P_pub (uncompressed)."""
        return (
            encode_modulus(self.modulus)
            + bytes([self.hash_suite_id])
            + encode_point(self.P, compressed=False)
            + encode_point(self.P_pub, compressed=False)
        )

    def to_bytes(self) -> bytes:
        return self.blob

    @cached_property
    def fingerprint(self) -> bytes:
        return hashlib.sha256(self.blob).digest()[:8]

    @cached_property
    def pub_precomp(self) -> PairingPrecomp:
        return precompute(self.P_pub)

    @classmethod
    def from_bytes(cls, blob: bytes, offset: int = 0, *, with_end: bool = False):
        modulus, off = decode_modulus(blob, offset)
        if off >= len(blob):
            raise MalformedBlob("params blob truncated before suite id")
        suite_id = blob[off]
        suite.hash_name(suite_id)
        P, off = decode_point_at(blob, off + 1, modulus)
        P_pub, off = decode_point_at(blob, off, modulus)
        params = cls(modulus, P, P_pub, suite_id)
        if not with_end and off != len(blob):
            raise MalformedBlob("trailing bytes after params")
        params.check()
        return (params, off) if with_end else params

    def check(self) -> None:
        """Raise :class:`MalformedBlob` unless the public invariants hold."""
        q = self.modulus.q
        for name, pt in (("P", self.P), ("P_pub", self.P_pub)):
            if pt.is_infinity or not pt.is_on_curve() or not scalar_mul(q, pt).is_infinity:
                raise MalformedBlob(f"{name} is not a point of order q")
        if _degenerate(self.P):
            raise MalformedBlob("generator is degenerate under the pairing")

    def __eq__(self, other) -> bool:
        return isinstance(other, SystemParams) and self.blob == other.blob

    def __hash__(self) -> int:
        return hash(self.blob)


@dataclass(frozen=True)
class MasterKey:
    s: int = field(repr=False)

    def to_bytes(self, modulus: PrimeModulus) -> bytes:
        return int_to_bytes(self.s, (modulus.q.bit_length() + 7) // 8)


@dataclass(frozen=True, eq=False)
class IdentityPrivateKey:
    identity: str
    S_ID: CurvePoint

    @cached_property
    def precomp(self) -> PairingPrecomp:
        return precompute(self.S_ID)

    def to_bytes(self, params: SystemParams) -> bytes:
        ident = self.identity.encode("ascii")
        return b"IBCK\x01" + params.fingerprint + bytes([len(ident)]) + ident + encode_point(self.S_ID)

    @classmethod
    def from_bytes(cls, blob: bytes, params: SystemParams) -> "IdentityPrivateKey":
        if blob[:5] != b"IBCK\x01" or len(blob) < 14:
            raise MalformedBlob("not a private key blob")
        if blob[5:13] != params.fingerprint:
            raise MalformedBlob("key was issued under different parameters")
        n = blob[13]
        ident = blob[14 : 14 + n]
        if len(ident) != n:
            raise MalformedBlob("truncated identity")
        S, end = decode_point_at(blob, 14 + n, params.modulus)
        if end != len(blob):
            raise MalformedBlob("trailing bytes after key")
        return cls(normalize_identity(ident.decode("ascii", "replace")), S)

    def __eq__(self, other) -> bool:
        return isinstance(other, IdentityPrivateKey) and (self.identity, self.S_ID) == (other.identity, other.S_ID)

    def __hash__(self) -> int:
        return hash((self.identity, self.S_ID))


@dataclass(frozen=True)
class IbeCiphertext:
    fingerprint: bytes
    nonce: bytes
    U: CurvePoint
    V: bytes
    W: bytes
    version: int = CT_VERSION

    def _aad(self) -> bytes:
        return (
            bytes([self.version])
            + self.fingerprint
            + self.nonce
            + encode_point(self.U)
            + self.V
            + struct.pack(">I", len(self.W))
        )

    def to_bytes(self) -> bytes:
        return self._aad() + self.W

    @classmethod
    def from_bytes(cls, data: bytes, params: SystemParams) -> "IbeCiphertext":
        if len(data) < 21:
            raise MalformedCiphertext("ciphertext shorter than its header")
        if data[0] != CT_VERSION:
            raise MalformedCiphertext(f"unknown ciphertext version {data[0]}")
        fp, nonce = data[1:9], data[9:21]
        if fp != params.fingerprint:
            raise MalformedCiphertext("ciphertext made for different parameters")
        try:
            U, off = decode_point_at(data, 21, params.modulus)
        except MalformedBlob as exc:
            raise MalformedCiphertext(f"bad U: {exc}") from None
        if U.is_infinity or not scalar_mul(params.modulus.q, U).is_infinity:
            raise MalformedCiphertext("U is not a point of order q")
        V = data[off : off + CEK_LEN]
        off += CEK_LEN
        if len(V) != CEK_LEN or off + 4 > len(data):
            raise MalformedCiphertext("truncated ciphertext")
        (n,) = struct.unpack_from(">I", data, off)
        W = data[off + 4 :]
        if len(W) != n:
            raise MalformedCiphertext("payload length mismatch")
        return cls(fp, nonce, U, V, W)


def _rng(rng: Optional[random.Random]) -> random.Random:
    return rng if rng is not None else random.SystemRandom()


def _draw(rng: random.Random, what: str, fn, *args):
    try:
        return fn(*args)
    except Exception as exc:  # any failure of the entropy source
        raise RngFailure(f"random source failed while drawing {what}: {exc}") from exc


def _degenerate(P: CurvePoint) -> bool:
    try:
        return tate_pairing(P, P).is_one()
    except ZeroEvaluation:
        return True


def setup(q_bits: int, p_bits: int, rng: Optional[random.Random] = None) -> Tuple[SystemParams, MasterKey]:
    """Generate (p, q), a non-degenerate generator P, master key s and sP."""
    rng = _rng(rng)
    modulus = find_group_prime(q_bits, p_bits, rng)
    for _ in range(SETUP_REDRAWS):
        P = random_point(modulus, rng)
        if not _degenerate(P):
            break
    else:
        raise SetupError("every generator drawn was degenerate")
    s = rng.randrange(1, modulus.q)
    return SystemParams(modulus, P, scalar_mul(s, P)), MasterKey(s)


def derive_public_key(params: SystemParams, identity: str) -> CurvePoint:
    """Q_ID: the identity's point of order q."""
    ident = normalize_identity(identity)
    return hash_to_point(ident.encode("ascii"), params.modulus, params.hash_name)


def extract(params: SystemParams, master: MasterKey, identity: str) -> IdentityPrivateKey:
    ident = normalize_identity(identity)
    return IdentityPrivateKey(ident, scalar_mul(master.s, derive_public_key(params, ident)))


def verify_private_key(params: SystemParams, key: IdentityPrivateKey) -> bool:
    """Check ``e(S_ID, P) = e(Q_ID, P_pub)`` without the master key."""
    Q = derive_public_key(params, key.identity)
    return tate_pairing(key.S_ID, params.P) == tate_pairing(params.P_pub, Q, params.pub_precomp)


def encrypt(
    params: SystemParams,
    recipient_identity: str,
    message: bytes,
    rng: Optional[random.Random] = None,
) -> IbeCiphertext:
    if len(message) > MAX_MESSAGE:
        raise ValueError("message longer than 2^32 - 1 bytes")
    rng = _rng(rng)
    Q = derive_public_key(params, recipient_identity)
    cek = _draw(rng, "CEK", rng.randbytes, CEK_LEN)
    r = _draw(rng, "r", rng.randrange, 1, params.modulus.q)
    nonce = _draw(rng, "nonce", rng.randbytes, suite.NONCE_LEN)
    if len(cek) != CEK_LEN or len(nonce) != suite.NONCE_LEN:
        raise RngFailure("random source returned short output")
    U = scalar_mul(r, params.P)
    g = tate_pairing(params.P_pub, Q, params.pub_precomp)
    V = suite.xor(cek, suite.h2((g**r).to_bytes(), params.hash_suite_id))
    shell = IbeCiphertext(params.fingerprint, nonce, U, V, b"\x00" * (len(message) + 16))
    W = suite.aead_seal(cek, nonce, message, shell._aad())
    return IbeCiphertext(params.fingerprint, nonce, U, V, W)


def decrypt(
    params: SystemParams,
    key: IdentityPrivateKey,
    ct: Union[IbeCiphertext, bytes],
) -> bytes:
    """Recover the message; any tampering raises AuthenticationFailure."""
    if not isinstance(ct, IbeCiphertext):
        ct = IbeCiphertext.from_bytes(bytes(ct), params)
    elif ct.fingerprint != params.fingerprint or len(ct.V) != CEK_LEN or len(ct.nonce) != suite.NONCE_LEN:
        raise MalformedCiphertext("ciphertext fields do not match the parameters")
    g = tate_pairing(key.S_ID, ct.U, key.precomp)
    cek = suite.xor(ct.V, suite.h2(g.to_bytes(), params.hash_suite_id))
    return suite.aead_open(cek, ct.nonce, ct.W, ct._aad())
