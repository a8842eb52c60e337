"""Group law on the supersingular curve E: y^2 = x^3 + 1.

Points live over F_p or F_p^2 and come in two shapes:

* :class:`CurvePoint` -- affine ``(x, y)`` or the point at infinity;
* :class:`JacobianPoint` -- ``(X, Y, Z)`` standing for ``(X/Z^2, Y/Z^3)``,
  infinity being ``(1, 1, 0)``.

:func:`point_add` and :func:`scalar_mul` accept either shape and return the
shape they were given.
"""

from __future__ import annotations

import hashlib
import random
from functools import lru_cache
from typing import Optional, Tuple, Union

from .errors import HashToPointFailure, MalformedBlob, ParamError, ParamMismatch
from .field import (
    FieldElement,
    Fp2Element,
    PrimeModulus,
    fp_cbrt,
    fp_sqrt,
    int_to_bytes,
)

Coord = Union[FieldElement, Fp2Element]

__all__ = [
    "CurvePoint",
    "JacobianPoint",
    "point_add",
    "point_neg",
    "scalar_mul",
    "to_jacobian",
    "to_affine",
    "hash_to_point",
    "distortion_map",
    "zeta",
    "random_point",
    "enumerate_points",
    "encode_point",
    "decode_point",
]


def _field_name(c) -> str:
    return "Fp2" if isinstance(c, Fp2Element) else "Fp"


def _lift(value: int, modulus: PrimeModulus, base_field: str) -> Coord:
    if base_field == "Fp2":
        return Fp2Element(value, 0, modulus)
    return FieldElement(value, modulus)


class CurvePoint:
    """Affine point on E, or the point at infinity (``x = y = None``)."""

    __slots__ = ("x", "y", "modulus", "base_field")

    def __init__(self, x: Optional[Coord], y: Optional[Coord], modulus: Optional[PrimeModulus] = None,
                 base_field: Optional[str] = None, *, check: bool = True) -> None:
        if x is None:
            if modulus is None:
                raise ParamError("the point at infinity needs an explicit modulus")
            self.x = self.y = None
            self.modulus = modulus
            self.base_field = base_field or "Fp"
            return
        if type(x) is not type(y):
            raise ParamMismatch("coordinates from different fields")
        self.x = x
        self.y = y
        self.modulus = x.modulus
        self.base_field = _field_name(x)
        if check and not self.is_on_curve():
            raise ValueError(f"point {self!r} is not on y^2 = x^3 + 1")

    @classmethod
    def infinity(cls, modulus: PrimeModulus, base_field: str = "Fp") -> "CurvePoint":
        return cls(None, None, modulus, base_field)

    @classmethod
    def from_ints(cls, x: int, y: int, modulus: PrimeModulus) -> "CurvePoint":
        return cls(FieldElement(x, modulus), FieldElement(y, modulus))

    @property
    def is_infinity(self) -> bool:
        return self.x is None

    def is_on_curve(self) -> bool:
        if self.x is None:
            return True
        return self.y.square() == self.x.square() * self.x + 1

    def __add__(self, other: "CurvePoint") -> "CurvePoint":
        return point_add(self, other)

    def __neg__(self) -> "CurvePoint":
        return point_neg(self)

    def __sub__(self, other: "CurvePoint") -> "CurvePoint":
        return point_add(self, point_neg(other))

    def __rmul__(self, k: int) -> "CurvePoint":
        return scalar_mul(k, self)

    def __eq__(self, other) -> bool:
        if isinstance(other, JacobianPoint):
            other = to_affine(other)
        if not isinstance(other, CurvePoint):
            return NotImplemented
        if self.x is None or other.x is None:
            return self.x is None and other.x is None and self.modulus.p == other.modulus.p
        return self.x == other.x and self.y == other.y

    def __hash__(self) -> int:
        if self.x is None:
            return hash(("inf", self.modulus.p))
        return hash((self.x, self.y))

    def __repr__(self) -> str:
        if self.x is None:
            return f"CurvePoint(inf/{self.base_field})"
        return f"CurvePoint({self.x!r}, {self.y!r})"


class JacobianPoint:
    """``(X, Y, Z)`` with ``Y^2 = X^3 + Z^6``; ``Z = 0`` is infinity."""

    __slots__ = ("X", "Y", "Z", "modulus", "base_field")

    def __init__(self, X: Coord, Y: Coord, Z: Coord) -> None:
        self.X, self.Y, self.Z = X, Y, Z
        self.modulus = X.modulus
        self.base_field = _field_name(X)

    @classmethod
    def infinity(cls, modulus: PrimeModulus, base_field: str = "Fp") -> "JacobianPoint":
        one = _lift(1, modulus, base_field)
        return cls(one, one, one.zero())

    @property
    def is_infinity(self) -> bool:
        return self.Z.is_zero()

    def is_on_curve(self) -> bool:
        if self.is_infinity:
            return True
        z2 = self.Z.square()
        z6 = z2.square() * z2
        return self.Y.square() == self.X.square() * self.X + z6

    def __add__(self, other):
        return point_add(self, other)

    def __neg__(self):
        return point_neg(self)

    def __rmul__(self, k: int):
        return scalar_mul(k, self)

    def __eq__(self, other) -> bool:
        if isinstance(other, (JacobianPoint, CurvePoint)):
            return to_affine(self) == other
        return NotImplemented

    def __hash__(self) -> int:
        return hash(to_affine(self))

    def __repr__(self) -> str:
        return f"JacobianPoint({self.X!r}, {self.Y!r}, {self.Z!r})"


# -- conversions ----------------------------------------------------------------


def to_jacobian(P: Union[CurvePoint, JacobianPoint]) -> JacobianPoint:
    if isinstance(P, JacobianPoint):
        return P
    if P.is_infinity:
        return JacobianPoint.infinity(P.modulus, P.base_field)
    return JacobianPoint(P.x, P.y, P.x.one())


def to_affine(P: Union[CurvePoint, JacobianPoint]) -> CurvePoint:
    if isinstance(P, CurvePoint):
        return P
    if P.is_infinity:
        return CurvePoint.infinity(P.modulus, P.base_field)
    zi = P.Z.inverse()
    zi2 = zi.square()
    return CurvePoint(P.X * zi2, P.Y * zi2 * zi, check=False)


# -- affine group law -------------------------------------------------------------


def _check_compatible(P, Q) -> None:
    if P.modulus.p != Q.modulus.p or P.base_field != Q.base_field:
        raise ParamMismatch("points over different fields")


def point_neg(P):
    if isinstance(P, JacobianPoint):
        return JacobianPoint(P.X, -P.Y, P.Z)
    if P.is_infinity:
        return P
    return CurvePoint(P.x, -P.y, check=False)


def affine_add_with_slope(P: CurvePoint, Q: CurvePoint) -> Tuple[CurvePoint, Optional[Coord]]:
    """``P + Q`` together with the chord/tangent slope used.

    The slope is ``None`` when the line through P and Q is vertical (result
    at infinity) or when either input already is infinity.
    """
    if P.is_infinity:
        return Q, None
    if Q.is_infinity:
        return P, None
    if P.x == Q.x:
        if P.y != Q.y or P.y.is_zero():
            return CurvePoint.infinity(P.modulus, P.base_field), None
        x2 = P.x.square()
        lam = (x2 + x2 + x2) / (P.y + P.y)
    else:
        lam = (Q.y - P.y) / (Q.x - P.x)
    x3 = lam.square() - P.x - Q.x
    y3 = lam * (P.x - x3) - P.y
    return CurvePoint(x3, y3, check=False), lam


def _affine_add(P: CurvePoint, Q: CurvePoint) -> CurvePoint:
    return affine_add_with_slope(P, Q)[0]


# -- Jacobian group law (a = 0) ---------------------------------------------------


def jacobian_double(P: JacobianPoint) -> JacobianPoint:
    if P.is_infinity or P.Y.is_zero():
        return JacobianPoint.infinity(P.modulus, P.base_field)
    X, Y, Z = P.X, P.Y, P.Z
    A = X.square()
    B = Y.square()
    C = B.square()
    D = (X + B).square() - A - C
    D = D + D
    E = A + A + A
    X3 = E.square() - D - D
    C8 = C + C
    C8 = C8 + C8
    C8 = C8 + C8
    Y3 = E * (D - X3) - C8
    YZ = Y * Z
    return JacobianPoint(X3, Y3, YZ + YZ)


def jacobian_add(P: JacobianPoint, Q: JacobianPoint) -> JacobianPoint:
    if P.is_infinity:
        return Q
    if Q.is_infinity:
        return P
    Z1Z1 = P.Z.square()
    Z2Z2 = Q.Z.square()
    U1 = P.X * Z2Z2
    U2 = Q.X * Z1Z1
    S1 = P.Y * Q.Z * Z2Z2
    S2 = Q.Y * P.Z * Z1Z1
    H = U2 - U1
    r = S2 - S1
    if H.is_zero():
        if r.is_zero():
            return jacobian_double(P)
        return JacobianPoint.infinity(P.modulus, P.base_field)
    HH = H.square()
    HHH = HH * H
    V = U1 * HH
    X3 = r.square() - HHH - V - V
    Y3 = r * (V - X3) - S1 * HHH
    Z3 = P.Z * Q.Z * H
    return JacobianPoint(X3, Y3, Z3)


def point_add(P, Q):
    """Group addition; Jacobian if either input is Jacobian, else affine."""
    _check_compatible(P, Q)
    if isinstance(P, JacobianPoint) or isinstance(Q, JacobianPoint):
        return jacobian_add(to_jacobian(P), to_jacobian(Q))
    return _affine_add(P, Q)


def scalar_mul(k: int, P, coords: Optional[str] = None):
    """``k * P`` by left-to-right double-and-add.

    ``coords`` forces the intermediate representation ("affine" or
    "jacobian"); by default affine inputs are processed in Jacobian form and
    converted back.  The output has the same shape as ``P``.
    """
    if k < 0:
        return scalar_mul(-k, point_neg(P), coords)
    jac_in = isinstance(P, JacobianPoint)
    mode = coords or "jacobian"
    if mode == "affine":
        A = to_affine(P)
        R = CurvePoint.infinity(A.modulus, A.base_field)
        for bit in bin(k)[2:] if k else "":
            R = _affine_add(R, R)
            if bit == "1":
                R = _affine_add(R, A)
        return to_jacobian(R) if jac_in else R
    if mode != "jacobian":
        raise ValueError(f"unknown coordinate system {coords!r}")
    J = to_jacobian(P)
    R = JacobianPoint.infinity(J.modulus, J.base_field)
    for bit in bin(k)[2:] if k else "":
        R = jacobian_double(R)
        if bit == "1":
            R = jacobian_add(R, J)
    return R if jac_in else to_affine(R)


# -- special maps ------------------------------------------------------------


@lru_cache(maxsize=64)
def _zeta(modulus: PrimeModulus) -> Fp2Element:
    root3 = fp_sqrt(FieldElement(3, modulus))
    if root3 is None:
        raise ParamError("3 is not a square mod p; p must be 11 mod 12")
    half = pow(2, -1, modulus.p)
    return Fp2Element(-half, root3.value * half, modulus)


def zeta(modulus: PrimeModulus) -> Fp2Element:
    """Primitive cube root of unity ``(-1 + sqrt(3) i) / 2`` in F_p^2."""
    return _zeta(modulus)


def distortion_map(P: CurvePoint) -> CurvePoint:
    """``(x, y) -> (zeta*x, y)``: maps E(F_p) into E(F_p^2) off P's cyclic group."""
    if P.base_field != "Fp":
        raise ParamMismatch("distortion map expects a point over F_p")
    if P.is_infinity:
        return CurvePoint.infinity(P.modulus, "Fp2")
    z = _zeta(P.modulus)
    return CurvePoint(z * P.x, Fp2Element(P.y.value, 0, P.modulus), check=False)


def lift_to_fp2(P: CurvePoint) -> CurvePoint:
    """Embed a point of E(F_p) into E(F_p^2) unchanged."""
    if P.is_infinity:
        return CurvePoint.infinity(P.modulus, "Fp2")
    m = P.modulus
    return CurvePoint(Fp2Element(P.x.value, 0, m), Fp2Element(P.y.value, 0, m), check=False)


def _point_from_y(y: FieldElement) -> CurvePoint:
    # p = 2 mod 3 makes cubing a bijection, so every y has exactly one x
    x = fp_cbrt(y.square() - 1)
    return CurvePoint(x, y, check=False)


HASH_TO_POINT_RETRIES = 256


def _expand(data: bytes, nbytes: int, hash_name: str) -> int:
    out = b""
    block = 0
    while len(out) < nbytes:
        out += hashlib.new(hash_name, data + bytes([block])).digest()
        block += 1
    return int.from_bytes(out[:nbytes], "big")


def hash_to_point(identity: bytes, modulus: PrimeModulus, hash_name: str = "sha256") -> CurvePoint:
    """Deterministically map a byte string to a point of order q in E(F_p).

    ``y`` is derived from ``H(identity | counter)``, ``x`` is the unique cube
    root of ``y^2 - 1``, and the cofactor is cleared; the counter advances only
    if clearing lands on infinity.
    """
    if not identity:
        raise ValueError("identity must be non-empty")
    if not modulus.q:
        raise ParamError("hash_to_point needs a modulus with a subgroup order")
    nbytes = modulus.byte_length + 16
    for counter in range(HASH_TO_POINT_RETRIES):
        y = FieldElement(_expand(identity + bytes([counter]), nbytes, hash_name), modulus)
        Q = scalar_mul(modulus.cofactor, _point_from_y(y))
        if not Q.is_infinity:
            return Q
    raise HashToPointFailure(f"no point of order q after {HASH_TO_POINT_RETRIES} counters")


def random_point(modulus: PrimeModulus, rng: random.Random) -> CurvePoint:
    """Uniform point of order exactly q."""
    while True:
        y = FieldElement(rng.randrange(modulus.p), modulus)
        Q = scalar_mul(modulus.cofactor, _point_from_y(y))
        if not Q.is_infinity:
            return Q


def enumerate_points(modulus: PrimeModulus) -> list:
    """All points of E(F_p) by brute force (small p only), infinity first."""
    p = modulus.p
    squares: dict = {}
    for y in range(p):
        squares.setdefault(y * y % p, []).append(y)
    pts = [CurvePoint.infinity(modulus)]
    for x in range(p):
        for y in squares.get((x * x * x + 1) % p, []):
            pts.append(CurvePoint.from_ints(x, y, modulus))
    return pts


# -- wire encoding ----------------------------------------------------------------

TAG_INFINITY = 0x00
TAG_EVEN = 0x02
TAG_ODD = 0x03
TAG_UNCOMPRESSED = 0x04


def encode_point(P, compressed: bool = True) -> bytes:
    """SEC-style encoding of a point of E(F_p), fixed-width big-endian."""
    P = to_affine(P)
    if P.base_field != "Fp":
        raise ParamMismatch("only points over F_p have a wire encoding")
    if P.is_infinity:
        return bytes([TAG_INFINITY])
    w = P.modulus.byte_length
    if compressed:
        return bytes([TAG_EVEN | (P.y.value & 1)]) + int_to_bytes(P.x.value, w)
    return bytes([TAG_UNCOMPRESSED]) + int_to_bytes(P.x.value, w) + int_to_bytes(P.y.value, w)


def encoded_point_length(tag: int, modulus: PrimeModulus) -> int:
    w = modulus.byte_length
    return {TAG_INFINITY: 1, TAG_EVEN: 1 + w, TAG_ODD: 1 + w, TAG_UNCOMPRESSED: 1 + 2 * w}.get(tag, -1)


def decode_point_at(buf: bytes, offset: int, modulus: PrimeModulus) -> Tuple[CurvePoint, int]:
    """Decode the point starting at ``offset``; returns (point, end offset)."""
    if offset >= len(buf):
        raise MalformedBlob("missing point tag")
    tag = buf[offset]
    n = encoded_point_length(tag, modulus)
    if n < 0 or offset + n > len(buf):
        raise MalformedBlob(f"bad point tag or length (tag {tag:#x})")
    if tag == TAG_INFINITY:
        return CurvePoint.infinity(modulus), offset + 1
    w = modulus.byte_length
    xv = int.from_bytes(buf[offset + 1 : offset + 1 + w], "big")
    if xv >= modulus.p:
        raise MalformedBlob("x coordinate out of range")
    x = FieldElement(xv, modulus)
    if tag == TAG_UNCOMPRESSED:
        yv = int.from_bytes(buf[offset + 1 + w : offset + 1 + 2 * w], "big")
        if yv >= modulus.p:
            raise MalformedBlob("y coordinate out of range")
        P = CurvePoint(x, FieldElement(yv, modulus), check=False)
        if not P.is_on_curve():
            raise MalformedBlob("point not on curve")
        return P, offset + n
    y = fp_sqrt(x.square() * x + 1)
    if y is None:
        raise MalformedBlob("x coordinate has no point on the curve")
    if (y.value & 1) != (tag & 1):
        if y.is_zero():
            raise MalformedBlob("odd tag for y = 0")
        y = -y
    return CurvePoint(x, y, check=False), offset + n


def decode_point(data: bytes, modulus: PrimeModulus) -> CurvePoint:
    P, end = decode_point_at(data, 0, modulus)
    if end != len(data):
        raise MalformedBlob("trailing bytes after point")
    return P
