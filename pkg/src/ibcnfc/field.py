"""Arithmetic in F_p and F_p^2 = F_p[i]/(i^2 + 1), and (p, q) generation.

Elements are immutable.  ``FieldElement`` wraps a canonical residue in
``[0, p)``; ``Fp2Element`` stores ``re + im*i`` as two canonical integers.
Both carry a reference to the :class:`PrimeModulus` they belong to and refuse
to mix with elements of another modulus.

Every multiplication, squaring and inversion is tallied in :data:`OPS` so the
pairing code can be compared by operation count instead of wall clock.
"""

from __future__ import annotations

import math
import random
import struct
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Iterator, Optional, Union

from .errors import DivisionByZero, MalformedBlob, ParamError, ParamMismatch, SearchExhausted

__all__ = [
    "PrimeModulus",
    "FieldElement",
    "Fp2Element",
    "OPS",
    "counting",
    "fp_ops",
    "fp2_ops",
    "fp_sqrt",
    "fp_cbrt",
    "is_probable_prime",
    "is_solinas",
    "find_group_prime",
    "int_to_bytes",
    "encode_modulus",
    "decode_modulus",
]


# -- operation counters ---------------------------------------------------


class OpCounter:
    """Running tally of base-field multiplications, squarings, inversions."""

    __slots__ = ("mul", "sqr", "inv")

    def __init__(self) -> None:
        self.mul = 0
        self.sqr = 0
        self.inv = 0

    def snapshot(self) -> dict:
        return {"mul": self.mul, "sqr": self.sqr, "inv": self.inv}

    def __repr__(self) -> str:
        return f"OpCounter(mul={self.mul}, sqr={self.sqr}, inv={self.inv})"


OPS = OpCounter()


@contextmanager
def counting() -> Iterator[dict]:
    """Collect the F_p operations performed inside the ``with`` block.

    The yielded dict is filled in on exit::

        with counting() as ops:
            tate_pairing(P, Q)
        ops["mul"], ops["sqr"], ops["inv"]
    """
    before = OPS.snapshot()
    delta: dict = {}
    try:
        yield delta
    finally:
        after = OPS.snapshot()
        delta.update({k: after[k] - before[k] for k in after})


# -- modulus ----------------------------------------------------------------


@dataclass(frozen=True)
class PrimeModulus:
    """The pair (p, q): field characteristic and prime subgroup order.

    ``q`` divides ``p + 1``; ``cofactor = (p + 1) // q``.  For plain field
    work (no group structure needed) ``q`` may be left at 0.
    """

    p: int
    q: int = 0
    cofactor: int = 0

    def __post_init__(self) -> None:
        if self.p < 3:
            raise ParamError(f"modulus too small: {self.p}")
        if self.q and not self.cofactor:
            if (self.p + 1) % self.q:
                raise ParamError(f"q={self.q} does not divide p+1")
            object.__setattr__(self, "cofactor", (self.p + 1) // self.q)

    @property
    def bit_length(self) -> int:
        return self.p.bit_length()

    @property
    def byte_length(self) -> int:
        return (self.p.bit_length() + 7) // 8

    def __call__(self, value: int) -> "FieldElement":
        return FieldElement(value, self)

    def fp2(self, re: int, im: int = 0) -> "Fp2Element":
        return Fp2Element(re, im, self)

    def __repr__(self) -> str:
        if self.p.bit_length() > 64:
            return f"PrimeModulus(<{self.p.bit_length()}-bit p>, q=<{self.q.bit_length()}-bit>)"
        return f"PrimeModulus(p={self.p}, q={self.q}, cofactor={self.cofactor})"


def _same(m1: PrimeModulus, m2: PrimeModulus) -> None:
    if m1 is not m2 and m1.p != m2.p:
        raise ParamMismatch(f"operands from different fields ({m1.p} vs {m2.p})")


# -- F_p ----------------------------------------------------------------------


class FieldElement:
    """A residue modulo p, always stored reduced."""

    __slots__ = ("value", "modulus")

    def __init__(self, value: int, modulus: PrimeModulus) -> None:
        self.value = value % modulus.p
        self.modulus = modulus

    def _coerce(self, other) -> int:
        if isinstance(other, FieldElement):
            _same(self.modulus, other.modulus)
            return other.value
        if isinstance(other, int):
            return other
        return NotImplemented  # type: ignore[return-value]

    def _make(self, v: int) -> "FieldElement":
        e = FieldElement.__new__(FieldElement)
        e.value = v % self.modulus.p
        e.modulus = self.modulus
        return e

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self._make(self.value + o)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self._make(self.value - o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self._make(o - self.value)

    def __mul__(self, other):
        if isinstance(other, Fp2Element):
            return NotImplemented
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        OPS.mul += 1
        return self._make(self.value * o)

    __rmul__ = __mul__

    def square(self) -> "FieldElement":
        OPS.sqr += 1
        return self._make(self.value * self.value)

    def __neg__(self) -> "FieldElement":
        return self._make(-self.value)

    def inverse(self) -> "FieldElement":
        if self.value == 0:
            raise DivisionByZero("inverse of zero in F_p")
        OPS.inv += 1
        return self._make(pow(self.value, -1, self.modulus.p))

    def __truediv__(self, other):
        if isinstance(other, int):
            other = FieldElement(other, self.modulus)
        if not isinstance(other, FieldElement):
            return NotImplemented
        return self * other.inverse()

    def __pow__(self, e: int) -> "FieldElement":
        if e < 0:
            return self.inverse() ** (-e)
        if e == 0:
            return self._make(1)
        if self.value == 0:
            return self._make(0)
        return self._make(pow(self.value, e, self.modulus.p))

    def is_zero(self) -> bool:
        return self.value == 0

    def is_one(self) -> bool:
        return self.value == 1

    def zero(self) -> "FieldElement":
        return self._make(0)

    def one(self) -> "FieldElement":
        return self._make(1)

    def __eq__(self, other) -> bool:
        if isinstance(other, FieldElement):
            return self.value == other.value and self.modulus.p == other.modulus.p
        if isinstance(other, int):
            return self.value == other % self.modulus.p
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.value, self.modulus.p))

    def __int__(self) -> int:
        return self.value

    def __repr__(self) -> str:
        return f"Fp({self.value})"

    def to_bytes(self) -> bytes:
        return int_to_bytes(self.value, self.modulus.byte_length)


# -- F_p^2 ------------------------------------------------------------------


class Fp2Element:
    """``re + im*i`` with ``i^2 = -1``.

    Valid as a field only for p = 3 (mod 4), which every modulus produced by
    :func:`find_group_prime` satisfies.
    """

    __slots__ = ("a", "b", "modulus")

    def __init__(self, re: Union[int, FieldElement], im: Union[int, FieldElement], modulus: PrimeModulus) -> None:
        p = modulus.p
        self.a = int(re) % p
        self.b = int(im) % p
        self.modulus = modulus

    @property
    def re(self) -> FieldElement:
        return FieldElement(self.a, self.modulus)

    @property
    def im(self) -> FieldElement:
        return FieldElement(self.b, self.modulus)

    def _make(self, a: int, b: int) -> "Fp2Element":
        p = self.modulus.p
        e = Fp2Element.__new__(Fp2Element)
        e.a = a % p
        e.b = b % p
        e.modulus = self.modulus
        return e

    def _coerce(self, other):
        if isinstance(other, Fp2Element):
            _same(self.modulus, other.modulus)
            return other.a, other.b
        if isinstance(other, FieldElement):
            _same(self.modulus, other.modulus)
            return other.value, 0
        if isinstance(other, int):
            return other, 0
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self._make(self.a + o[0], self.b + o[1])

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self._make(self.a - o[0], self.b - o[1])

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self._make(o[0] - self.a, o[1] - self.b)

    def __neg__(self) -> "Fp2Element":
        return self._make(-self.a, -self.b)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        c, d = o
        a, b = self.a, self.b
        if d == 0 and not isinstance(other, Fp2Element):
            OPS.mul += 2
            return self._make(a * c, b * c)
        # Karatsuba: three base-field products
        OPS.mul += 3
        ac = a * c
        bd = b * d
        return self._make(ac - bd, (a + b) * (c + d) - ac - bd)

    __rmul__ = __mul__

    def square(self) -> "Fp2Element":
        # (a+bi)^2 = (a+b)(a-b) + 2ab i
        OPS.mul += 2
        a, b = self.a, self.b
        return self._make((a + b) * (a - b), 2 * a * b)

    def conj(self) -> "Fp2Element":
        return self._make(self.a, -self.b)

    # i^p = -i when p = 3 (mod 4), so the p-power Frobenius is conjugation
    frobenius = conj

    def norm(self) -> FieldElement:
        OPS.sqr += 2
        return FieldElement(self.a * self.a + self.b * self.b, self.modulus)

    def inverse(self) -> "Fp2Element":
        if self.a == 0 and self.b == 0:
            raise DivisionByZero("inverse of zero in F_p^2")
        p = self.modulus.p
        OPS.sqr += 2
        OPS.inv += 1
        OPS.mul += 2
        n_inv = pow((self.a * self.a + self.b * self.b) % p, -1, p)
        return self._make(self.a * n_inv, -self.b * n_inv)

    def __truediv__(self, other):
        if isinstance(other, (int, FieldElement)):
            other = Fp2Element(int(other), 0, self.modulus)
        if not isinstance(other, Fp2Element):
            return NotImplemented
        return self * other.inverse()

    def __pow__(self, e: int) -> "Fp2Element":
        if e < 0:
            return self.inverse() ** (-e)
        result = self._make(1, 0)
        if e == 0:
            return result
        base = self
        for bit in bin(e)[2:]:
            result = result.square()
            if bit == "1":
                result = result * base
        return result

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0

    def is_one(self) -> bool:
        return self.a == 1 and self.b == 0

    def zero(self) -> "Fp2Element":
        return self._make(0, 0)

    def one(self) -> "Fp2Element":
        return self._make(1, 0)

    def __eq__(self, other) -> bool:
        if isinstance(other, Fp2Element):
            return self.a == other.a and self.b == other.b and self.modulus.p == other.modulus.p
        if isinstance(other, FieldElement):
            return self.b == 0 and self.a == other.value and self.modulus.p == other.modulus.p
        if isinstance(other, int):
            return self.b == 0 and self.a == other % self.modulus.p
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.a, self.b, self.modulus.p))

    def __repr__(self) -> str:
        return f"Fp2({self.a} + {self.b}i)"

    def to_bytes(self) -> bytes:
        w = self.modulus.byte_length
        return int_to_bytes(self.a, w) + int_to_bytes(self.b, w)


# -- functional interface -------------------------------------------------------


def fp_ops(op: str, a: FieldElement, b: Union[FieldElement, int, None] = None) -> FieldElement:
    """Apply ``op`` in {add, sub, mul, inv, pow, neg} to field elements."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "inv":
        return a.inverse()
    if op == "pow":
        return a ** int(b)
    if op == "neg":
        return -a
    raise ValueError(f"unknown F_p operation {op!r}")


def fp2_ops(op: str, a: Fp2Element, b: Union[Fp2Element, int, None] = None) -> Fp2Element:
    """Apply ``op`` in {add, sub, mul, inv, pow, conj, frobenius}."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "inv":
        return a.inverse()
    if op == "pow":
        return a ** int(b)
    if op in ("conj", "frobenius"):
        return a.conj()
    raise ValueError(f"unknown F_p^2 operation {op!r}")


def fp_sqrt(a: FieldElement) -> Optional[FieldElement]:
    """Square root for p = 3 (mod 4), or ``None`` if ``a`` is a non-residue.

    The root returned is ``a^((p+1)/4)`` itself; callers needing a specific
    sign pick between ``x`` and ``-x`` themselves.
    """
    p = a.modulus.p
    if p % 4 != 3:
        raise ParamError("fp_sqrt requires p = 3 (mod 4)")
    x = pow(a.value, (p + 1) // 4, p)
    if x * x % p != a.value:
        return None
    return FieldElement(x, a.modulus)


def fp_cbrt(a: FieldElement) -> FieldElement:
    """The unique cube root, valid for p = 2 (mod 3)."""
    p = a.modulus.p
    if p % 3 != 2:
        raise ParamError("fp_cbrt requires p = 2 (mod 3)")
    return FieldElement(pow(a.value, (2 * p - 1) // 3, p), a.modulus)


# -- primes ---------------------------------------------------------------------

_SMALL_PRIMES = [n for n in range(3, 2000, 2) if all(n % d for d in range(3, int(n**0.5) + 1, 2))]
_SMALL_PRODUCT = math.prod(_SMALL_PRIMES)
_MR_RNG = random.SystemRandom()
MR_ROUNDS = 64


def is_probable_prime(n: int, rounds: int = MR_ROUNDS) -> bool:
    """Small-prime sieve followed by ``rounds`` Miller-Rabin rounds."""
    if n < 2:
        return False
    if n in (2, 3):
        return True
    if n % 2 == 0:
        return False
    if n < 2000:
        return n in _SMALL_PRIMES
    if math.gcd(n, _SMALL_PRODUCT) != 1:
        return False
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for _ in range(rounds):
        a = _MR_RNG.randrange(2, n - 1)
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def is_solinas(q: int) -> bool:
    """True if ``q = 2^a +- 2^b +- 1`` for some ``a > b >= 1``."""
    for a in range(2, q.bit_length() + 2):
        for b in range(1, a):
            for s1 in (1, -1):
                for s2 in (1, -1):
                    if (1 << a) + s1 * (1 << b) + s2 == q:
                        return True
    return False


def _solinas_candidates(q_bits: int) -> list:
    # forms 2^a + 2^b + 1 first: their binary ladder has two addition steps
    a = q_bits - 1
    plus_plus = [(1 << a) + (1 << b) + 1 for b in range(1, a)]
    others = [(1 << a) + (1 << b) - 1 for b in range(1, a)]
    a = q_bits
    others += [(1 << a) - (1 << b) + s for b in range(1, a - 1) for s in (1, -1)]
    return [plus_plus, others]


def _solinas_prime(q_bits: int, rng: random.Random) -> int:
    for group in _solinas_candidates(q_bits):
        group = [c for c in group if c.bit_length() == q_bits]
        rng.shuffle(group)
        for c in group:
            if is_probable_prime(c):
                return c
    raise SearchExhausted(f"no Solinas prime with {q_bits} bits")


def _toy_modulus(q_bits: int, p_bits: int) -> PrimeModulus:
    for p in range(max(1 << (p_bits - 1), 11), 1 << p_bits):
        if p % 12 != 11 or not is_probable_prime(p):
            continue
        qs = [
            q
            for q in range(max(3, 1 << (q_bits - 1)), 1 << q_bits)
            if (p + 1) % q == 0 and is_probable_prime(q)
        ]
        if qs:
            return PrimeModulus(p, max(qs))
    raise SearchExhausted(f"no toy pair with q_bits={q_bits}, p_bits={p_bits}")


TOY_P_BITS = 32


def find_group_prime(
    q_bits: int,
    target_p_bits: int,
    rng: Optional[random.Random] = None,
    max_candidates: int = 10**6,
) -> PrimeModulus:
    """Generate (p, q) with p = 11 (mod 12), q prime, q | p + 1.

    For ``target_p_bits <= 32`` the smallest suitable p of exactly
    ``target_p_bits`` bits is returned together with the largest ``q_bits``
    prime dividing p + 1 (e.g. (2, 4) -> p=11, q=3 and (3, 6) -> p=59, q=5).

    Otherwise q is a Solinas prime of ``q_bits`` bits (a plain random prime
    below 32 bits) and p = 12*q*r - 1 for random r, which forces both
    congruences by construction.
    """
    if rng is None:
        rng = random.SystemRandom()
    if q_bits < 2 or q_bits >= target_p_bits:
        raise ParamError(f"need 2 <= q_bits < p_bits (got {q_bits}, {target_p_bits})")
    if target_p_bits <= TOY_P_BITS:
        return _toy_modulus(q_bits, target_p_bits)
    if q_bits + 5 > target_p_bits:
        raise ParamError("p must be at least 5 bits longer than q")

    if q_bits >= 32:
        q = _solinas_prime(q_bits, rng)
    else:
        while True:
            q = rng.getrandbits(q_bits) | (1 << (q_bits - 1)) | 1
            if is_probable_prime(q):
                break

    lo = -(-((1 << (target_p_bits - 1)) + 1) // (12 * q))
    hi = ((1 << target_p_bits)) // (12 * q)
    for _ in range(max_candidates):
        r = rng.randint(lo, hi)
        p = 12 * q * r - 1
        if p.bit_length() != target_p_bits:
            continue
        if is_probable_prime(p):
            return PrimeModulus(p, q)
    raise SearchExhausted(f"no prime p after {max_candidates} candidates")


# -- serialization ----------------------------------------------------------

MODULUS_MAGIC = b"IBCF"
MODULUS_VERSION = 1


def int_to_bytes(n: int, width: int) -> bytes:
    return n.to_bytes(width, "big")


def _put_int(n: int) -> bytes:
    raw = int_to_bytes(n, max(1, (n.bit_length() + 7) // 8))
    return struct.pack(">I", len(raw)) + raw


def encode_modulus(m: PrimeModulus) -> bytes:
    """``"IBCF" | 0x01 | len p | p | len q | q`` with 4-byte lengths."""
    return MODULUS_MAGIC + bytes([MODULUS_VERSION]) + _put_int(m.p) + _put_int(m.q)


def _take_int(buf: bytes, off: int) -> tuple:
    if off + 4 > len(buf):
        raise MalformedBlob("truncated length prefix")
    (n,) = struct.unpack_from(">I", buf, off)
    off += 4
    if n == 0 or off + n > len(buf):
        raise MalformedBlob("bad integer length")
    return int.from_bytes(buf[off : off + n], "big"), off + n


def decode_modulus(blob: bytes, offset: int = 0, *, strict: bool = True) -> tuple:
    """Parse a modulus blob starting at ``offset``; returns (modulus, end)."""
    if blob[offset : offset + 4] != MODULUS_MAGIC:
        raise MalformedBlob("bad modulus magic")
    if blob[offset + 4 : offset + 5] != bytes([MODULUS_VERSION]):
        raise MalformedBlob("unsupported modulus version")
    p, off = _take_int(blob, offset + 5)
    q, off = _take_int(blob, off)
    if strict:
        if p % 12 != 11 or q < 3 or (p + 1) % q or not is_probable_prime(p, 16) or not is_probable_prime(q, 16):
            raise MalformedBlob("modulus blob fails the (p, q) invariants")
    try:
        return PrimeModulus(p, q), off
    except ParamError as exc:
        raise MalformedBlob(str(exc)) from exc
