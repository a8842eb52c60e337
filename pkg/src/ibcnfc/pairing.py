"""Reduced Tate pairing on y^2 = x^3 + 1 via Miller's algorithm.

``tate_pairing(P, Q)`` evaluates ``f_{q,P}`` at ``phi(Q)`` (``phi`` being the
distortion map) and raises the result to ``(p^2 - 1)/q``.  The Miller loop
walks the plain binary expansion of q; with q of the form 2^a + 2^b + 1 that
is a run of doublings and two additions.

Three Miller paths exist and return the *same* field element, not merely
the same value up to an F_p factor:

* affine -- slopes from an F_p inversion per step;
* jacobian -- inversion-free point updates; the F_p scalings this
  introduces into line values are tracked and divided out once at the end;
* replay -- line coefficients produced by :func:`precompute` are evaluated
  directly, skipping all point arithmetic.

Numerator and denominator (vertical lines) are accumulated separately in
every path, so a whole loop costs a single F_p^2 inversion.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Tuple

from .curve import CurvePoint, distortion_map, hash_to_point, scalar_mul
from .errors import DivisionByZero, ParamError, ParamMismatch, ZeroEvaluation
from .field import FieldElement, Fp2Element, PrimeModulus

__all__ = [
    "PairingPrecomp",
    "miller_loop",
    "final_exponentiation",
    "tate_pairing",
    "precompute",
    "replay",
]

# One Miller step: (is_doubling, slope, intercept, x_new).  A vertical line
# x = x_T is stored with slope None, intercept x_T and x_new None.
Step = Tuple[bool, Optional[FieldElement], FieldElement, Optional[FieldElement]]


@dataclass(frozen=True)
class PairingPrecomp:
    """Line coefficients of ``f_{q,P}``, one entry per ladder operation."""

    base_point: CurvePoint
    coefficients: Tuple[Step, ...]

    @property
    def doublings(self) -> int:
        return sum(1 for s in self.coefficients if s[0])

    @property
    def additions(self) -> int:
        return sum(1 for s in self.coefficients if not s[0])


def _check_args(P: CurvePoint, Q: CurvePoint) -> None:
    if P.is_infinity:
        raise ParamError("Miller loop base point must not be infinity")
    if P.base_field != "Fp":
        raise ParamMismatch("Miller loop base point must lie in E(F_p)")
    if Q.is_infinity:
        raise ParamError("Miller loop evaluation point must not be infinity")
    if Q.base_field != "Fp2":
        raise ParamMismatch("Miller loop evaluation point must lie in E(F_p^2)")
    if not P.modulus.q:
        raise ParamError("modulus carries no subgroup order")


class _Accumulator:
    """num/den pair of Fp2 values, plus F_p scalings for the Jacobian path."""

    __slots__ = ("num", "den", "xq", "yq")

    def __init__(self, Q: CurvePoint) -> None:
        self.num = Q.x.one()
        self.den = Q.x.one()
        self.xq = Q.x
        self.yq = Q.y

    def square(self) -> None:
        self.num = self.num.square()
        self.den = self.den.square()

    def apply(self, step: Step) -> None:
        _, lam, c, x_new = step
        if lam is None:
            line = self.xq - c
            if line.is_zero():
                raise ZeroEvaluation("vertical line vanishes at Q")
            self.num = self.num * line
            return
        line = self.yq - self.xq * lam - c
        vert = self.xq - x_new
        if line.is_zero() or vert.is_zero():
            raise ZeroEvaluation("line function vanishes at Q")
        self.num = self.num * line
        self.den = self.den * vert

    def value(self) -> Fp2Element:
        return self.num / self.den


def _affine_step(T: CurvePoint, P: Optional[CurvePoint]) -> Tuple[CurvePoint, Step]:
    """Double T (P is None) or add P to T, returning the line used."""
    if P is None:
        # the ladder runs inside a subgroup of odd order, so y_T != 0
        x2 = T.x.square()
        lam = (x2 + x2 + x2) / (T.y + T.y)
        x3 = lam.square() - T.x - T.x
        y3 = lam * (T.x - x3) - T.y
        return CurvePoint(x3, y3, check=False), (True, lam, T.y - lam * T.x, x3)
    if T.x == P.x:
        if T.y == P.y:
            R, step = _affine_step(T, None)
            return R, (False,) + step[1:]
        return CurvePoint.infinity(T.modulus), (False, None, T.x, None)
    lam = (P.y - T.y) / (P.x - T.x)
    x3 = lam.square() - T.x - P.x
    y3 = lam * (T.x - x3) - T.y
    return CurvePoint(x3, y3, check=False), (False, lam, T.y - lam * T.x, x3)


def _miller_affine(P: CurvePoint, Q: CurvePoint, record: Optional[list] = None) -> Fp2Element:
    acc = _Accumulator(Q)
    T = P
    for bit in bin(P.modulus.q)[3:]:
        acc.square()
        T, step = _affine_step(T, None)
        if record is not None:
            record.append(step)
        acc.apply(step)
        if bit == "1":
            T, step = _affine_step(T, P)
            if record is not None:
                record.append(step)
            acc.apply(step)
    return acc.value()


def _miller_jacobian(P: CurvePoint, Q: CurvePoint) -> Fp2Element:
    num = Q.x.one()
    den = Q.x.one()
    # true numerator = num / s_num, true denominator = den / s_den
    one = P.x.one()
    s_num = one
    s_den = one
    xq, yq = Q.x, Q.y
    xp, yp = P.x, P.y
    X, Y, Z = P.x, P.y, one
    for bit in bin(P.modulus.q)[3:]:
        # doubling: tangent line scaled by 2*Y*Z^3, vertical by Z3^2
        num = num.square()
        den = den.square()
        s_num = s_num.square()
        s_den = s_den.square()
        A = X.square()
        B = Y.square()
        Z2 = Z.square()
        A3 = A + A + A
        line = yq * (Y * Z * Z2 * 2) - (B + B) - (xq * Z2 - X) * A3
        s_num = s_num * (Y * Z * Z2 * 2)
        C = B.square()
        D = (X + B).square() - A - C
        D = D + D
        X3 = A3.square() - D - D
        Y3 = A3 * (D - X3) - C * 8
        Z3 = Y * Z * 2
        Z32 = Z3.square()
        vert = xq * Z32 - X3
        s_den = s_den * Z32
        if line.is_zero() or vert.is_zero():
            raise ZeroEvaluation("line function vanishes at Q")
        num = num * line
        den = den * vert
        X, Y, Z = X3, Y3, Z3
        if bit == "1":
            Z2 = Z.square()
            H = xp * Z2 - X
            r = yp * Z2 * Z - Y
            if H.is_zero():
                if not r.is_zero():
                    # T = -P: vertical line x = x_T, no denominator
                    line = xq * Z2 - X
                    s_num = s_num * Z2
                    if line.is_zero():
                        raise ZeroEvaluation("vertical line vanishes at Q")
                    num = num * line
                    Z = Z.zero()
                    continue
                raise ParamError("base point does not have order q")
            HZ = H * Z
            line = yq * HZ - yp * HZ - (xq - xp) * r
            s_num = s_num * HZ
            HH = H.square()
            HHH = HH * H
            V = X * HH
            X3 = r.square() - HHH - V - V
            Y3 = r * (V - X3) - Y * HHH
            Z3 = HZ
            Z32 = Z3.square()
            vert = xq * Z32 - X3
            s_den = s_den * Z32
            if line.is_zero() or vert.is_zero():
                raise ZeroEvaluation("line function vanishes at Q")
            num = num * line
            den = den * vert
            X, Y, Z = X3, Y3, Z3
    return (num * s_den) / (den * s_num)


def miller_loop(P: CurvePoint, Q: CurvePoint, coords: str = "jacobian") -> Fp2Element:
    """``f_{q,P}(Q)`` for P in E(F_p) of order q and Q in E(F_p^2).

    Raises :class:`ZeroEvaluation` if some line or vertical vanishes at Q.
    """
    _check_args(P, Q)
    if coords == "jacobian":
        return _miller_jacobian(P, Q)
    if coords == "affine":
        return _miller_affine(P, Q)
    raise ValueError(f"unknown coordinate system {coords!r}")


def final_exponentiation(f: Fp2Element, modulus: Optional[PrimeModulus] = None) -> Fp2Element:
    """``f^((p^2-1)/q)``, split as ``(conj(f)/f)^((p+1)/q)``."""
    if f.is_zero():
        raise DivisionByZero("final exponentiation of zero")
    m = modulus or f.modulus
    g = f.conj() * f.inverse()
    return g ** ((m.p + 1) // m.q)


def precompute(P: CurvePoint) -> PairingPrecomp:
    """Record the slopes and intercepts of the Miller loop for base point P."""
    if P.is_infinity or P.base_field != "Fp":
        raise ParamError("precompute needs a finite point of E(F_p)")
    steps: list = []
    T = P
    for bit in bin(P.modulus.q)[3:]:
        T, step = _affine_step(T, None)
        steps.append(step)
        if bit == "1":
            T, step = _affine_step(T, P)
            steps.append(step)
    return PairingPrecomp(P, tuple(steps))


def replay(pre: PairingPrecomp, Q: CurvePoint) -> Fp2Element:
    """Evaluate ``f_{q,P}(Q)`` from stored coefficients."""
    _check_args(pre.base_point, Q)
    acc = _Accumulator(Q)
    for step in pre.coefficients:
        if step[0]:
            acc.square()
        acc.apply(step)
    return acc.value()


@lru_cache(maxsize=32)
def retry_point(modulus: PrimeModulus) -> CurvePoint:
    """Fixed public point of order q used to shift degenerate arguments."""
    return hash_to_point(b"ibcnfc/pairing-retry-point", modulus)


MAX_SHIFTS = 8


def _reduced(P: CurvePoint, Q: CurvePoint, pre: Optional[PairingPrecomp], coords: str) -> Fp2Element:
    phiQ = distortion_map(Q)
    if pre is not None:
        f = replay(pre, phiQ)
    else:
        f = miller_loop(P, phiQ, coords)
    return final_exponentiation(f, P.modulus)


def tate_pairing(
    P: CurvePoint,
    Q: CurvePoint,
    precomp: Optional[PairingPrecomp] = None,
    coords: str = "jacobian",
) -> Fp2Element:
    """Symmetric pairing ``e(P, Q) = t(P, phi(Q))`` on the order-q subgroup.

    If ``precomp`` (built for P) is given the coefficient replay path is used.
    A zero line evaluation is sidestepped by pairing with ``Q + k R`` for a
    fixed public R and dividing out ``e(P, k R)``.
    """
    if precomp is not None and precomp.base_point != P:
        raise ParamMismatch("precomputation belongs to a different base point")
    if P.modulus.p != Q.modulus.p:
        raise ParamMismatch("points over different fields")
    if P.is_infinity or Q.is_infinity:
        return Fp2Element(1, 0, P.modulus)
    try:
        return _reduced(P, Q, precomp, coords)
    except ZeroEvaluation:
        pass
    R = retry_point(P.modulus)
    for k in range(1, MAX_SHIFTS + 1):
        kR = scalar_mul(k, R)
        shifted = Q + kR
        if shifted.is_infinity:
            continue
        try:
            top = _reduced(P, shifted, precomp, coords)
            corr = _reduced(P, kR, precomp, coords)
        except ZeroEvaluation:
            continue
        return top / corr
    raise ZeroEvaluation("pairing argument stayed degenerate after shifting")
