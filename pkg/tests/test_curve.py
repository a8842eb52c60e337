import random

import pytest
from hypothesis import given, settings, strategies as st

from ibcnfc.curve import (
    CurvePoint,
    JacobianPoint,
    decode_point,
    distortion_map,
    encode_point,
    enumerate_points,
    hash_to_point,
    jacobian_add,
    lift_to_fp2,
    point_add,
    random_point,
    scalar_mul,
    to_affine,
    to_jacobian,
    zeta,
)
from ibcnfc.errors import MalformedBlob, ParamMismatch
from ibcnfc.field import find_group_prime

import oracle
from conftest import point

M512 = find_group_prime(160, 512, random.Random(3))
G512 = hash_to_point(b"generator", M512)


def as_pair(P):
    return None if P.is_infinity else (int(P.x), int(P.y))


def test_enumeration_matches_brute_force(m11):
    pts = enumerate_points(m11)
    assert len(pts) == 12
    assert sorted(as_pair(P) for P in pts[1:]) == sorted(oracle.brute_points(11))


def test_addition_table_e11(m11):
    pts = enumerate_points(m11)
    for P in pts:
        for Q in pts:
            want = oracle.add(as_pair(P), as_pair(Q), 11)
            assert as_pair(point_add(P, Q)) == want
            assert as_pair(to_affine(jacobian_add(to_jacobian(P), to_jacobian(Q)))) == want


def test_small_examples(m11):
    P = point(m11, 2, 3)
    O = CurvePoint.infinity(m11)
    assert P + O == P and O + P == P
    assert P + P == point(m11, 0, 1)
    assert P + point(m11, 0, 1) == point(m11, 10, 0)
    assert scalar_mul(1, P) == P
    assert scalar_mul(3, point(m11, 0, 1)).is_infinity
    assert all(scalar_mul(12, Q).is_infinity for Q in enumerate_points(m11))


def test_group_axioms_e11(m11):
    pts = enumerate_points(m11)
    for P in pts:
        assert (P + (-P)).is_infinity
        for Q in pts:
            assert P + Q == Q + P
            for R in pts:
                assert (P + Q) + R == P + (Q + R)


def test_scalar_mul_matches_repeated_addition(m11, m59):
    for m in (m11, m59):
        for P in enumerate_points(m):
            for k in range(-3, 2 * m.p):
                want = oracle.mul(k % (m.p + 1), as_pair(P), m.p)
                assert as_pair(scalar_mul(k, P)) == want
                assert as_pair(scalar_mul(k, P, "affine")) == want


def test_jacobian_roundtrip(m11):
    assert to_jacobian(CurvePoint.infinity(m11)) == JacobianPoint.infinity(m11)
    J = to_jacobian(CurvePoint.infinity(m11))
    assert (int(J.X), int(J.Y), int(J.Z)) == (1, 1, 0)
    for P in enumerate_points(m11):
        assert to_affine(to_jacobian(P)) == P
        if P.is_infinity:
            continue
        J = to_jacobian(P)
        for c in range(1, 11):
            scaled = JacobianPoint(J.X * (c * c), J.Y * (c**3), J.Z * c)
            assert to_affine(scaled) == P


@settings(max_examples=500, deadline=None)
@given(st.integers(1, M512.q - 1), st.integers(1, M512.q - 1), st.integers(1, M512.q - 1))
def test_group_laws_512(a, b, c):
    G = G512
    P, Q, R = scalar_mul(a, G), scalar_mul(b, G), scalar_mul(c, G)
    assert (P + Q) + R == P + (Q + R)
    assert P + Q == Q + P == scalar_mul((a + b) % M512.q, G)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**200))
def test_affine_and_jacobian_agree_512(k):
    G = G512
    assert scalar_mul(k, G, "affine") == scalar_mul(k, G, "jacobian")


def test_hash_to_point_properties(m59):
    rng = random.Random(0)
    for m in (m59, M512):
        for _ in range(100):
            ident = rng.randbytes(rng.randrange(1, 40))
            Q = hash_to_point(ident, m)
            assert Q.is_on_curve() and not Q.is_infinity
            assert scalar_mul(m.q, Q).is_infinity
            assert hash_to_point(ident, m) == Q


def test_hash_to_point_regression(m59):
    Q = hash_to_point(b"+34600111222", m59)
    assert as_pair(Q) == (18, 46)
    # order 5 by brute-force multiples
    multiples = [oracle.mul(k, (18, 46), 59) for k in range(1, 6)]
    assert multiples[-1] is None and None not in multiples[:-1]


def test_zeta(m11, m59):
    z = zeta(m11)
    assert (int(z.re), int(z.im)) == (5, 8)
    for m in (m11, m59, M512):
        z = zeta(m)
        assert z != 1 and z**3 == 1
        if m.p < 100:
            assert (z.a, z.b) in oracle.cube_roots_of_unity(m.p)


def test_distortion_map(m11, m59):
    assert distortion_map(CurvePoint.infinity(m11)).is_infinity
    assert distortion_map(point(m11, 0, 1)) == lift_to_fp2(point(m11, 0, 1))
    for m in (m11, m59):
        for P in enumerate_points(m):
            phi = distortion_map(P)
            assert phi.is_on_curve()
            if not P.is_infinity and int(P.x) != 0:
                assert phi.base_field == "Fp2" and phi != lift_to_fp2(P)


def test_random_point_order(m59):
    rng = random.Random(5)
    for m in (m59, M512):
        for _ in range(10):
            P = random_point(m, rng)
            assert not P.is_infinity and scalar_mul(m.q, P).is_infinity


def test_point_encoding_roundtrip(m59):
    for P in enumerate_points(m59):
        for comp in (True, False):
            blob = encode_point(P, comp)
            assert decode_point(blob, m59) == P
    G = hash_to_point(b"x", M512)
    assert len(encode_point(G)) == 65 and len(encode_point(G, False)) == 129
    assert encode_point(CurvePoint.infinity(M512)) == b"\x00"


def test_point_decoding_rejects_garbage(m59):
    G = hash_to_point(b"x", m59)
    blob = encode_point(G, False)
    for bad in (b"", b"\x05" + blob[1:], blob[:-1], blob + b"\x00", b"\x04\x00\x05"):
        with pytest.raises(MalformedBlob):
            decode_point(bad, m59)
    with pytest.raises(MalformedBlob):
        decode_point(b"\x04" + bytes([59, 1]), m59)
    on_curve = set(oracle.brute_points(59))
    x, y = next((x, y) for x in range(59) for y in range(59) if (x, y) not in on_curve)
    with pytest.raises(MalformedBlob):
        decode_point(bytes([4, x, y]), m59)
    with pytest.raises(MalformedBlob):
        decode_point(bytes([3, 58]), m59)  # x = -1 gives y = 0, which is even


def test_mixed_fields_rejected(m11, m59):
    with pytest.raises(ParamMismatch):
        point(m11, 2, 3) + point(m59, 0, 1)
