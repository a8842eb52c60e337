import random

import pytest
from hypothesis import given, settings, strategies as st

from ibcnfc.errors import DivisionByZero, MalformedBlob, ParamError, ParamMismatch
from ibcnfc.field import (
    FieldElement,
    Fp2Element,
    PrimeModulus,
    counting,
    decode_modulus,
    encode_modulus,
    find_group_prime,
    fp2_ops,
    fp_cbrt,
    fp_ops,
    fp_sqrt,
    is_probable_prime,
    is_solinas,
)

import oracle

P512 = find_group_prime(160, 512, random.Random(1))


def test_small_examples(m11):
    assert fp_ops("mul", m11(5), m11(6)) == m11(8)
    assert m11(6).inverse() == m11(oracle.brute_inverse(6, 11)) == m11(2)
    assert all(m11(a) ** 10 == 1 for a in range(1, 11))


def test_inverse_of_zero(m11):
    with pytest.raises(DivisionByZero):
        m11(0).inverse()
    with pytest.raises(ZeroDivisionError):
        m11(3) / 0
    with pytest.raises(DivisionByZero):
        m11.fp2(0, 0).inverse()


def test_mixed_moduli_rejected(m11, m59):
    with pytest.raises(ParamMismatch):
        m11(1) + m59(1)
    with pytest.raises(ParamMismatch):
        m11.fp2(1, 1) * m59.fp2(1, 1)


def test_sqrt_against_enumeration(m11, m59):
    assert fp_sqrt(m11(3)) == m11(5)
    assert fp_sqrt(m11(0)) == m11(0)
    assert fp_sqrt(m11(2)) is None
    for m in (m11, m59):
        squares = {x * x % m.p for x in range(m.p)}
        for a in range(m.p):
            r = fp_sqrt(m(a))
            if a in squares:
                assert r is not None and r * r == a
            else:
                assert r is None


def test_cbrt_is_a_bijection(m11, m59):
    assert fp_cbrt(m11(0)) == 0
    assert fp_cbrt(m11(1)) == 1
    assert fp_cbrt(m11(8)) == m11(2)
    for m in (m11, m59):
        roots = [int(fp_cbrt(m(a))) for a in range(m.p)]
        assert sorted(roots) == list(range(m.p))
        assert all(r**3 % m.p == a for a, r in enumerate(roots))


def test_fp2_examples(m11):
    z = m11.fp2(5, 8)
    assert z.square() == m11.fp2(5, 3) == z * z
    assert z.conj() * z == m11.fp2(int(z.norm()), 0)
    assert all(m11.fp2(a, b) ** 120 == 1 for a in range(11) for b in range(11) if a or b)


def test_fp2_exhaustive_against_tuples(m11):
    for a in range(11):
        for b in range(11):
            x = m11.fp2(a, b)
            y = m11.fp2(b, (a + 3) % 11)
            assert (x * y).to_bytes() == bytes(oracle.f2_mul((a, b), (b, (a + 3) % 11), 11))
            assert fp2_ops("add", x, y) == m11.fp2(*oracle.f2_add((a, b), (b, (a + 3) % 11), 11))
            if a or b:
                assert x.inverse() == m11.fp2(*oracle.f2_inv((a, b), 11))


@settings(max_examples=200, deadline=None)
@given(st.integers(0, P512.p - 1), st.integers(0, P512.p - 1), st.integers(0, P512.p - 1), st.integers(0, P512.p - 1))
def test_fp2_ring_laws_512(a, b, c, d):
    m = P512
    x, y = m.fp2(a, b), m.fp2(c, d)
    assert (x * y) == m.fp2(*oracle.f2_mul((a, b), (c, d), m.p))
    assert x.square() == x * x
    assert (x + y) - y == x
    if a or b:
        assert x * x.inverse() == 1
        assert x ** (m.p + 1) == m.fp2(int(x.norm()), 0)


@settings(max_examples=200, deadline=None)
@given(st.integers(1, P512.p - 1), st.integers(1, P512.p - 1))
def test_fp_field_laws_512(a, b):
    m = P512
    x, y = m(a), m(b)
    assert x * y == a * b % m.p
    assert (x / y) * y == x
    assert x ** (m.p - 1) == 1
    r = fp_sqrt(x * x)
    assert r is not None and r * r == x * x
    assert fp_cbrt(x) ** 3 == x


def test_toy_moduli():
    m = find_group_prime(2, 4)
    assert (m.p, m.q, m.cofactor) == (11, 3, 4)
    m = find_group_prime(3, 6)
    assert (m.p, m.q, m.cofactor) == (59, 5, 12)
    for m in (find_group_prime(2, 4), find_group_prime(3, 6)):
        assert oracle.is_prime(m.p) and oracle.is_prime(m.q)
        assert m.p % 12 == 11 and (m.p + 1) % m.q == 0


@pytest.mark.parametrize("q_bits,p_bits", [(32, 64), (64, 128), (80, 256), (160, 512)])
def test_generated_moduli(q_bits, p_bits):
    rng = random.Random(q_bits)
    for _ in range(3):
        m = find_group_prime(q_bits, p_bits, rng)
        assert m.p % 12 == 11
        assert (m.p + 1) % m.q == 0 and (m.p + 1) // m.q == m.cofactor
        assert m.q.bit_length() == q_bits
        assert p_bits - 1 <= m.p.bit_length() <= p_bits + 1
        assert is_probable_prime(m.p) and is_probable_prime(m.q)
        assert is_solinas(m.q)


def test_generation_deterministic_per_seed():
    a = find_group_prime(160, 512, random.Random(7))
    b = find_group_prime(160, 512, random.Random(7))
    assert a == b


def test_bad_sizes():
    with pytest.raises(ParamError):
        find_group_prime(160, 100)


def test_primality_against_trial_division():
    for n in range(-3, 3000):
        assert is_probable_prime(n) == oracle.is_prime(n), n
    # Carmichael numbers and a strong pseudoprime to several bases
    for n in (561, 1105, 1729, 2465, 3215031751, 3825123056546413051):
        assert not is_probable_prime(n)


def test_solinas_shapes():
    assert is_solinas(2**159 + 2**17 + 1)
    assert is_solinas(2**127 - 1)
    assert not is_solinas(2**159 + 2**17 + 2**5 + 1)


def test_modulus_blob_roundtrip():
    blob = encode_modulus(P512)
    assert blob[:5] == b"IBCF\x01"
    m, end = decode_modulus(blob)
    assert m == P512 and end == len(blob)


def test_modulus_blob_rejects_damage():
    blob = encode_modulus(P512)
    for cut in range(len(blob)):
        with pytest.raises(MalformedBlob):
            decode_modulus(blob[:cut])
    with pytest.raises(MalformedBlob):
        decode_modulus(b"XBCF" + blob[4:])
    # trailing bytes belong to the enclosing blob
    assert decode_modulus(blob + b"\x00")[1] == len(blob)
    composite = PrimeModulus(11 * 13, 3)
    assert composite.p % 12 == 11
    with pytest.raises(MalformedBlob):
        decode_modulus(encode_modulus(composite))
    with pytest.raises(MalformedBlob):
        decode_modulus(encode_modulus(PrimeModulus(13, 7)))


def test_op_counters(m11):
    with counting() as ops:
        m11(3) * m11(4)
        m11(3).square()
        m11(3).inverse()
    assert (ops["mul"], ops["sqr"], ops["inv"]) == (1, 1, 1)


def test_element_bytes_fixed_width():
    assert len(P512(1).to_bytes()) == 64
    assert len(P512.fp2(1, 2).to_bytes()) == 128
    assert FieldElement(12, PrimeModulus(11)) == 1
    assert Fp2Element(12, -1, PrimeModulus(11)) == PrimeModulus(11).fp2(1, 10)
