import random

import pytest

from ibcnfc import ibe
from ibcnfc.curve import CurvePoint, encode_point, hash_to_point, scalar_mul
from ibcnfc.errors import (
    AuthenticationFailure,
    InvalidIdentity,
    MalformedBlob,
    MalformedCiphertext,
    RngFailure,
    SetupError,
)
from ibcnfc.ibe import IbeCiphertext, IdentityPrivateKey, SystemParams

ALICE = "+34600111222"
BOB = "+34600333444"


def flips(blob):
    for i in range(len(blob)):
        for bit in range(8):
            yield i, blob[:i] + bytes([blob[i] ^ (1 << bit)]) + blob[i + 1 :]


@pytest.mark.parametrize("size", [0, 1, 128, 512])
def test_roundtrip_toy(toy, size):
    params, master = toy
    key = ibe.extract(params, master, ALICE)
    msg = bytes(range(256)) * 2
    ct = ibe.encrypt(params, ALICE, msg[:size], random.Random(size))
    assert ibe.decrypt(params, key, ct) == msg[:size]
    assert ibe.decrypt(params, key, ct.to_bytes()) == msg[:size]


@pytest.mark.parametrize("size", [0, 128, 512])
def test_roundtrip_512(prod, size):
    params, master = prod
    key = ibe.extract(params, master, BOB)
    msg = random.Random(size).randbytes(size)
    assert ibe.decrypt(params, key, ibe.encrypt(params, BOB, msg).to_bytes()) == msg


def test_identity_spelling_does_not_matter(toy):
    params, master = toy
    key = ibe.extract(params, master, "+34 600-111-222")
    assert key.identity == ALICE
    ct = ibe.encrypt(params, "+34 (600) 111 222", b"hi", random.Random(0))
    assert ibe.decrypt(params, key, ct) == b"hi"
    with pytest.raises(InvalidIdentity):
        ibe.encrypt(params, "600111222", b"hi")


def test_encryption_is_randomized(prod):
    params, _ = prod
    a = ibe.encrypt(params, ALICE, b"same")
    b = ibe.encrypt(params, ALICE, b"same")
    assert a.U != b.U and a.V != b.V and a.W != b.W and a.nonce != b.nonce


def test_wrong_key_rejected(prod):
    params, master = prod
    ct = ibe.encrypt(params, ALICE, b"for alice only")
    with pytest.raises(AuthenticationFailure):
        ibe.decrypt(params, ibe.extract(params, master, BOB), ct)


def test_bit_flip_sweep_toy(toy):
    params, master = toy
    key = ibe.extract(params, master, ALICE)
    blob = ibe.encrypt(params, ALICE, b"attack at dawn", random.Random(1)).to_bytes()
    u_end = 21 + 2
    outcomes = {}
    for i, bad in flips(blob):
        with pytest.raises((AuthenticationFailure, MalformedCiphertext)) as info:
            ibe.decrypt(params, key, bad)
        outcomes.setdefault(info.type, set()).add(i)
        if i >= u_end and i < u_end + 32 or i >= u_end + 36:
            # V and W flips reach the AEAD
            assert info.type is AuthenticationFailure
    assert AuthenticationFailure in outcomes


def test_truncation_rejected(toy):
    params, master = toy
    key = ibe.extract(params, master, ALICE)
    blob = ibe.encrypt(params, ALICE, b"payload", random.Random(2)).to_bytes()
    for n in range(len(blob)):
        with pytest.raises((MalformedCiphertext, AuthenticationFailure)):
            ibe.decrypt(params, key, blob[:n])
    with pytest.raises(MalformedCiphertext):
        ibe.decrypt(params, key, blob + b"\x00")


def test_foreign_params_rejected(toy, prod):
    params, master = prod
    ct = ibe.encrypt(params, ALICE, b"x")
    tparams, tmaster = toy
    with pytest.raises(MalformedCiphertext):
        ibe.decrypt(tparams, ibe.extract(tparams, tmaster, ALICE), ct.to_bytes())


def test_u_outside_subgroup_rejected(toy):
    params, master = toy
    key = ibe.extract(params, master, ALICE)
    ct = ibe.encrypt(params, ALICE, b"x", random.Random(3))
    blob = ct.to_bytes()
    # (0, 1) has order 3, not 5
    bad = blob[:21] + encode_point(_order3(params.modulus)) + blob[23:]
    with pytest.raises(MalformedCiphertext):
        ibe.decrypt(params, key, bad)


def _order3(m):
    return CurvePoint.from_ints(0, 1, m)


def test_setup_deterministic_per_seed():
    a = ibe.setup(64, 128, random.Random(9))
    b = ibe.setup(64, 128, random.Random(9))
    assert a[0] == b[0] and a[0].fingerprint == b[0].fingerprint and a[1] == b[1]


def test_setup_invariants(toy, prod):
    for params, master in (toy, prod):
        params.check()
        m = params.modulus
        assert scalar_mul(master.s, params.P) == params.P_pub
        assert 1 <= master.s < m.q
    assert 511 <= prod[0].modulus.bit_length <= 513


def test_setup_refuses_q3():
    # every order-3 point has x = 0 and pairs degenerately
    with pytest.raises(SetupError):
        ibe.setup(2, 4, random.Random(0))


def test_setup_reports_rng_failure():
    class Broken(random.Random):
        def randbytes(self, n):
            raise OSError("sensor offline")

    params, _ = ibe.setup(64, 128, random.Random(0))
    with pytest.raises(RngFailure):
        ibe.encrypt(params, ALICE, b"x", Broken(0))


def test_extract_and_verify(prod, toy):
    for params, master in (prod, toy):
        a = ibe.extract(params, master, ALICE)
        assert a == ibe.extract(params, master, ALICE)
        assert ibe.verify_private_key(params, a)
        forged = IdentityPrivateKey(ALICE, ibe.extract(params, master, BOB).S_ID)
        assert not ibe.verify_private_key(params, forged)


def test_extract_regression_toy(toy):
    params, master = toy
    key = ibe.extract(params, master, ALICE)
    assert master.s == 3
    assert (int(key.S_ID.x), int(key.S_ID.y)) == (28, 8)
    assert key.S_ID == scalar_mul(3, hash_to_point(ALICE.encode(), params.modulus))
    assert ibe.verify_private_key(params, key)


def test_key_blob_roundtrip(prod, toy):
    params, master = prod
    key = ibe.extract(params, master, ALICE)
    blob = key.to_bytes(params)
    assert blob[:5] == b"IBCK\x01" and blob[5:13] == params.fingerprint
    assert IdentityPrivateKey.from_bytes(blob, params) == key
    for n in range(len(blob)):
        with pytest.raises((MalformedBlob, InvalidIdentity)):
            IdentityPrivateKey.from_bytes(blob[:n], params)
    with pytest.raises(MalformedBlob):
        IdentityPrivateKey.from_bytes(blob, toy[0])


def test_params_blob_roundtrip(prod):
    params, _ = prod
    blob = params.to_bytes()
    again = SystemParams.from_bytes(blob)
    assert again == params and again.fingerprint == params.fingerprint
    assert len(params.fingerprint) == 8
    with pytest.raises(MalformedBlob):
        SystemParams.from_bytes(blob + b"\x00")
    with pytest.raises(MalformedBlob):
        SystemParams.from_bytes(blob[:-1])


def test_params_blob_with_bad_generator(toy):
    params, _ = toy
    m = params.modulus
    fake = SystemParams(m, _order3(m), params.P_pub)
    with pytest.raises(MalformedBlob):
        SystemParams.from_bytes(fake.to_bytes())


def test_master_key_not_in_repr(prod):
    _, master = prod
    assert str(master.s) not in repr(master)


def test_ciphertext_layout(prod):
    params, _ = prod
    ct = ibe.encrypt(params, ALICE, b"x" * 10)
    blob = ct.to_bytes()
    assert blob[0] == 1 and blob[1:9] == params.fingerprint
    assert len(blob) == 1 + 8 + 12 + 65 + 32 + 4 + 10 + 16
    assert IbeCiphertext.from_bytes(blob, params) == ct
