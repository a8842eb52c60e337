import random
import threading

import pytest

from ibcnfc import ibe, pkg
from ibcnfc.errors import MalformedBlob
from ibcnfc.ibe import IdentityPrivateKey, SystemParams

TOKEN = b"demo-token"
ALICE = "+34600111222"


def test_get_params(prod_state):
    status, payload = pkg.parse_response(pkg.handle_request(prod_state, pkg.params_request())[1])
    assert status == pkg.STATUS_OK
    assert SystemParams.from_bytes(payload) == prod_state.params


def test_extract_good_token(prod_state):
    state, reply = pkg.handle_request(prod_state, pkg.extract_request(TOKEN, "+34 600-111-222"))
    status, payload = pkg.parse_response(reply)
    assert status == pkg.STATUS_OK
    key = IdentityPrivateKey.from_bytes(payload, prod_state.params)
    assert key.identity == ALICE
    assert ibe.verify_private_key(prod_state.params, key)
    assert [e[0] for e in state.issue_log] == [ALICE]


def test_bad_token(prod_state):
    for token in (b"", b"demo-toke", b"demo-token!", b"DEMO-TOKEN"):
        state, reply = pkg.handle_request(prod_state, pkg.extract_request(token, ALICE))
        assert pkg.parse_response(reply) == (pkg.STATUS_AUTH_FAIL, b"")
        assert state.issue_log == prod_state.issue_log


def test_bad_identity(prod_state):
    for ident in ("600111222", "+12", "+3460011122a", "é"):
        _, reply = pkg.handle_request(prod_state, pkg.extract_request(TOKEN, ident))
        assert pkg.parse_response(reply)[0] == pkg.STATUS_BAD_IDENTITY


def test_token_checked_before_identity(prod_state):
    _, reply = pkg.handle_request(prod_state, pkg.extract_request(b"nope", "junk"))
    assert pkg.parse_response(reply)[0] == pkg.STATUS_AUTH_FAIL


@pytest.mark.parametrize(
    "data",
    [
        b"",
        b"\x00\x00\x00",
        b"\x00\x00\x00\x00",
        b"\x00\x00\x00\x09\x01",  # length prefix larger than the frame
        b"\x00\x00\x00\x01\x07",  # unknown opcode
        b"\x00\x00\x00\x02\x02\x00",  # GET_PARAMS with a body
        pkg.frame(b"\x01" + b"\x00\x00\x00\x04abc"),
        pkg.frame(b"\x01" + pkg._field(TOKEN) + pkg._field(b"+34600111222") + b"x"),
        pkg.frame(b"\x01" + pkg._field(b"t" * 1025) + pkg._field(b"+34600111222")),
    ],
)
def test_malformed(prod_state, data):
    state, reply = pkg.handle_request(prod_state, data)
    assert pkg.parse_response(reply)[0] == pkg.STATUS_MALFORMED
    assert state is prod_state


def test_truncations_of_a_valid_request(prod_state):
    req = pkg.extract_request(TOKEN, ALICE)
    for n in range(len(req)):
        _, reply = pkg.handle_request(prod_state, req[:n])
        assert pkg.parse_response(reply)[0] == pkg.STATUS_MALFORMED


def test_handle_request_is_pure(prod_state):
    req = pkg.extract_request(TOKEN, ALICE)
    a = pkg.handle_request(prod_state, req)
    b = pkg.handle_request(prod_state, req)
    assert a[1] == b[1] and a[0] == b[0]
    assert prod_state.issue_log == ()


def test_fuzz_never_ok_never_leaks(prod_state):
    rng = random.Random(0)
    secret = prod_state.master.to_bytes(prod_state.params.modulus)
    for i in range(5000):
        n = rng.choice((rng.randrange(0, 16), rng.randrange(0, 200)))
        data = rng.randbytes(n)
        if i % 3 == 0 and n >= 5:
            data = (n - 4).to_bytes(4, "big") + bytes([1]) + data[5:]
        state, reply = pkg.handle_request(prod_state, data)
        status, payload = pkg.parse_response(reply)
        assert status in (pkg.STATUS_MALFORMED, pkg.STATUS_AUTH_FAIL, pkg.STATUS_BAD_IDENTITY)
        assert secret not in reply and payload == b""


def test_state_roundtrip(prod_state):
    blob = prod_state.to_bytes()
    again = pkg.PkgState.from_bytes(blob)
    assert again.params.fingerprint == prod_state.params.fingerprint
    assert again.master == prod_state.master and again.auth_tokens == prod_state.auth_tokens
    for n in range(0, len(blob), 7):
        with pytest.raises(MalformedBlob):
            pkg.PkgState.from_bytes(blob[:n])
    with pytest.raises(MalformedBlob):
        pkg.PkgState.from_bytes(blob + b"\x00")


def test_pkg_init():
    state = pkg.pkg_init(3, 6, [TOKEN], random.Random(4))
    state.params.check()
    assert state.params.modulus.p == 59
    with pytest.raises(ValueError):
        pkg.pkg_init(3, 6, [])


def test_service_serializes_threads(toy_state):
    service = pkg.PkgService(toy_state)
    req = pkg.extract_request(TOKEN, ALICE)
    threads = [threading.Thread(target=lambda: [service(req) for _ in range(20)]) for _ in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert len(service.state.issue_log) == 160
    assert [w for _, w in service.state.issue_log] == list(range(160))


def test_socket_transport(toy_state):
    service = pkg.PkgService(toy_state)
    with pkg.make_server(service, "127.0.0.1", 0) as server:
        t = threading.Thread(target=server.serve_forever, daemon=True)
        t.start()
        try:
            addr = server.server_address[:2]
            status, payload = pkg.parse_response(pkg.request(addr, pkg.extract_request(TOKEN, ALICE)))
            assert status == pkg.STATUS_OK
            params = SystemParams.from_bytes(pkg.parse_response(pkg.request(addr, pkg.params_request()))[1])
            assert ibe.verify_private_key(params, IdentityPrivateKey.from_bytes(payload, params))
            assert pkg.parse_response(pkg.request(addr, b"\x00\x00\x00\x01\x09"))[0] == pkg.STATUS_MALFORMED
        finally:
            server.shutdown()


def test_parse_response_rejects_garbage():
    for bad in (b"", b"\x00\x00\x00\x05\x00\x00\x00\x00", pkg.response(0, b"abc")[:-1]):
        with pytest.raises(MalformedBlob):
            pkg.parse_response(bad)
