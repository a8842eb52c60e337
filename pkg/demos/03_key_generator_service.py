"""Run the private key generator behind a local TCP socket.

Requests carry a bearer token; a wrong token, a malformed frame or an
unusable phone number each get their own status code, and nothing ever
echoes the master key.
"""

import random
import threading

from ibcnfc import ibe, pkg

state = pkg.pkg_init(160, 512, [b"field-office-7"], random.Random(7))
service = pkg.PkgService(state)

with pkg.make_server(service, "127.0.0.1", 0) as server:
    threading.Thread(target=server.serve_forever, daemon=True).start()
    addr = server.server_address[:2]
    print(f"key generator listening on {addr[0]}:{addr[1]}")

    status, payload = pkg.parse_response(pkg.request(addr, pkg.params_request()))
    params = ibe.SystemParams.from_bytes(payload)
    print(f"GET_PARAMS -> status {status}, fingerprint {params.fingerprint.hex()}")

    tries = [
        (b"field-office-7", "+34 600-111-222"),
        (b"guessed-token", "+34 600-111-222"),
        (b"field-office-7", "600111222"),
    ]
    names = {0: "OK", 1: "AUTH_FAIL", 2: "BAD_IDENTITY", 3: "MALFORMED"}
    for token, ident in tries:
        status, payload = pkg.parse_response(pkg.request(addr, pkg.extract_request(token, ident)))
        line = f"EXTRACT {ident!r:20s} token={token.decode():15s} -> {names[status]}"
        if status == pkg.STATUS_OK:
            key = ibe.IdentityPrivateKey.from_bytes(payload, params)
            line += f" (key verifies: {ibe.verify_private_key(params, key)})"
        print(line)

    status, _ = pkg.parse_response(pkg.request(addr, b"\x00\x00\x00\x03\x01\xff\xff"))
    print(f"garbage frame -> {names[status]}")
    server.shutdown()

print("issue log:", service.state.issue_log)
