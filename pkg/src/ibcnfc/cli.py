"""``ibcnfc`` command line: a thin shell over the library modules."""

from __future__ import annotations

import argparse
import logging
import random
import secrets
import sys
from pathlib import Path
from typing import List, Optional, Tuple

from . import bench as bench_mod
from . import ibe, pkg
from .errors import IbcError
from .protocol import sim as simmod
from .protocol.frames import DH_REPLY
from .protocol.session import Phase


DEFAULT_PARAMS = "ibcnfc.params"


class DomainError(Exception):
    pass


def _address(text: str) -> Tuple[str, int]:
    host, sep, port = text.rpartition(":")
    if not sep or not port.isdigit():
        raise argparse.ArgumentTypeError(f"expected HOST:PORT, got {text!r}")
    return host or "127.0.0.1", int(port)


def _sizes(text: str) -> List[int]:
    try:
        sizes = [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad size list {text!r}") from None
    if not sizes or any(s < 0 for s in sizes):
        raise argparse.ArgumentTypeError("need a non-empty list of sizes")
    return sizes


def _rate(text: str) -> float:
    v = float(text)
    if not 0.0 <= v <= 1.0:
        raise argparse.ArgumentTypeError("loss rate must lie in [0, 1]")
    return v


def _rng(seed: Optional[int]) -> random.Random:
    return random.SystemRandom() if seed is None else random.Random(seed)


def _read_params(path: str) -> ibe.SystemParams:
    return ibe.SystemParams.from_bytes(Path(path).read_bytes())


def cmd_params(args) -> int:
    tokens = [t.encode() for t in args.token] or [secrets.token_hex(16).encode()]
    state = pkg.pkg_init(args.q_bits, args.p_bits, tokens, _rng(args.seed))
    Path(args.out).write_bytes(state.to_bytes())
    params_out = args.params_out
    Path(params_out).write_bytes(state.params.to_bytes())
    print(f"state:  {args.out}")
    print(f"params: {params_out}")
    print(f"fingerprint: {state.params.fingerprint.hex()}")
    print(f"p: {state.params.modulus.bit_length} bits, q: {state.params.modulus.q.bit_length()} bits")
    for t in tokens:
        print(f"token: {t.decode()}")
    return 0


def cmd_pkg_serve(args) -> int:
    state = pkg.PkgState.from_bytes(Path(args.state).read_bytes())
    service = pkg.PkgService(state)
    host, port = args.listen
    with pkg.make_server(service, host, port) as server:
        h, p = server.server_address[:2]
        print(f"listening on {h}:{p}", flush=True)
        try:
            if args.max_requests:
                for _ in range(args.max_requests):
                    server.handle_request()
            else:
                server.serve_forever()
        except KeyboardInterrupt:
            pass
    return 0


def cmd_extract(args) -> int:
    req = pkg.extract_request(args.token.encode(), args.identity)
    if args.state:
        state = pkg.PkgState.from_bytes(Path(args.state).read_bytes())
        service = pkg.PkgService(state)
        reply, preply = service(req), service(pkg.params_request())
    else:
        reply = pkg.request(args.pkg, req)
        preply = pkg.request(args.pkg, pkg.params_request())
    status, payload = pkg.parse_response(reply)
    names = {pkg.STATUS_AUTH_FAIL: "authentication failed", pkg.STATUS_BAD_IDENTITY: "invalid identity",
             pkg.STATUS_MALFORMED: "malformed request"}
    if status != pkg.STATUS_OK:
        raise DomainError(f"PKG refused: {names.get(status, status)}")
    params = ibe.SystemParams.from_bytes(pkg.parse_response(preply)[1])
    key = ibe.IdentityPrivateKey.from_bytes(payload, params)
    if not ibe.verify_private_key(params, key):
        raise DomainError("PKG returned a key that fails the pairing check")
    out = args.out or key.identity.lstrip("+") + ".key"
    Path(out).write_bytes(payload)
    if args.params_out:
        Path(args.params_out).write_bytes(params.to_bytes())
    print(f"key for {key.identity} written to {out}")
    return 0


def cmd_encrypt(args) -> int:
    params = _read_params(args.params)
    ct = ibe.encrypt(params, args.to, Path(args.infile).read_bytes())
    Path(args.outfile).write_bytes(ct.to_bytes())
    return 0


def cmd_decrypt(args) -> int:
    params = _read_params(args.params)
    key = ibe.IdentityPrivateKey.from_bytes(Path(args.key).read_bytes(), params)
    Path(args.outfile).write_bytes(ibe.decrypt(params, key, Path(args.infile).read_bytes()))
    return 0


def _flip_reply(index: int, sender: str, frame: bytes) -> bytes:
    if frame[:4] == b"IBCM" and frame[4] == DH_REPLY:
        mid = len(frame) // 2
        return frame[:mid] + bytes([frame[mid] ^ 0x01]) + frame[mid + 1 :]
    return frame


def cmd_pair_sim(args) -> int:
    state = pkg.pkg_init(args.q_bits, args.p_bits, [simmod.TOKEN], random.Random(args.seed))
    transport = simmod.LossyLink(args.loss, False, random.Random(args.seed)) if args.loss else simmod.Loopback()
    run = simmod.honest_run(state, args.seed, transport, _flip_reply if args.tamper else None)
    for line in run.log:
        print(line)
    a, b = run.a, run.b
    if a.phase is Phase.ESTABLISHED and b.phase is Phase.ESTABLISHED:
        print("ESTABLISHED")
    elif args.tamper:
        print("FAILED (tamper detected)")
    else:
        print(f"FAILED ({a.failure or b.failure or 'no session'})")
    print(f"A key fingerprint: {simmod.key_fingerprint(a.session_key)}")
    print(f"B key fingerprint: {simmod.key_fingerprint(b.session_key)}")
    return 0


def cmd_bench(args) -> int:
    report = bench_mod.bench(args.sizes, args.p_bits, args.q_bits, args.iterations, args.seed)
    print(report.format(args.decimal))
    if 128 in args.sizes and 512 in args.sizes:
        spread = report.spread(128, 512)
        verdict = "PASS" if spread <= 0.25 else "FAIL"
        print(f"check: encrypt 128B vs 512B differ by {spread:.1%} (limit 25%): {verdict}", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ibcnfc", description="Identity-based encryption for paired handsets.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("params", help="generate system parameters and a PKG state file")
    p.add_argument("--q-bits", type=int, default=160)
    p.add_argument("--p-bits", type=int, default=512)
    p.add_argument("--out", required=True, help="PKG state file (holds the master key)")
    p.add_argument("--params-out", default=DEFAULT_PARAMS, help=f"public parameter file (default: {DEFAULT_PARAMS})")
    p.add_argument("--token", action="append", default=[], help="requestor token (repeatable)")
    p.add_argument("--seed", type=int, help="deterministic generation (testing only)")
    p.set_defaults(func=cmd_params)

    p = sub.add_parser("pkg-serve", help="serve extraction requests on a TCP socket")
    p.add_argument("--state", required=True)
    p.add_argument("--listen", type=_address, default=("127.0.0.1", 7878))
    p.add_argument("--max-requests", type=int, default=0, help="exit after N connections")
    p.set_defaults(func=cmd_pkg_serve)

    p = sub.add_parser("extract", help="obtain the private key for an identity")
    p.add_argument("--identity", required=True)
    p.add_argument("--token", required=True)
    src = p.add_mutually_exclusive_group()
    src.add_argument("--pkg", type=_address, default=("127.0.0.1", 7878), help="PKG address HOST:PORT")
    src.add_argument("--state", help="use a local PKG state file instead of the network")
    p.add_argument("--out", help="key file (default: DIGITS.key)")
    p.add_argument("--params-out", help="also save the PKG's public parameters here")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("encrypt", help="encrypt a file to an identity")
    p.add_argument("--to", required=True)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", dest="outfile", required=True)
    p.add_argument("--params", default=DEFAULT_PARAMS)
    p.set_defaults(func=cmd_encrypt)

    p = sub.add_parser("decrypt", help="decrypt a file with a private key")
    p.add_argument("--key", required=True)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", dest="outfile", required=True)
    p.add_argument("--params", default=DEFAULT_PARAMS)
    p.set_defaults(func=cmd_decrypt)

    p = sub.add_parser("pair-sim", help="simulate two handsets pairing and agreeing on a key")
    p.add_argument("--loss", type=_rate, default=0.0)
    p.add_argument("--tamper", action="store_true", help="flip one bit of the DH reply in flight")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--p-bits", type=int, default=512)
    p.add_argument("--q-bits", type=int, default=160)
    p.set_defaults(func=cmd_pair_sim)

    p = sub.add_parser("bench", help="time encryption and decryption")
    p.add_argument("--sizes", type=_sizes, default=[128, 512])
    p.add_argument("--p-bits", type=int, default=512)
    p.add_argument("--q-bits", type=int, default=160)
    p.add_argument("--iterations", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--decimal", choices=[".", ","], default=".")
    p.set_defaults(func=cmd_bench)
    return ap


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except (IbcError, DomainError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
