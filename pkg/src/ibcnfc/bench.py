"""Encrypt/decrypt timing in the shape of the handset measurements.

Times are medians over ``iterations`` runs after one warm-up; the handset
figures are carried along as labelled reference rows and never compared
except as upper bounds.
"""

from __future__ import annotations

import random
import statistics
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from . import ibe
from .field import counting

REFERENCE_SOURCE = "paper, Nokia Lumia 920"
REFERENCE_ROWS: Tuple[Tuple[int, float, float], ...] = (
    (128, 7497.198, 7368.289),
    (512, 7498.221, 6998.858),
)

COLUMNS = (
    "source",
    "message_size_bytes",
    "encrypt_ms",
    "decrypt_ms",
    "encrypt_mul",
    "encrypt_sqr",
    "encrypt_inv",
    "decrypt_mul",
    "decrypt_sqr",
    "decrypt_inv",
)


@dataclass
class BenchRow:
    size: int
    encrypt_ms: float
    decrypt_ms: float
    encrypt_ops: Dict[str, int] = field(default_factory=dict)
    decrypt_ops: Dict[str, int] = field(default_factory=dict)


@dataclass
class BenchReport:
    rows: List[BenchRow]
    fingerprint: bytes
    p_bits: int
    q_bits: int
    iterations: int
    reference: Tuple[Tuple[int, float, float], ...] = REFERENCE_ROWS

    def row(self, size: int) -> BenchRow:
        return next(r for r in self.rows if r.size == size)

    def spread(self, a: int = 128, b: int = 512, column: str = "encrypt_ms") -> float:
        """Relative difference of one timing column between two sizes."""
        x, y = getattr(self.row(a), column), getattr(self.row(b), column)
        return abs(x - y) / min(x, y)

    def format(self, decimal: str = ".") -> str:
        def num(v: float) -> str:
            return f"{v:.3f}".replace(".", decimal)

        ops = ("mul", "sqr", "inv")
        lines = [
            f"# method=median-of-{self.iterations} interleaved warmup=1 p_bits={self.p_bits} "
            f"q_bits={self.q_bits} params={self.fingerprint.hex()}",
            "\t".join(COLUMNS),
        ]
        for r in self.rows:
            cells = ["local", str(r.size), num(r.encrypt_ms), num(r.decrypt_ms)]
            cells += [str(r.encrypt_ops.get(k, 0)) for k in ops]
            cells += [str(r.decrypt_ops.get(k, 0)) for k in ops]
            lines.append("\t".join(cells))
        for size, enc, dec in self.reference:
            lines.append("\t".join([REFERENCE_SOURCE, str(size), num(enc), num(dec)] + ["-"] * 6))
        return "\n".join(lines)


def _interleaved_medians(fns: Sequence, iterations: int) -> List[float]:
    """Median wall time of each callable, one warm-up call each.

    The callables take turns within every iteration, so slow drifts in
    machine speed land on all of them alike instead of on whichever row
    happened to run during the slow patch.
    """
    for fn in fns:
        fn()
    samples: List[List[float]] = [[] for _ in fns]
    for _ in range(iterations):
        for fn, out in zip(fns, samples):
            t0 = time.perf_counter()
            fn()
            out.append((time.perf_counter() - t0) * 1000.0)
    return [statistics.median(s) for s in samples]


def bench(
    sizes: Sequence[int],
    p_bits: int = 512,
    q_bits: int = 160,
    iterations: int = 5,
    seed: int = 0,
    params: Optional[Tuple[ibe.SystemParams, ibe.MasterKey]] = None,
    identity: str = "+34600111222",
) -> BenchReport:
    if not sizes:
        raise ValueError("at least one message size is required")
    if iterations < 1:
        raise ValueError("iterations must be positive")
    rng = random.Random(seed)
    sp, master = params if params is not None else ibe.setup(q_bits, p_bits, rng)
    key = ibe.extract(sp, master, identity)
    # build the cached pairing precomputations before anything is counted
    ibe.decrypt(sp, key, ibe.encrypt(sp, identity, b"", rng))
    messages, cts, counts = [], [], []
    for size in sizes:
        msg = rng.randbytes(size)
        with counting() as enc_ops:
            ct = ibe.encrypt(sp, identity, msg, rng)
        with counting() as dec_ops:
            if ibe.decrypt(sp, key, ct) != msg:
                raise RuntimeError("decryption did not return the message")
        messages.append(msg)
        cts.append(ct)
        counts.append((dict(enc_ops), dict(dec_ops)))
    enc = _interleaved_medians([lambda m=m: ibe.encrypt(sp, identity, m, rng) for m in messages], iterations)
    dec = _interleaved_medians([lambda c=c: ibe.decrypt(sp, key, c) for c in cts], iterations)
    rows = [BenchRow(size, e, d, *ops) for size, e, d, ops in zip(sizes, enc, dec, counts)]
    return BenchReport(rows, sp.fingerprint, sp.modulus.bit_length, sp.modulus.q.bit_length(), iterations)
