"""Sensor-fed randomness for the simulated handsets.

Readings from motion and position sensors are folded into a 32-byte pool;
snapshots of the pool seed an HMAC-DRBG (SHA-256) that exposes the
:class:`random.Random` interface, so it can be handed to any function in the
package taking an ``rng``.
"""

from __future__ import annotations

import hashlib
import hmac
import random
import struct
from dataclasses import dataclass
from typing import Iterable, List, Tuple

from ..errors import InsufficientEntropy

MIN_SAMPLES = 8
SENSORS = ("gyroscope", "accelerometer", "compass", "gps")


@dataclass(frozen=True)
class SensorSample:
    sensor_id: str
    timestamp: int
    reading: bytes

    def encode(self) -> bytes:
        sid = self.sensor_id.encode("utf-8")
        return bytes([len(sid)]) + sid + struct.pack(">QI", self.timestamp, len(self.reading)) + self.reading


class EntropySource:
    """Rolling hash pool over a stream of sensor samples."""

    def __init__(self) -> None:
        self.pool = bytes(32)
        self.count = 0

    def add(self, sample: SensorSample) -> None:
        self.pool = hashlib.sha256(self.pool + sample.encode()).digest()
        self.count += 1

    def snapshot(self) -> bytes:
        if self.count < MIN_SAMPLES:
            raise InsufficientEntropy(f"{self.count} samples collected, need {MIN_SAMPLES}")
        return hashlib.sha256(b"ibcnfc/seed" + self.pool).digest()


def entropy_mix(source: EntropySource, samples: Iterable[SensorSample]) -> bytes:
    """Feed ``samples`` into ``source`` and return a 32-byte DRBG seed."""
    for s in samples:
        source.add(s)
    return source.snapshot()


def scripted_stream(seed: int, n: int = 16) -> List[SensorSample]:
    """Deterministic stand-in for a handset's sensor readings."""
    rng = random.Random(seed)
    out = []
    t = 1_700_000_000_000 + rng.randrange(10**6)
    for i in range(n):
        sensor = SENSORS[i % len(SENSORS)]
        if sensor == "gps":
            reading = struct.pack(">dd", 28.48 + rng.gauss(0, 1e-4), -16.32 + rng.gauss(0, 1e-4))
        else:
            reading = struct.pack(">fff", *(rng.gauss(0, 1) for _ in range(3)))
        t += rng.randrange(5, 40)
        out.append(SensorSample(sensor, t, reading))
    return out


class HmacDrbg(random.Random):
    """HMAC-DRBG (SHA-256) behind the ``random.Random`` API.

    Deterministic given its seed; ``state`` / :meth:`from_state` let the
    session state machine carry it around as plain bytes.
    """

    def __init__(self, seed: bytes = b"") -> None:
        self._K = b"\x00" * 32
        self._V = b"\x01" * 32
        super().__init__(seed)

    def seed(self, a=None, version: int = 2) -> None:  # type: ignore[override]
        if a is None:
            return
        if isinstance(a, int):
            a = a.to_bytes((a.bit_length() + 8) // 8, "big", signed=True)
        elif isinstance(a, str):
            a = a.encode("utf-8")
        self._update(bytes(a))

    def _update(self, data: bytes = b"") -> None:
        self._K = hmac.new(self._K, self._V + b"\x00" + data, "sha256").digest()
        self._V = hmac.new(self._K, self._V, "sha256").digest()
        if data:
            self._K = hmac.new(self._K, self._V + b"\x01" + data, "sha256").digest()
            self._V = hmac.new(self._K, self._V, "sha256").digest()

    def generate(self, n: int) -> bytes:
        out = b""
        while len(out) < n:
            self._V = hmac.new(self._K, self._V, "sha256").digest()
            out += self._V
        self._update()
        return out[:n]

    def randbytes(self, n: int) -> bytes:
        return self.generate(n)

    def getrandbits(self, k: int) -> int:
        if k < 0:
            raise ValueError("number of bits must be non-negative")
        if k == 0:
            return 0
        nbytes = (k + 7) // 8
        return int.from_bytes(self.generate(nbytes), "big") >> (nbytes * 8 - k)

    def random(self) -> float:
        return self.getrandbits(53) / (1 << 53)

    @property
    def state(self) -> Tuple[bytes, bytes]:
        return self._K, self._V

    def getstate(self):
        return self.state

    def setstate(self, state) -> None:
        self._K, self._V = state

    @classmethod
    def from_state(cls, state: Tuple[bytes, bytes]) -> "HmacDrbg":
        d = cls()
        d.setstate(state)
        return d
