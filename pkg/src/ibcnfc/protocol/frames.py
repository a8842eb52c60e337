"""Byte layouts exchanged between the two devices.

Pairing frame (sent over the NFC tap)::

    "IBCP" | 0x01 | bt_addr(6) | len(1) name | len(1) phone | caps(2)

Session frame (sent over the Bluetooth/Wi-Fi link)::

    "IBCM" | type(1) | len(4) | payload
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import Tuple

from ..errors import FrameMalformed
from ..identity import normalize_identity

PAIRING_MAGIC = b"IBCP"
SESSION_MAGIC = b"IBCM"
VERSION = 1

MAX_NAME = 64
MAX_PHONE = 32
MAX_PAIRING_FRAME = 256

CAP_SESSION_DH = 0x0001
CAP_OFFLINE = 0x0002

DH_INIT = 0x01
DH_REPLY = 0x02
CONFIRM = 0x03
DATA = 0x04
OFFLINE = 0x05
ABORT = 0x06

FRAME_NAMES = {
    DH_INIT: "DH_INIT",
    DH_REPLY: "DH_REPLY",
    CONFIRM: "CONFIRM",
    DATA: "DATA",
    OFFLINE: "OFFLINE",
    ABORT: "ABORT",
}

MAX_SESSION_PAYLOAD = 1 << 26


@dataclass(frozen=True)
class PairingFrame:
    bt_addr: bytes
    device_name: str
    phone_number: str
    capabilities: int = CAP_SESSION_DH | CAP_OFFLINE

    @property
    def identity(self) -> str:
        return normalize_identity(self.phone_number)


def build_pairing_frame(device: PairingFrame) -> bytes:
    if len(device.bt_addr) != 6:
        raise FrameMalformed("Bluetooth address must be 6 bytes")
    name = device.device_name.encode("utf-8")
    if len(name) > MAX_NAME:
        raise FrameMalformed("device name longer than 64 bytes")
    device.identity  # raises IdentityInvalid
    try:
        phone = device.phone_number.encode("ascii")
    except UnicodeEncodeError:
        raise FrameMalformed("phone number must be ASCII") from None
    if len(phone) > MAX_PHONE:
        raise FrameMalformed("phone number field too long")
    if not 0 <= device.capabilities <= 0xFFFF:
        raise FrameMalformed("capabilities do not fit 16 bits")
    return b"".join(
        [
            PAIRING_MAGIC,
            bytes([VERSION]),
            bytes(device.bt_addr),
            bytes([len(name)]),
            name,
            bytes([len(phone)]),
            phone,
            struct.pack(">H", device.capabilities),
        ]
    )


def parse_pairing_frame(data: bytes) -> PairingFrame:
    """Inverse of :func:`build_pairing_frame`.

    Raises FrameMalformed on any structural problem and IdentityInvalid when
    the phone number field is not a usable identity.
    """
    if len(data) > MAX_PAIRING_FRAME:
        raise FrameMalformed("pairing frame exceeds 256 bytes")
    if data[:4] != PAIRING_MAGIC:
        raise FrameMalformed("bad pairing magic")
    if len(data) < 5 or data[4] != VERSION:
        raise FrameMalformed("unsupported pairing frame version")
    off = 5
    bt_addr = data[off : off + 6]
    off += 6
    if len(bt_addr) != 6 or off >= len(data):
        raise FrameMalformed("truncated pairing frame")
    n = data[off]
    off += 1
    if n > MAX_NAME or off + n > len(data):
        raise FrameMalformed("bad device name length")
    try:
        name = data[off : off + n].decode("utf-8")
    except UnicodeDecodeError:
        raise FrameMalformed("device name is not UTF-8") from None
    off += n
    if off >= len(data):
        raise FrameMalformed("truncated pairing frame")
    n = data[off]
    off += 1
    if n > MAX_PHONE or off + n + 2 != len(data):
        raise FrameMalformed("bad phone number length")
    try:
        phone = data[off : off + n].decode("ascii")
    except UnicodeDecodeError:
        raise FrameMalformed("phone number is not ASCII") from None
    off += n
    (caps,) = struct.unpack_from(">H", data, off)
    frame = PairingFrame(bytes(bt_addr), name, phone, caps)
    frame.identity
    return frame


def session_header(ftype: int, length: int) -> bytes:
    return SESSION_MAGIC + bytes([ftype]) + struct.pack(">I", length)


def encode_session_frame(ftype: int, payload: bytes) -> bytes:
    return session_header(ftype, len(payload)) + payload


def decode_session_frame(data: bytes) -> Tuple[int, bytes]:
    if len(data) < 9 or data[:4] != SESSION_MAGIC:
        raise FrameMalformed("bad session frame header")
    ftype = data[4]
    if ftype not in FRAME_NAMES:
        raise FrameMalformed(f"unknown session frame type {ftype:#x}")
    (n,) = struct.unpack_from(">I", data, 5)
    if n != len(data) - 9 or n > MAX_SESSION_PAYLOAD:
        raise FrameMalformed("session frame length mismatch")
    return ftype, data[9:]
