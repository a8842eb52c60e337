"""Hash suites: the symmetric primitives both peers must agree on.

Suite 1 is the only one defined: SHA-256 for hash-to-point and the pairing
KDF, HKDF-SHA256 for session keys, HMAC-SHA256 for key confirmation and
AES-256-GCM with 12-byte nonces for payloads.
"""

import hashlib
import hmac

from cryptography.exceptions import InvalidTag
from cryptography.hazmat.primitives import hashes
from cryptography.hazmat.primitives.ciphers.aead import AESGCM
from cryptography.hazmat.primitives.kdf.hkdf import HKDF

from .errors import AuthenticationFailure, ParamError

SUITE_SHA256_AESGCM = 1
SUITES = {SUITE_SHA256_AESGCM: "sha256"}

KEY_LEN = 32
NONCE_LEN = 12


def hash_name(suite_id: int) -> str:
    try:
        return SUITES[suite_id]
    except KeyError:
        raise ParamError(f"unknown hash suite {suite_id}") from None


def h2(value_bytes: bytes, suite_id: int = SUITE_SHA256_AESGCM) -> bytes:
    """32-byte mask from a serialized pairing value (counter-mode, one block)."""
    counter = (1).to_bytes(4, "big")
    return hashlib.new(hash_name(suite_id), counter + b"H2" + value_bytes).digest()[:KEY_LEN]


def kdf(ikm: bytes, info: bytes, suite_id: int = SUITE_SHA256_AESGCM, length: int = KEY_LEN) -> bytes:
    hash_name(suite_id)
    return HKDF(algorithm=hashes.SHA256(), length=length, salt=None, info=info).derive(ikm)


def mac(key: bytes, data: bytes, suite_id: int = SUITE_SHA256_AESGCM) -> bytes:
    return hmac.new(key, data, hash_name(suite_id)).digest()


def mac_verify(key: bytes, data: bytes, tag: bytes, suite_id: int = SUITE_SHA256_AESGCM) -> bool:
    return hmac.compare_digest(mac(key, data, suite_id), tag)


def aead_seal(key: bytes, nonce: bytes, plaintext: bytes, aad: bytes = b"") -> bytes:
    return AESGCM(key).encrypt(nonce, plaintext, aad)


def aead_open(key: bytes, nonce: bytes, ciphertext: bytes, aad: bytes = b"") -> bytes:
    try:
        return AESGCM(key).decrypt(nonce, ciphertext, aad)
    except InvalidTag:
        raise AuthenticationFailure("authentication tag mismatch") from None


def xor(a: bytes, b: bytes) -> bytes:
    if len(a) != len(b):
        raise ValueError("xor operands differ in length")
    return bytes(x ^ y for x, y in zip(a, b))
