"""Identity-based encryption for NFC-paired handsets.

Layers, bottom-up: ``field`` (F_p, F_p^2, parameter generation), ``curve``
(y^2 = x^3 + 1), ``pairing`` (reduced Tate pairing), ``ibe``
(Boneh-Franklin with a hybrid payload), ``pkg`` (key issuance service) and
``protocol`` (pairing frames, session state machine, simulator).
"""

from .curve import CurvePoint, JacobianPoint, hash_to_point, scalar_mul
from .errors import IbcError
from .field import FieldElement, Fp2Element, PrimeModulus, find_group_prime
from .ibe import IbeCiphertext, IdentityPrivateKey, MasterKey, SystemParams, decrypt, encrypt, extract, setup
from .identity import normalize_identity
from .pairing import precompute, tate_pairing

__version__ = "0.1.0"

__all__ = [
    "CurvePoint",
    "JacobianPoint",
    "hash_to_point",
    "scalar_mul",
    "IbcError",
    "FieldElement",
    "Fp2Element",
    "PrimeModulus",
    "find_group_prime",
    "IbeCiphertext",
    "IdentityPrivateKey",
    "MasterKey",
    "SystemParams",
    "decrypt",
    "encrypt",
    "extract",
    "setup",
    "normalize_identity",
    "precompute",
    "tate_pairing",
]
