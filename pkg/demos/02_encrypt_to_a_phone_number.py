"""Encrypt a message to a phone number nobody has registered yet.

The sender needs only the public parameters and the recipient's number.
The recipient asks the key generator for the matching private key later.
"""

import random

from ibcnfc import ibe
from ibcnfc.errors import AuthenticationFailure

rng = random.Random(2012)
params, master = ibe.setup(160, 512, rng)
print(f"parameters: p has {params.modulus.bit_length} bits, q has {params.modulus.q.bit_length()} bits")
print(f"fingerprint {params.fingerprint.hex()}")

alice = "+34 600-111-222"
ct = ibe.encrypt(params, alice, b"Meet at the north gate at nine.")
blob = ct.to_bytes()
print(f"\nciphertext for {alice}: {len(blob)} bytes")
print(f"  U (r*P, compressed)  {blob[21:86].hex()[:32]}...")
print(f"  V (masked CEK)       {ct.V.hex()}")
print(f"  W (AES-GCM payload)  {ct.W.hex()[:32]}...")

key = ibe.extract(params, master, alice)
print(f"\nprivate key issued for {key.identity}; pairing check: {ibe.verify_private_key(params, key)}")
print("decrypted:", ibe.decrypt(params, key, blob).decode())

bob = ibe.extract(params, master, "+34 600-333-444")
try:
    ibe.decrypt(params, bob, blob)
except AuthenticationFailure as exc:
    print("Bob's key is refused:", exc)

tampered = bytearray(blob)
tampered[-1] ^= 0x80
try:
    ibe.decrypt(params, key, bytes(tampered))
except AuthenticationFailure as exc:
    print("one flipped bit is refused:", exc)
