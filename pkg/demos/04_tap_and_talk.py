"""Two handsets touch, swap phone numbers and agree on a session key.

Each handset seeds its random generator from (scripted) motion and GPS
readings, fetches its private key from the key generator, and then runs the
IBE-protected Diffie-Hellman exchange over an in-memory link.  The second
half repeats the run with one bit of the reply flipped in flight.
"""

import random

from ibcnfc import pkg
from ibcnfc.protocol import sim

state = pkg.pkg_init(160, 512, [sim.TOKEN], random.Random(920))

print("== honest run ==")
run = sim.honest_run(state, seed=1, message=b"photo_0042.jpg follows")
for line in run.log:
    print(line)
print(f"A: {run.a.phase.value}, key {sim.key_fingerprint(run.a.session_key)}")
print(f"B: {run.b.phase.value}, key {sim.key_fingerprint(run.b.session_key)}")


def flip_reply(index, sender, frame):
    if frame[:4] == b"IBCM" and frame[4] == 2:
        return frame[:60] + bytes([frame[60] ^ 0x04]) + frame[61:]
    return frame


print("\n== one bit flipped in DH_REPLY ==")
run = sim.honest_run(state, seed=1, tamper=flip_reply)
for line in run.log:
    print(line)
print(f"A: {run.a.phase.value} ({run.a.failure}); B: {run.b.phase.value} ({run.b.failure})")

print("\n== lossy link, no retransmission ==")
for seed in range(5):
    link = sim.LossyLink(loss=0.2, reorder=True, rng=random.Random(seed))
    run = sim.honest_run(state, seed=seed, transport=link)
    same = run.a.session_key is not None and run.a.session_key == run.b.session_key
    print(f"seed {seed}: dropped {link.dropped} frames -> A {run.a.phase.value}, B {run.b.phase.value}, "
          f"{'shared key' if same else 'no shared key'}")
