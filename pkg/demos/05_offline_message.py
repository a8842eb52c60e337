"""Leave a message for a handset that is switched off.

After the tap the initiator picks the session key itself and ships it,
IBE-encrypted to the peer's number, in a single OFFLINE frame.  The peer
opens it whenever it comes back.
"""

import random

from ibcnfc import pkg
from ibcnfc.protocol import sim
from ibcnfc.protocol.session import FrameIn, fsm_step

state = pkg.pkg_init(160, 512, [sim.TOKEN], random.Random(5))
s, stored = sim.offline_run(state, b"Left the keys with the concierge.")
print(f"A stored a {len(stored)}-byte OFFLINE frame; A is {s.a.phase.value}")

# ... some time later B powers up and reads the stored frame
tr = fsm_step(s.b, FrameIn(stored))
print("B:", *tr.log)
print("B reads:", tr.delivered[0].decode())
print("same key on both sides:", tr.state.session_key == s.a.session_key)

again = fsm_step(tr.state, FrameIn(stored))
print("delivering it a second time:", *again.log)
