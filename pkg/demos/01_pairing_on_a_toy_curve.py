"""Walk through the maths on a curve small enough to print.

y^2 = x^3 + 1 over F_59 has 60 points; the subgroup of order 5 is where the
pairing lives.  We list it, build the distortion map and check bilinearity
by hand.
"""

from ibcnfc.curve import distortion_map, enumerate_points, scalar_mul, zeta
from ibcnfc.field import find_group_prime
from ibcnfc.pairing import precompute, tate_pairing

m = find_group_prime(3, 6)
print(f"p = {m.p}, q = {m.q}, cofactor = {m.cofactor}")

points = enumerate_points(m)
print(f"E(F_{m.p}) has {len(points)} points")

subgroup = [P for P in points if not P.is_infinity and scalar_mul(m.q, P).is_infinity]
print("points of order 5:", ", ".join(f"({int(P.x)},{int(P.y)})" for P in subgroup))

z = zeta(m)
print(f"zeta = {z}; zeta^3 = {z**3}")

P = subgroup[0]
print(f"P = {P}, phi(P) = {distortion_map(P)}")

base = tate_pairing(P, P)
print(f"e(P, P) = {base}  (order {m.q}: e^5 = {base**5})")

print("\n a b  e(aP, bP)           e(P,P)^(ab)")
for a in range(1, 5):
    for b in range(1, 5):
        lhs = tate_pairing(scalar_mul(a, P), scalar_mul(b, P))
        print(f" {a} {b}  {str(lhs):20s} {str(base ** (a * b)):20s} {'ok' if lhs == base ** (a * b) else 'MISMATCH'}")

pre = precompute(P)
print(f"\nprecomputed Miller steps for P: {pre.doublings} doublings, {pre.additions} additions")
print("replayed pairing equals direct one:", tate_pairing(P, subgroup[1], pre) == tate_pairing(P, subgroup[1]))
