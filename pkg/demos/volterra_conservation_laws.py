"""
Conservation laws of a Volterra-type lattice
============================================

The modified Volterra equation ``u' = u^2 (u_1 - u_{-1})`` becomes variational
after the substitution ``u = 1/(v_1 - v_{-1})``.  This script derives the
Euler-Lagrange equation, checks two variational symmetries and turns them into
conservation laws.
"""

from ddvar import (
    Characteristic, ConservationLaw, Lagrangian, Signature, alt, euler_lagrange, is_zero,
    noether_claw, parse_expr, solve_for_leading, to_text, varsym_check, verify_claw,
)

###############################################################################
# One continuous variable x, one lattice variable n and one field v.

sig = Signature(("x",), ("n",), ("v",))
L = Lagrangian(parse_expr("v[0|-1]*v[1|0] - ln(v[0|2] - v[0|0])", sig), sig)

E = euler_lagrange(L, "v")
print("E[v] =", to_text(E))

###############################################################################
# Normalized output is a single fraction.  It agrees with the familiar form.

familiar = parse_expr("v[1|1] - v[1|-1] + 1/(v[0|2] - v) - 1/(v - v[0|-2])", sig)
print(is_zero(E - familiar))

###############################################################################
# Solving for the highest jet gives the reduction used to test things on
# solutions.

solved = solve_for_leading([E])
print("leader:", solved.leaders[0])

###############################################################################
# Shifting v by a constant, and by a constant times (-1)^n, leaves the action
# unchanged up to a divergence.

one = Characteristic((1,), sig)
stagger = Characteristic((alt(sig.n[0]),), sig)
for name, Q in [("one", one), ("alternating", stagger)]:
    print(name, "variational:", varsym_check(L, Q).passed)

###############################################################################
# The change of L under each symmetry is D_x of something, so the conservation
# laws come out directly.

v = sig.jet("v")
for Q, PF in [(one, v), (stagger, -alt(sig.n[0]) * v)]:
    claw = noether_claw(L, Q, supplement=ConservationLaw([PF], [0]), require_complete=True)
    print("F =", to_text(claw.F[0]))
    print("G =", to_text(claw.G[0]))
    print("holds on solutions:", verify_claw(claw, solved).passed)
