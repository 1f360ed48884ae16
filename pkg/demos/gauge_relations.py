"""
Differential-difference relations from a gauge symmetry
======================================================

A Lagrangian with a symmetry that depends on an arbitrary function of all
independent variables has Euler-Lagrange expressions that satisfy an identity
with no reference to solutions.  Here the identity is found and checked.
"""

from ddvar import (
    Characteristic, Lagrangian, Signature, euler_lagrange, noether2_relations,
    operator_text, parse_expr, relation_verify, to_text,
)

###############################################################################
# Three fields and one arbitrary function f(x, n).

sig = Signature(("x",), ("n",), ("u", "v", "w"), arbitrary=("f",))
L = Lagrangian(parse_expr("(u[0|1] - v - w[1|0]/2)*w[1|0] + v*(u[0|1] - u)", sig), sig)

for name in sig.dependent:
    print(f"E[{name}] =", to_text(euler_lagrange(L, name)))

###############################################################################
# The gauge transformation moves u and v by D_x f and w by the forward
# difference of f.

Q = Characteristic(tuple(parse_expr(q, sig) for q in ("f[1|0]", "f[1|0]", "f[0|1] - f")), sig)

###############################################################################
# The relation applies the adjoint of each gauge operator to the matching
# Euler-Lagrange expression.

cert, = noether2_relations(L, Q)
for label, op in zip(cert.labels, cert.operators):
    print(f"{operator_text(op)}  acting on {label}")
print(relation_verify(cert).passed)
