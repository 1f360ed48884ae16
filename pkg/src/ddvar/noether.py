"""Noether's theorems: conservation laws from symmetries, relations from gauge symmetries."""

from __future__ import annotations

from dataclasses import dataclass, field

import sympy as sp

from .errors import DecompositionIncomplete, NotLinearHomogeneous, NotVariational, RelationNonzero
from .expr import is_zero, jets_of, normalize
from .operators import LinearDDOperator, adjoint_defect
from .report import Report
from .symmetry import Characteristic, characteristic_of, prolong_apply, sampled_linear_solve, varsym_check
from .variational import ConservationLaw, Lagrangian, divergence_of, euler_lagrange, euler_lagrange_wrt_arbitrary

__all__ = [
    "noether_density", "ibp_claw", "noether_claw", "noether2_relations",
    "ConstraintSet", "RelationCertificate", "intermediate_determining",
    "constrained_claw", "relation_verify", "adjoint_characteristic",
    "gauge_operators", "multiplier_search",
]


def _sig(L, Q):
    return Q.signature if isinstance(Q, Characteristic) else L.signature


def noether_density(L, Q):
    """sum_a Q^a E_{u^a}(L)."""
    Q = characteristic_of(Q)
    sig = Q.signature
    return normalize(sum((q * euler_lagrange(L, name) for q, name in zip(Q, sig.dependent)), sp.S.Zero))


def ibp_claw(L, Q):
    """Components of pr v_Q(L) - Q^a E_{u^a}(L).

    Each term (dL/du^a_{J;K}) D_J S_K Q^a of the prolongation is moved onto the
    Lagrangian side by the adjoint-defect construction.
    """
    Q = characteristic_of(Q)
    sig = Q.signature
    e = L.expr if isinstance(L, Lagrangian) else sp.sympify(L)
    claw = ConservationLaw([0] * sig.p, [0] * sig.m, density=0)
    for s in sorted(jets_of(e, arbitrary=False), key=lambda s: s.sort_key()):
        word = LinearDDOperator.word(s.J, s.K)
        claw = claw + adjoint_defect(word, sp.diff(e, s), Q[sig.alpha(s.base)])
    return claw


def noether_claw(L, Q, supplement=None, require_complete=False, check=True):
    """Conservation law with density Q^a E_{u^a}(L).

    pr v_Q(L) must itself be given as a divergence: either it vanishes, or
    ``supplement`` is a ConservationLaw whose divergence is pr v_Q(L).  If
    neither applies, the returned law decomposes Q.E(L) - pr v_Q(L) and the
    undecomposed surplus is recorded in ``residual``.
    """
    Q = characteristic_of(Q)
    if check and not varsym_check(L, Q):
        raise NotVariational("pr v_Q(L) is not a divergence")
    surplus = prolong_apply(Q, L.expr)
    claw = -ibp_claw(L, Q)
    density = noether_density(L, Q)
    if supplement is not None:
        residual = normalize(surplus - divergence_of(supplement))
        claw = claw + ConservationLaw(supplement.F, supplement.G, density=0)
    else:
        residual = surplus
    if residual != 0 and is_zero(residual).verdict.name == "PROBABLY_YES":
        residual = sp.S.Zero
    if residual != 0 and require_complete:
        raise DecompositionIncomplete(f"undecomposed surplus {residual}")
    return ConservationLaw(claw.F, claw.G, density=density - residual, residual=residual)


def gauge_operators(Q):
    """Matrix op[a][r] with Q^a = sum_r op[a][r] g^r (Q linear homogeneous in g)."""
    Q = characteristic_of(Q)
    if not Q.is_linear_homogeneous():
        raise NotLinearHomogeneous("characteristic is not linear homogeneous in the arbitrary functions")
    sig = Q.signature
    ops = []
    for q in Q:
        row = []
        for g in sig.arbitrary:
            terms = {}
            for s in jets_of(q, arbitrary=True):
                if s.base == g:
                    terms[(s.J, s.K)] = sp.diff(q, s)
            row.append(LinearDDOperator(terms, sig.p, sig.m))
        ops.append(row)
    return ops


@dataclass
class RelationCertificate:
    """Claimed identity sum_k operators[k](targets[k]) == 0."""

    operators: list
    targets: list
    labels: list = field(default_factory=list)

    def expression(self):
        return normalize(sum((op.apply(t) for op, t in zip(self.operators, self.targets)), sp.S.Zero))


def noether2_relations(L, Q):
    """One relation per arbitrary function: E_{g^r}(Q^a E_{u^a}(L)) == 0.

    Each relation is returned as a certificate whose operators are the adjoints
    of the gauge operators, applied to the Euler-Lagrange expressions.
    """
    Q = characteristic_of(Q)
    sig = Q.signature
    ops = gauge_operators(Q)
    targets = [euler_lagrange(L, name) for name in sig.dependent]
    density = noether_density(L, Q)
    certs = []
    for r, g in enumerate(sig.arbitrary):
        via_el = euler_lagrange_wrt_arbitrary(density, g)
        cert = RelationCertificate([ops[a][r].adjoint() for a in range(sig.q)], targets,
                                   [f"E[{name}]" for name in sig.dependent])
        test = is_zero(cert.expression())
        if not test or not is_zero(via_el):
            raise RelationNonzero(r, test.witness)
        certs.append(cert)
    return certs


def relation_verify(cert):
    """Apply every operator to its target and test the sum for zero, off-shell."""
    report = Report("relation")
    report.add("sum", is_zero(cert.expression()))
    return report


def adjoint_characteristic(ops, g):
    """Q^a = sum_r (D^a_r)^dagger g^r from relation operators ops[a][r]."""
    return tuple(normalize(sum((op.adjoint().apply(gr) for op, gr in zip(row, g)), sp.S.Zero))
                 for row in ops)


# --- constrained characteristics ----------------------------------------------

@dataclass
class ConstraintSet:
    """Linear constraints sum_r ops[i][r] g^r = 0 on the arbitrary functions."""

    ops: list
    complete: bool = True

    def __post_init__(self):
        for row in self.ops:
            for op in row:
                for c in op.terms.values():
                    if jets_of(c):
                        raise ValueError(f"constraint coefficient {c} depends on jet variables")

    @property
    def I(self):
        return len(self.ops)

    @property
    def R(self):
        return len(self.ops[0]) if self.ops else 0


def _determining_lhs(L, Q, C, lam):
    Q = characteristic_of(Q)
    if not Q.is_linear_homogeneous():
        raise NotLinearHomogeneous("characteristic is not linear homogeneous in the arbitrary functions")
    sig = Q.signature
    density = noether_density(L, Q)
    out = []
    for r, g in enumerate(sig.arbitrary):
        lhs = euler_lagrange_wrt_arbitrary(density, g)
        for i in range(C.I):
            lhs += C.ops[i][r].adjoint().apply(lam[i])
        out.append((g, normalize(lhs)))
    return out


def intermediate_determining(L, Q, C, lam):
    """E_{g^r}(Q.E(L)) + sum_i (D^i_r)^dagger lambda_i == 0 for each r."""
    report = Report("intermediate")
    for g, lhs in _determining_lhs(L, Q, C, lam):
        report.add(f"r={g}", is_zero(lhs), lhs if lhs != 0 else None)
    report.notes.append("constraints declared complete" if C.complete
                        else "constraint set not declared complete")
    return report


def constrained_claw(C, lam, g, system=None):
    """lambda_i D^i_r g^r - g^r (D^i_r)^dagger lambda_i with explicit components."""
    claw = None
    for i in range(C.I):
        for r in range(C.R):
            op = C.ops[i][r]
            if not op.terms:
                continue
            part = adjoint_defect(op, lam[i], g[r])
            claw = part if claw is None else claw + part
    if claw is None:
        p = C.ops[0][0].p if C.ops and C.ops[0] else 1
        m = C.ops[0][0].m if C.ops and C.ops[0] else 1
        claw = ConservationLaw([0] * p, [0] * m, density=0)
    claw.system = system
    return claw


def multiplier_search(L, Q, C, bases, config=None):
    """Search lambda_i in the span of ``bases[i]`` solving the determining equations.

    Returns the list of verified multiplier tuples (a particular solution
    followed by particular + each null direction), or [] when none exists.
    """
    Q = characteristic_of(Q)
    zero = [sp.S.Zero] * C.I
    base = [lhs for _, lhs in _determining_lhs(L, Q, C, zero)]
    unknowns = [(i, b) for i, basis in enumerate(bases) for b in basis]
    columns = []
    for i, b in unknowns:
        lam = list(zero)
        lam[i] = sp.sympify(b)
        columns.append([normalize(lhs - b0) for (_, lhs), b0 in
                        zip(_determining_lhs(L, Q, C, lam), base)])
    particular, null = sampled_linear_solve(columns, base, config)
    if particular is None:
        return []

    def build(vec):
        lam = list(zero)
        for c, (i, b) in zip(vec, unknowns):
            lam[i] += sp.Rational(c.numerator, c.denominator) * b
        return [normalize(x) for x in lam]

    candidates = [build(particular)]
    candidates += [build([a + b for a, b in zip(particular, v)]) for v in null]
    return [lam for lam in candidates if intermediate_determining(L, Q, C, lam)]
