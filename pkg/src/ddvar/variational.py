"""Euler-Lagrange operators, the divergence test and conservation-law checks."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import sympy as sp

from .expr import Signature, Verdict, ZeroTest, is_zero, jets_of, normalize
from .jet import _d_raw, _shift_raw, prolong, restrict_to_solutions
from .operators import ConservationLaw, divergence_of
from .report import Check, Report

__all__ = [
    "Lagrangian", "ConservationLaw", "Check", "Report",
    "euler_lagrange", "euler_lagrange_wrt_arbitrary", "euler_lagrange_all",
    "is_divergence", "divergence_of", "verify_claw", "triviality_check", "in_linear_span",
    "TRIVIAL", "NOT_SHOWN_TRIVIAL",
]

TRIVIAL = "trivial"
NOT_SHOWN_TRIVIAL = "not-shown-trivial"


@dataclass(frozen=True)
class Lagrangian:
    expr: sp.Expr
    signature: Signature

    def __post_init__(self):
        e = self.signature.validate(sp.sympify(self.expr))
        if jets_of(e, arbitrary=True):
            raise ValueError("a Lagrangian may not contain arbitrary-function symbols")
        object.__setattr__(self, "expr", normalize(e))


def _as_expr(L):
    return L.expr if isinstance(L, Lagrangian) else sp.sympify(L)


def _euler(e, select, canonical=True):
    total = sp.S.Zero
    for s in jets_of(e):
        if not select(s):
            continue
        term = _shift_raw(sp.diff(e, s), tuple(-k for k in s.K))
        for i, j in enumerate(s.J):
            for _ in range(j):
                term = -_d_raw(term, i)
        total += term
    return normalize(total) if canonical else total


def euler_lagrange(L, name):
    """E_{u^a}(L) = (-D)_J S_{-K} dL/du^a_{J;K}, summed over occurring (J, K)."""
    return _euler(_as_expr(L), lambda s: not s.arbitrary and s.base == name)


def euler_lagrange_wrt_arbitrary(e, name):
    """Same operator with respect to g^r, field coordinates held as subsidiary symbols."""
    return _euler(sp.sympify(e), lambda s: s.arbitrary and s.base == name)


def euler_lagrange_all(L, signature=None):
    signature = signature or L.signature
    return {name: euler_lagrange(L, name) for name in signature.dependent}


def is_divergence(e, signature):
    """Kernel test: e is a divergence iff every E_{u^a}(e) vanishes.

    Returns a Report whose items are the per-variable tests; a failing item
    names the witness variable.
    """
    report = Report("divtest")
    e = sp.sympify(e)
    for name in signature.dependent:
        residual = _euler(e, lambda s: not s.arbitrary and s.base == name, canonical=False)
        report.add(name, is_zero(residual))
    return report


def verify_claw(claw, system, equations=None):
    """(a) components reproduce the density, (b) the density vanishes on solutions.

    ``equations`` are extra linear equations holding on solutions (see
    :func:`in_linear_span`), used when (b) is not settled by restriction.
    """
    report = Report("claw-verify")
    report.add("divergence", is_zero(divergence_of(claw) - claw.density))
    restricted = restrict_to_solutions(claw.density, system)
    test = is_zero(restricted)
    if not test and equations and in_linear_span(restricted, equations):
        test = ZeroTest(Verdict.YES)
        report.notes.append("density lies in the span of the equations")
    report.add("on-solutions", test)
    return report


def _field_linear(e):
    """True if ``e`` is a polynomial of degree <= 1 without constant term in the field jets."""
    fields = sorted(jets_of(e, arbitrary=False), key=lambda s: s.sort_key())
    if not fields:
        return e == 0
    numer, denom = sp.fraction(sp.together(e))
    if jets_of(denom, arbitrary=False):
        return False
    poly = sp.Poly(sp.expand(numer), *fields)
    return poly.total_degree() <= 1 and poly.coeff_monomial(1) == 0


def in_linear_span(e, equations):
    """Whether e = sum c * D_J S_K A_l with every c free of field jets.

    Only linear equations and linear e are considered; the prolongations tried
    are those whose coordinates can overlap the coordinates of e.  A True
    answer means e vanishes on every solution of the equations.
    """
    e = normalize(e)
    if e == 0:
        return True
    equations = [normalize(A) for A in equations if A != 0]
    if not _field_linear(e) or not all(_field_linear(A) for A in equations):
        return False
    target = jets_of(e, arbitrary=False)
    p = len(next(iter(target)).J)
    m = len(next(iter(target)).K)
    candidates = []
    for A in equations:
        jets = jets_of(A, arbitrary=False)
        if not jets:
            continue
        maxJ = [max(t.J[i] for t in target) - min(s.J[i] for s in jets) for i in range(p)]
        lowK = [min(t.K[i] for t in target) - max(s.K[i] for s in jets) for i in range(m)]
        highK = [max(t.K[i] for t in target) - min(s.K[i] for s in jets) for i in range(m)]
        if any(j < 0 for j in maxJ):
            continue
        for J in product(*(range(j + 1) for j in maxJ)):
            for K in product(*(range(lo, hi + 1) for lo, hi in zip(lowK, highK))):
                candidates.append(prolong(A, J, K))
    if not candidates:
        return False
    cs = sp.symbols(f"c0:{len(candidates)}")
    residual = sp.expand(sp.fraction(sp.together(e - sum(c * P for c, P in zip(cs, candidates))))[0])
    fields = sorted(jets_of(residual, arbitrary=False), key=lambda s: s.sort_key())
    conditions = sp.Poly(residual, *fields).coeffs() if fields else [residual]
    return bool(sp.linsolve(conditions, cs))


def triviality_check(claw, system, equations=None):
    """Sufficient test that ``claw`` is equivalent to zero.

    Restrict every component to solutions.  If the restricted components have
    identically vanishing divergence, the claw equals the divergence of the
    differences (component minus its restriction), and those vanish on
    solutions.  Components that restrict to zero are the special case.
    ``equations`` may add linear equations that hold on solutions but are not
    part of the solved system; a restricted component in their linear span
    counts as zero.
    """
    F = [restrict_to_solutions(f, system) for f in claw.F]
    G = [restrict_to_solutions(g, system) for g in claw.G]
    if equations:
        F = [0 if in_linear_span(f, equations) else f for f in F]
        G = [0 if in_linear_span(g, equations) else g for g in G]
    if all(c == 0 for c in F + G):
        return TRIVIAL
    if is_zero(divergence_of(ConservationLaw(F, G, density=0))):
        return TRIVIAL
    return NOT_SHOWN_TRIVIAL
