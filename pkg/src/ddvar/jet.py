"""Prolongation structure: shifts, total derivatives, rankings, restriction to solutions."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import sympy as sp
from sympy.polys.domains import QQ
from sympy.polys.fields import field as _frac_field
from sympy.polys.rings import ring as _poly_ring
from sympy.polys.polyerrors import BasePolynomialError

from .errors import NonTerminating, NotSolvable, OverlappingLeaders
from .expr import ContinuousVar, DiscreteVar, JetVar, _generators, _polynomial, _to_field, jets_of, normalize

__all__ = [
    "shift", "total_derivative", "forward_difference", "prolong",
    "Ranking", "DEFAULT_RANKING", "DERIV_MAJOR", "SHIFT_MAJOR", "ranking_by_name",
    "SolvedSystem", "solve_for_leading", "restrict_to_solutions", "is_prolongation",
]


def _shift_raw(e, K):
    K = tuple(int(k) for k in K)
    if not any(K):
        return e
    repl = {}
    for s in e.free_symbols:
        if isinstance(s, JetVar):
            repl[s] = s.shifted(K)
        elif isinstance(s, DiscreteVar) and s.index < len(K) and K[s.index]:
            repl[s] = s + K[s.index]
    return e.xreplace(repl) if repl else e


def shift(e, K):
    """S_K e: n -> n + K and every jet coordinate's shift index moved by K."""
    return normalize(_shift_raw(sp.sympify(e), K))


def _d_raw(e, i):
    if e.is_Atom:
        return _d_sympy(e, i)
    try:
        gens = _generators(e)
    except ValueError:
        return _d_sympy(e, i)
    moving = []
    for g in gens:
        if isinstance(g, JetVar):
            up = g.bumped(i)
            if up is not None:
                moving.append((g, up))
        elif isinstance(g, ContinuousVar):
            if g.index == i:
                moving.append((g, sp.S.One))
        elif not g.is_Symbol and any(isinstance(s, (JetVar, ContinuousVar)) for s in g.free_symbols):
            # transcendental in x or u: leave it to sympy's chain rule
            return _d_sympy(e, i)
    if not moving:
        return sp.S.Zero
    ups = tuple(sorted({up for _, up in moving if up != 1} - set(gens), key=sp.default_sort_key))
    try:
        make = _poly_ring if _polynomial(e) else _frac_field
        K, *elems = make(gens + ups, QQ)
    except BasePolynomialError:
        return _d_sympy(e, i)
    index = dict(zip(gens + ups, elems))
    f = K.from_expr(e) if _polynomial(e) else _to_field(K, e)
    total = K.zero
    for g, up in moving:
        total += f.diff(index[g]) * (K.one if up == 1 else index[up])
    return total.as_expr()


def _d_sympy(e, i):
    result = sp.S.Zero
    for s in e.free_symbols:
        if isinstance(s, ContinuousVar) and s.index == i:
            result += sp.diff(e, s)
        elif isinstance(s, JetVar):
            up = s.bumped(i)
            if up is not None:
                result += up * sp.diff(e, s)
    return result


def total_derivative(e, i=0):
    """D_i e = d/dx^i + u_{J+1_i;K} d/du_{J;K}."""
    return normalize(_d_raw(sp.sympify(e), i))


def forward_difference(e, i=0):
    """D_{n^i} e = S_i e - e."""
    e = sp.sympify(e)
    K = [0] * (i + 1)
    K[i] = 1
    return normalize(_shift_raw(e, K) - e)


@lru_cache(maxsize=16384)
def _prolong_cached(e, J, K):
    for i, j in enumerate(J):
        for _ in range(j):
            e = normalize(_d_raw(e, i))
    return normalize(_shift_raw(e, K))


def prolong(e, J, K):
    """D_J S_K e (derivatives and shifts commute)."""
    return _prolong_cached(sp.sympify(e), tuple(J), tuple(K))


# --- rankings ---------------------------------------------------------------

@dataclass(frozen=True)
class Ranking:
    """Positive ranking of jet coordinates.

    ``kind`` selects the comparison key:

    * ``default``: total order |J| + sum(K), then |J|, then J, then K
    * ``deriv-major``: |J|, J, then sum(K), K
    * ``shift-major``: sum(K), K, then |J|, J

    Ties are broken by the dependent-variable position in ``variables``.
    Shift sums are signed, which keeps S_i increasing.
    """

    kind: str = "default"
    variables: tuple = ()

    def __post_init__(self):
        if self.kind not in ("default", "deriv-major", "shift-major"):
            raise ValueError(f"unknown ranking {self.kind!r}")

    def key(self, jet):
        J, K = jet.J, jet.K
        alpha = self.variables.index(jet.base) if jet.base in self.variables else jet.base
        tie = (alpha if isinstance(alpha, int) else -1, jet.base)
        if self.kind == "default":
            return (sum(J) + sum(K), sum(J), J, K) + tie
        if self.kind == "deriv-major":
            return (sum(J), J, sum(K), K) + tie
        return (sum(K), K, sum(J), J) + tie

    def less(self, a, b):
        return self.key(a) < self.key(b)

    def leader(self, e):
        fields = jets_of(e, arbitrary=False)
        if not fields:
            return None
        return max(fields, key=self.key)

    def with_variables(self, variables):
        return Ranking(self.kind, tuple(variables))


DEFAULT_RANKING = Ranking("default")
DERIV_MAJOR = Ranking("deriv-major")
SHIFT_MAJOR = Ranking("shift-major")


def ranking_by_name(name, variables=()):
    return Ranking(name, tuple(variables))


# --- solved systems ---------------------------------------------------------

def is_prolongation(jet, leader):
    """Offsets (dJ, dK) with jet = D_dJ S_dK leader, or None."""
    if jet.base != leader.base or jet.arbitrary != leader.arbitrary:
        return None
    dJ = tuple(a - b for a, b in zip(jet.J, leader.J))
    if any(d < 0 for d in dJ):
        return None
    return dJ, tuple(a - b for a, b in zip(jet.K, leader.K))


@dataclass(frozen=True)
class SolvedEquation:
    leader: JetVar
    rhs: sp.Expr
    source: sp.Expr
    cone: tuple  # per discrete direction: +1 (only dK >= 0), -1 (dK <= 0) or 0 (any)

    def admits(self, dK):
        return all(c == 0 or c * d >= 0 for c, d in zip(self.cone, dK))


@dataclass(frozen=True)
class SolvedSystem:
    """Equations U_l = omega_l solved for their leading variables."""

    equations: tuple
    ranking: Ranking

    @property
    def leaders(self):
        return tuple(eq.leader for eq in self.equations)

    @property
    def rhs(self):
        return tuple(eq.rhs for eq in self.equations)

    def __len__(self):
        return len(self.equations)


def _recurrence_cone(leader, rhs):
    """Directions in which substituting shifts of ``leader`` stays well founded.

    If omega contains pure shifts S_dK U of its own leader (a recurrence, as in
    v_1' = v_{-1}' + ...), repeated substitution only terminates on the half
    lattice pointing away from those shifts.
    """
    cone = [0] * len(leader.K)
    for s in jets_of(rhs, arbitrary=False):
        off = is_prolongation(s, leader)
        if off is None or any(off[0]):
            continue
        for i, d in enumerate(off[1]):
            if d < 0:
                cone[i] = 1
            elif d > 0:
                cone[i] = -1
    return tuple(cone)


def solve_for_leading(system, ranking=DEFAULT_RANKING):
    """Solve each equation for its highest-ranked jet coordinate.

    Only equations affine in their leader are supported.
    """
    equations = []
    for A in system:
        A = normalize(A)
        U = ranking.leader(A)
        if U is None:
            raise NotSolvable(f"{A} contains no field variable")
        numer, _ = sp.fraction(A)
        numer = sp.expand(numer)
        a = sp.diff(numer, U)
        if U in a.free_symbols or a == 0:
            raise NotSolvable(f"leading variable {U} enters {A} nonlinearly")
        b = normalize(numer - a * U)
        if U in b.free_symbols:
            raise NotSolvable(f"leading variable {U} enters {A} nonlinearly")
        omega = normalize(-b / a)
        equations.append(SolvedEquation(U, omega, A, _recurrence_cone(U, omega)))
    for i, e1 in enumerate(equations):
        for j, e2 in enumerate(equations):
            if i != j and is_prolongation(e1.leader, e2.leader) is not None:
                raise OverlappingLeaders(f"{e1.leader} is a prolongation of {e2.leader}")
    return SolvedSystem(tuple(equations), ranking)


def _substitution(jet, system):
    for eq in system.equations:
        off = is_prolongation(jet, eq.leader)
        if off is not None and eq.admits(off[1]):
            return prolong(eq.rhs, *off)
    return None


def restrict_to_solutions(e, system, max_steps=10_000):
    """Replace prolongations of leading variables by prolongations of omega.

    Each jet is reduced once: its substitute is itself restricted (the jets in
    it rank lower, so the recursion is well founded) and normalized before
    use, which keeps the substituted expression one level deep.
    """
    e = sp.sympify(e)
    memo = {}
    steps = [0]

    def reduced(jet):
        if jet in memo:
            return memo[jet]
        sub = _substitution(jet, system)
        if sub is None:
            memo[jet] = jet
            return jet
        steps[0] += 1
        if steps[0] > max_steps:
            raise NonTerminating(f"more than {max_steps} substitutions")
        value = normalize(sub.xreplace({s: reduced(s) for s in jets_of(sub, arbitrary=False)}))
        memo[jet] = value
        return value

    try:
        repl = {s: reduced(s) for s in jets_of(e, arbitrary=False)}
    except RecursionError:
        raise NonTerminating("substitution chain too deep") from None
    return normalize(e.xreplace(repl))
