"""Symmetry generators, prolongation and symmetry conditions."""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

import mpmath
import sympy as sp

from .errors import SamplingDegenerate, StructureViolation
from .expr import (
    _MODULES, DiscreteVar, JetVar, Signature, _n_points, _random_rational,
    alt, current_config, is_zero, jets_of, normalize,
)
from .jet import _d_raw, prolong, restrict_to_solutions, shift
from .report import Report
from .variational import Lagrangian, euler_lagrange, euler_lagrange_wrt_arbitrary

__all__ = [
    "Characteristic", "Generator", "Structure", "characteristic_of",
    "prolong_apply", "structure_check", "lsc_check", "varsym_check",
    "ansatz_solve", "sampled_linear_solve",
]


@dataclass(frozen=True)
class Characteristic:
    """Q = (Q^1, ..., Q^q), optionally remembering the point data it came from."""

    Q: tuple
    signature: Signature
    xi: tuple | None = None
    phi: tuple | None = None

    def __post_init__(self):
        Q = tuple(normalize(self.signature.validate(sp.sympify(c))) for c in self.Q)
        if len(Q) != self.signature.q:
            raise ValueError(f"characteristic needs {self.signature.q} components, got {len(Q)}")
        object.__setattr__(self, "Q", Q)

    def __getitem__(self, alpha):
        return self.Q[alpha]

    def __iter__(self):
        return iter(self.Q)

    @property
    def arbitrary_jets(self):
        out = set()
        for c in self.Q:
            out |= jets_of(c, arbitrary=True)
        return out

    def is_linear_homogeneous(self):
        """Every term of every component has degree exactly one in the g-jets."""
        gs = self.arbitrary_jets
        if not gs:
            return False
        t = sp.Dummy("t")
        scale = {g: t * g for g in gs}
        return all(normalize(c.xreplace(scale) - t * c) == 0 for c in self.Q)


@dataclass(frozen=True)
class Generator:
    """v = xi^i d/dx^i + phi^a d/du^a (point mode) or v_Q (evolutionary mode)."""

    signature: Signature
    xi: tuple = ()
    phi: tuple = ()
    mode: str = "point"
    characteristic: Characteristic | None = None
    period: tuple | None = None
    name: str = ""

    def __post_init__(self):
        sig = self.signature
        if self.mode == "evolutionary":
            if self.characteristic is None:
                raise ValueError("evolutionary generator needs a characteristic")
            object.__setattr__(self, "xi", (sp.S.Zero,) * sig.p)
            object.__setattr__(self, "phi", self.characteristic.Q)
            return
        if self.mode != "point":
            raise ValueError(f"unknown generator mode {self.mode!r}")
        xi = tuple(normalize(sig.validate(sp.sympify(c))) for c in (self.xi or (0,) * sig.p))
        phi = tuple(normalize(sig.validate(sp.sympify(c))) for c in (self.phi or (0,) * sig.q))
        if len(xi) != sig.p or len(phi) != sig.q:
            raise ValueError("xi/phi lengths do not match the signature")
        for c in phi:
            for s in jets_of(c):
                if s.arbitrary or any(s.J) or any(s.K):
                    raise ValueError(f"point generator phi may depend on unshifted u only, found {s}")
        object.__setattr__(self, "xi", xi)
        object.__setattr__(self, "phi", phi)

    @classmethod
    def evolutionary(cls, Q, name=""):
        return cls(Q.signature, mode="evolutionary", characteristic=Q, name=name)


def characteristic_of(v):
    """Q^a = phi^a - xi^i u^a_{1_i;0}."""
    if isinstance(v, Characteristic):
        return v
    if v.mode == "evolutionary":
        return v.characteristic
    sig = v.signature
    Q = []
    for name, phi in zip(sig.dependent, v.phi):
        q = phi
        for i, xi in enumerate(v.xi):
            J = [0] * sig.p
            J[i] = 1
            q = q - xi * sig.jet(name, J)
        Q.append(q)
    return Characteristic(tuple(Q), sig, v.xi, v.phi)


def _evolutionary_apply(Q, e):
    total = sp.S.Zero
    sig = Q.signature
    for s in jets_of(e, arbitrary=False):
        total += prolong(Q[sig.alpha(s.base)], s.J, s.K) * sp.diff(e, s)
    return total


def prolong_apply(v, e):
    """pr v(e) = xi^i D_i e + sum (S_K D_J Q^a) de/du^a_{J;K}."""
    e = sp.sympify(e)
    Q = characteristic_of(v)
    total = _evolutionary_apply(Q, e)
    if isinstance(v, Generator) and v.mode == "point":
        for i, xi in enumerate(v.xi):
            if xi != 0:
                total += xi * _d_raw(e, i)
    return normalize(total)


# --- structure preservation -------------------------------------------------

@dataclass(frozen=True)
class Structure:
    kind: str  # "full", "reduced" or "fails"
    period: tuple | None = None
    reason: str = ""

    def __str__(self):
        if self.kind == "full":
            return "PreservesFull"
        if self.kind == "reduced":
            return f"PreservesReduced({','.join(map(str, self.period))})"
        return f"Fails({self.reason})"

    def __bool__(self):
        return self.kind != "fails"


def _n_dependent(e):
    return any(isinstance(s, DiscreteVar) for s in e.free_symbols) or e.has(alt, sp.floor)


def structure_check(v, period=None):
    """Whether the prolongation of v preserves the (reduced) prolongation space."""
    if isinstance(v, Characteristic) or v.mode == "evolutionary":
        return Structure("full")
    period = period if period is not None else v.period
    xis = v.xi
    if any(jets_of(xi) for xi in xis):
        return Structure("fails", reason="xi depends on u")
    if not any(_n_dependent(xi) for xi in xis):
        return Structure("full")
    if period is None:
        return Structure("fails", reason="xi depends on n and no period is declared")
    m = v.signature.m
    for mu, r in enumerate(period):
        K = [0] * m
        K[mu] = int(r)
        for xi in xis:
            if not is_zero(shift(xi, K) - xi):
                return Structure("fails", reason=f"xi is not {r}-periodic in {v.signature.discrete[mu]}")
    return Structure("reduced", tuple(int(r) for r in period))


def lsc_check(system, solved, v, period=None):
    """pr v(A_l) restricted to solutions, tested for zero for each l."""
    structure = structure_check(v, period)
    if not structure:
        raise StructureViolation(str(structure))
    report = Report("lsc")
    if structure.kind == "reduced":
        report.notes.append(str(structure))
    for l, A in enumerate(system, 1):
        residual = restrict_to_solutions(prolong_apply(v, A), solved)
        report.add(f"eq={l}", is_zero(residual), residual if residual != 0 else None)
    return report


def _full_arbitrary(sig):
    indep = set(sig.continuous) | set(sig.discrete)
    return [g for g in sig.arbitrary if set(sig.arbitrary_deps.get(g, indep)) >= indep]


def _varsym_residuals(L, Q):
    surplus = prolong_apply(Q, L.expr if isinstance(L, Lagrangian) else L)
    sig = Q.signature
    out = [(name, euler_lagrange(surplus, name)) for name in sig.dependent]
    out += [(g, euler_lagrange_wrt_arbitrary(surplus, g)) for g in _full_arbitrary(sig)]
    return out


def varsym_check(L, Q):
    """pr v_Q(L) is a divergence: every Euler-Lagrange operator annihilates it.

    Arbitrary functions of all independent variables are treated as extra
    dependent variables.  Functions of fewer variables are parameters of the
    family and are not varied.
    """
    Q = characteristic_of(Q)
    report = Report("varsym")
    for name, residual in _varsym_residuals(L, Q):
        report.add(f"E[{name}]", is_zero(residual), residual if residual != 0 else None)
    return report


# --- sampled linear solving ---------------------------------------------------

def _to_fraction(x, max_den=10**6):
    x = mpmath.mpf(x)
    exact = Fraction(int(mpmath.floor(x * 2**200 + mpmath.mpf(0.5))), 2**200)
    return exact.limit_denominator(max_den)


def _sample_matrix(columns, constant, config, rng):
    """Rows [c_1(P) .. c_K(P) | -b(P)] for residual components at sample points."""
    exprs = [e for col in columns for e in col] + list(constant)
    syms = sorted(set().union(*(sp.sympify(e).free_symbols for e in exprs)) if exprs else set(),
                  key=lambda s: s.sort_key())
    ncomp = len(constant)
    fn = sp.lambdify(syms, exprs, modules=_MODULES, dummify=True)
    discrete = [s for s in syms if isinstance(s, DiscreteVar)]
    others = [s for s in syms if not isinstance(s, DiscreteVar)]
    rows = []
    with mpmath.workprec(config.precision):
        for _ in range(config.samples):
            for _attempt in range(config.retries):
                base = {s: _random_rational(rng, config.max_int) for s in others}
                batch = []
                try:
                    for nvals in _n_points(discrete, config, rng):
                        full = {**base, **nvals}
                        args = [mpmath.mpf(v.numerator) / v.denominator if isinstance(v, Fraction)
                                else mpmath.mpf(v) for v in (full[s] for s in syms)]
                        vals = fn(*args)
                        vals = [mpmath.mpf(v) if not isinstance(v, mpmath.mpc) else v for v in vals]
                        if any(isinstance(v, mpmath.mpc) and v.imag != 0 for v in vals):
                            raise ValueError("complex value")
                        vals = [mpmath.re(v) for v in vals]
                        if any(not mpmath.isfinite(v) for v in vals):
                            raise ZeroDivisionError
                        for c in range(ncomp):
                            row = [vals[k * ncomp + c] for k in range(len(columns))]
                            row.append(-vals[len(columns) * ncomp + c])
                            batch.append(row)
                except (ZeroDivisionError, ValueError, TypeError, OverflowError):
                    continue
                rows.extend(batch)
                break
    return rows


def _rref(rows, ncols, precision):
    M = [list(r) for r in rows]
    scale = max((abs(x) for r in M for x in r), default=mpmath.mpf(0))
    tol = scale * mpmath.mpf(2) ** (-precision // 2) if scale else mpmath.mpf(0)
    pivots = []
    r = 0
    for c in range(ncols):
        best = max(range(r, len(M)), key=lambda i: abs(M[i][c]), default=None)
        if best is None or abs(M[best][c]) <= tol:
            continue
        M[r], M[best] = M[best], M[r]
        piv = M[r][c]
        M[r] = [x / piv for x in M[r]]
        for i in range(len(M)):
            if i != r and M[i][c] != 0:
                f = M[i][c]
                M[i] = [a - f * b for a, b in zip(M[i], M[r])]
        pivots.append(c)
        r += 1
        if r == len(M):
            break
    return M, pivots, tol


def sampled_linear_solve(columns, constant=None, config=None):
    """Rational solutions c of sum_k c_k R_k + R_0 == 0 (componentwise).

    ``columns[k]`` lists the residual components of unknown k; ``constant``
    lists those of the inhomogeneous part.  Returns (particular, nullspace)
    with Fractions; particular is None when the system is inconsistent.  Two
    independently seeded sample batches must agree on the rank.
    """
    config = config or current_config()
    K = len(columns)
    if constant is None:
        constant = [sp.S.Zero] * (len(columns[0]) if columns else 0)
    results = []
    with mpmath.workprec(config.precision):
        for seed in (config.seed, config.seed + 0x9E3779B9):
            rows = _sample_matrix(columns, constant, config, random.Random(seed))
            M, pivots, tol = _rref(rows, K + 1, config.precision)
            results.append((M, pivots))
        if len(results[0][1]) != len(results[1][1]):
            raise SamplingDegenerate(
                f"rank {len(results[0][1])} vs {len(results[1][1])} across sample batches")
        M, pivots = results[0]
        if K in pivots:
            particular = None
        else:
            particular = [Fraction(0)] * K
            for row, c in zip(M, pivots):
                particular[c] = _to_fraction(row[K])
        free = [c for c in range(K) if c not in pivots]
        null = []
        for f in free:
            vec = [Fraction(0)] * K
            vec[f] = Fraction(1)
            for row, c in zip(M, pivots):
                vec[c] = -_to_fraction(row[f])
            null.append(vec)
    return particular, null


def _as_components(b, sig):
    if isinstance(b, Characteristic):
        return b.Q
    if isinstance(b, (tuple, list)):
        return tuple(sp.sympify(c) for c in b)
    if sig.q != 1:
        raise ValueError("scalar basis elements need a single dependent variable")
    return (sp.sympify(b),)


def ansatz_solve(problem, basis, signature=None, config=None):
    """Characteristics in the span of ``basis`` satisfying the symmetry condition.

    ``problem`` is a Lagrangian (variational mode) or a pair (equations,
    SolvedSystem) (linearized symmetry condition).  Every returned
    characteristic has been re-verified symbolically.
    """
    if not basis:
        return []
    if isinstance(problem, Lagrangian):
        sig = signature or problem.signature

        def residuals(Q):
            return [r for _, r in _varsym_residuals(problem, Q)]

        def check(Q):
            return varsym_check(problem, Q)
    else:
        equations, solved = problem
        if signature is None:
            raise ValueError("system mode needs the signature")
        sig = signature

        def residuals(Q):
            return [restrict_to_solutions(prolong_apply(Q, A), solved) for A in equations]

        def check(Q):
            return lsc_check(equations, solved, Q)
    elements = [_as_components(b, sig) for b in basis]
    columns = [residuals(Characteristic(b, sig)) for b in elements]
    _, null = sampled_linear_solve(columns, config=config)
    found = []
    for vec in null:
        Q = tuple(sum((sp.Rational(c.numerator, c.denominator) * b[a]
                       for c, b in zip(vec, elements)), sp.S.Zero) for a in range(sig.q))
        Q = Characteristic(Q, sig)
        if check(Q):
            found.append(Q)
    return found
