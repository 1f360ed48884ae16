"""Linear differential-difference operators sum f^{J;K} D_J S_K."""

from __future__ import annotations

from itertools import product
from math import comb

import sympy as sp

from .expr import is_zero, normalize
from .jet import _d_raw, _shift_raw, prolong

__all__ = ["LinearDDOperator", "ConservationLaw", "divergence_of", "adjoint_defect"]


def _key(J, K):
    return tuple(int(j) for j in J), tuple(int(k) for k in K)


class LinearDDOperator:
    """Operator in coefficient-left normal form: one coefficient per (J, K)."""

    __slots__ = ("p", "m", "terms")

    def __init__(self, terms, p, m):
        self.p, self.m = p, m
        acc = {}
        for (J, K), c in (terms.items() if isinstance(terms, dict) else terms):
            JK = _key(J, K)
            if len(JK[0]) != p or len(JK[1]) != m:
                raise ValueError(f"multi-index {JK} does not match (p, m) = ({p}, {m})")
            acc[JK] = acc.get(JK, 0) + sp.sympify(c)
        self.terms = {}
        for JK, c in acc.items():
            c = normalize(c)
            if c != 0:
                self.terms[JK] = c

    # constructors
    @classmethod
    def identity(cls, p, m, coeff=1):
        return cls({((0,) * p, (0,) * m): coeff}, p, m)

    @classmethod
    def D(cls, i, p, m):
        J = [0] * p
        J[i] = 1
        return cls({(tuple(J), (0,) * m): 1}, p, m)

    @classmethod
    def S(cls, K, p):
        return cls({((0,) * p, tuple(K)): 1}, p, len(K))

    @classmethod
    def shift_op(cls, i, k, p, m):
        K = [0] * m
        K[i] = k
        return cls.S(K, p)

    @classmethod
    def forward_difference(cls, i, p, m):
        """D_{n^i} = S_i - id."""
        return cls.shift_op(i, 1, p, m) - cls.identity(p, m)

    @classmethod
    def word(cls, J, K, coeff=1):
        return cls({(tuple(J), tuple(K)): coeff}, len(J), len(K))

    # algebra
    def apply(self, e):
        e = sp.sympify(e)
        return normalize(sum((c * prolong(e, J, K) for (J, K), c in self.terms.items()), sp.S.Zero))

    __call__ = apply

    def __add__(self, other):
        other = self._coerce(other)
        return LinearDDOperator(list(self.terms.items()) + list(other.terms.items()), self.p, self.m)

    __radd__ = __add__

    def __neg__(self):
        return LinearDDOperator({JK: -c for JK, c in self.terms.items()}, self.p, self.m)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, LinearDDOperator):
            return self.compose(other)
        return LinearDDOperator({JK: c * other for JK, c in self.terms.items()}, self.p, self.m)

    def __rmul__(self, other):
        # scalar on the left multiplies coefficients
        return LinearDDOperator({JK: other * c for JK, c in self.terms.items()}, self.p, self.m)

    def _coerce(self, other):
        if isinstance(other, LinearDDOperator):
            return other
        return LinearDDOperator.identity(self.p, self.m, other)

    def compose(self, other):
        """self o other, pushing other's coefficients left with Leibniz' rule."""
        out = []
        for (J, K), a in self.terms.items():
            for (I, L), b in other.terms.items():
                b_shift = _shift_raw(b, K)
                for M in product(*(range(j + 1) for j in J)):
                    weight = 1
                    for j, mm in zip(J, M):
                        weight *= comb(j, mm)
                    rest = tuple(j - mm for j, mm in zip(J, M))
                    db = b_shift
                    for i, r in enumerate(rest):
                        for _ in range(r):
                            db = _d_raw(db, i)
                    if db == 0:
                        continue
                    key = (tuple(mm + i for mm, i in zip(M, I)), tuple(k + l for k, l in zip(K, L)))
                    out.append((key, weight * a * db))
        return LinearDDOperator(out, self.p, self.m)

    def adjoint(self):
        """Formal adjoint: (f D_J S_K)^dagger = S_{-K} (-D)_J o f."""
        total = LinearDDOperator({}, self.p, self.m)
        for (J, K), c in self.terms.items():
            sign = -1 if sum(J) % 2 else 1
            word = LinearDDOperator.word(J, tuple(-k for k in K), sign)
            total = total + word.compose(LinearDDOperator.identity(self.p, self.m, c))
        return total

    def equals(self, other):
        diff = self - other
        return all(is_zero(c) for c in diff.terms.values())

    def is_zero_operator(self):
        return not self.terms

    def coefficients(self):
        return dict(self.terms)

    def __eq__(self, other):
        if not isinstance(other, LinearDDOperator):
            return NotImplemented
        return (self.p, self.m, self.terms) == (other.p, other.m, other.terms)

    def __hash__(self):
        return hash((self.p, self.m, frozenset(self.terms.items())))

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for (J, K), c in sorted(self.terms.items()):
            parts.append(f"({c})*D[{','.join(map(str, J))}|{','.join(map(str, K))}]")
        return " + ".join(parts)


class ConservationLaw:
    """Components (F^1..F^p, G^1..G^m) of a divergence D_i F^i + D_{n^i} G^i.

    ``density`` is the expression the components are claimed to decompose;
    when omitted it is computed from the components.  ``residual`` records
    the part of a claimed density that could not be decomposed.
    """

    def __init__(self, F, G, density=None, system=None, residual=0):
        self.F = tuple(normalize(f) for f in F)
        self.G = tuple(normalize(g) for g in G)
        self.density = normalize(density) if density is not None else divergence_of(self)
        self.system = system
        self.residual = normalize(residual)

    def __add__(self, other):
        return ConservationLaw(_pad_add(self.F, other.F), _pad_add(self.G, other.G),
                               self.density + other.density, self.system or other.system,
                               self.residual + other.residual)

    def __neg__(self):
        return ConservationLaw([-f for f in self.F], [-g for g in self.G], -self.density,
                               self.system, -self.residual)

    def __sub__(self, other):
        return self + (-other)

    def __repr__(self):
        return f"ConservationLaw(F={list(self.F)}, G={list(self.G)})"


def _pad_add(a, b):
    size = max(len(a), len(b))
    a = tuple(a) + (0,) * (size - len(a))
    b = tuple(b) + (0,) * (size - len(b))
    return [x + y for x, y in zip(a, b)]


def divergence_of(claw):
    """sum_i D_i F^i + sum_i D_{n^i} G^i."""
    total = sp.S.Zero
    for i, f in enumerate(claw.F):
        total += _d_raw(sp.sympify(f), i)
    for i, g in enumerate(claw.G):
        K = [0] * (i + 1)
        K[i] = 1
        g = sp.sympify(g)
        total += _shift_raw(g, K) - g
    return normalize(total)


def adjoint_defect(op, f, g):
    """Components whose divergence is f*op(g) - (op^dagger f)*g.

    Each word W = D_J S_K is peeled one elementary step A at a time (W = A B):
    f W g - (W^dagger f) g = [f A(Bg) - (A^dagger f)(Bg)] + [(A^dagger f) B g - (B^dagger A^dagger f) g].
    The first bracket is D_i(f Bg) for A = D_i, D_{n^i}((S_i^{-1} f) Bg) for
    A = S_i and -D_{n^i}(f S_i^{-1} Bg) for A = S_i^{-1}.
    """
    p, m = op.p, op.m
    F = [sp.S.Zero] * p
    G = [sp.S.Zero] * m
    f, g = sp.sympify(f), sp.sympify(g)
    for (J, K), c in op.terms.items():
        h = c * f
        J, K = list(J), list(K)
        while any(J) or any(K):
            i = next((i for i, j in enumerate(J) if j), None)
            if i is not None:
                J[i] -= 1
                F[i] += h * prolong(g, J, K)
                h = -_d_raw(h, i)
                continue
            i = next(i for i, k in enumerate(K) if k)
            back = [0] * m
            back[i] = -1
            if K[i] > 0:
                K[i] -= 1
                h = _shift_raw(h, back)
                G[i] += h * prolong(g, J, K)
            else:
                K[i] += 1
                G[i] -= h * _shift_raw(prolong(g, J, K), back)
                back[i] = 1
                h = _shift_raw(h, back)
    density = f * op.apply(g) - op.adjoint().apply(f) * g
    return ConservationLaw(F, G, density)
