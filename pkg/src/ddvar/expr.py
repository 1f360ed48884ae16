"""Symbolic substrate: jet coordinates, normalization, evaluation, identity testing.

Expressions are plain sympy expressions built from the symbol classes defined
here.  Jet coordinates ``u^a_{J;K}`` are :class:`JetVar` symbols that carry
their derivative multi-index ``J`` and shift multi-index ``K``, so every
operation in the package can read the prolongation structure straight off an
expression without consulting a signature.
"""

from __future__ import annotations

import contextlib
import contextvars
import enum
import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import mpmath
import sympy as sp
from sympy.polys.domains import QQ
from sympy.polys.fields import field as _frac_field
from sympy.polys.rings import ring as _poly_ring
from sympy.polys.polyerrors import BasePolynomialError

from .errors import DomainError, NonEvaluable, UndeclaredSymbol

__all__ = [
    "ContinuousVar", "DiscreteVar", "Parameter", "JetVar", "alt", "ln",
    "Signature", "SamplingConfig", "Verdict", "ZeroTest",
    "normalize", "is_zero", "evaluate", "jets_of", "using_config",
    "current_config",
]

ln = sp.log


class ContinuousVar(sp.Symbol):
    """Continuous independent variable x^i (``index`` is i, 0-based)."""

    def __new__(cls, name, index):
        obj = sp.Symbol.__xnew__(cls, name, real=True)
        obj.index = int(index)
        return obj

    def __getnewargs_ex__(self):
        return (self.name, self.index), {}

    def _hashable_content(self):
        return super()._hashable_content() + (self.index,)


class DiscreteVar(sp.Symbol):
    """Discrete independent variable n^i (``index`` is i, 0-based)."""

    def __new__(cls, name, index):
        obj = sp.Symbol.__xnew__(cls, name, integer=True)
        obj.index = int(index)
        return obj

    def __getnewargs_ex__(self):
        return (self.name, self.index), {}

    def _hashable_content(self):
        return super()._hashable_content() + (self.index,)


class Parameter(sp.Symbol):
    """Constant symbol (step size, group parameter); fixed by D_i and S_K."""

    def __new__(cls, name):
        return sp.Symbol.__xnew__(cls, name, real=True)

    def __getnewargs_ex__(self):
        return (self.name,), {}


def _jet_name(base, J, K):
    return "%s[%s|%s]" % (base, ",".join(map(str, J)), ",".join(map(str, K)))


class JetVar(sp.Symbol):
    """Jet coordinate ``base[J|K]``.

    ``arbitrary`` marks the symbols g^r of arbitrary functions.  ``xdeps`` and
    ``ndeps`` record which independent variables the underlying function
    depends on; a function of x only is unchanged by shifts, and its total
    derivative in a direction it does not depend on vanishes.
    """

    def __new__(cls, base, J, K, arbitrary=False, xdeps=None, ndeps=None):
        J = tuple(int(j) for j in J)
        K = tuple(int(k) for k in K)
        if any(j < 0 for j in J):
            raise ValueError(f"negative derivative index in {base}{J}")
        xdeps = tuple(bool(d) for d in xdeps) if xdeps is not None else (True,) * len(J)
        ndeps = tuple(bool(d) for d in ndeps) if ndeps is not None else (True,) * len(K)
        obj = sp.Symbol.__xnew__(cls, _jet_name(base, J, K), real=True)
        obj.base = base
        obj.J = J
        obj.K = K
        obj.arbitrary = bool(arbitrary)
        obj.xdeps = xdeps
        obj.ndeps = ndeps
        return obj

    def __getnewargs_ex__(self):
        return (self.base, self.J, self.K, self.arbitrary, self.xdeps, self.ndeps), {}

    def _hashable_content(self):
        return super()._hashable_content() + (self.arbitrary, self.xdeps, self.ndeps)

    def with_indices(self, J=None, K=None):
        return JetVar(self.base, self.J if J is None else J, self.K if K is None else K,
                      self.arbitrary, self.xdeps, self.ndeps)

    def bumped(self, i):
        """D_i of this coordinate, or None if the function ignores x^i."""
        if not self.xdeps[i]:
            return None
        J = list(self.J)
        J[i] += 1
        return self.with_indices(J=J)

    def shifted(self, K):
        K = tuple(K) + (0,) * (len(self.K) - len(K))
        K = tuple(k if dep else 0 for k, dep in zip(K, self.ndeps))
        if not any(K):
            return self
        return self.with_indices(K=tuple(a + b for a, b in zip(self.K, K)))


class alt(sp.Function):
    """(-1)^n with exact integer semantics; integer offsets are pulled out."""

    @classmethod
    def eval(cls, arg):
        if arg.is_Integer:
            return sp.Integer(-1) if int(arg) % 2 else sp.Integer(1)
        const, rest = arg.as_coeff_Add()
        if const.is_Integer and const != 0:
            return sp.Integer(-1) ** int(const) * cls(rest)
        if arg.could_extract_minus_sign():
            return cls(-arg)
        return None

    def _eval_is_integer(self):
        return True

    def _eval_power(self, exponent):
        if exponent.is_Integer:
            return sp.Integer(1) if int(exponent) % 2 == 0 else self
        return None

    def _eval_derivative(self, s):
        return sp.S.Zero


def jets_of(e, arbitrary=None):
    """Jet coordinates occurring in ``e`` (optionally filtered by kind)."""
    found = e.atoms(JetVar) if isinstance(e, sp.Basic) else set()
    if arbitrary is None:
        return found
    return {j for j in found if j.arbitrary == arbitrary}


@dataclass(frozen=True)
class Signature:
    """Names of the independent, dependent and auxiliary variables of a problem.

    ``arbitrary_deps`` maps an arbitrary-function name to the subset of
    independent variable names it depends on; unlisted functions depend on all
    of them.
    """

    continuous: tuple
    discrete: tuple
    dependent: tuple
    arbitrary: tuple = ()
    parameters: tuple = ()
    arbitrary_deps: dict = field(default_factory=dict, hash=False, compare=False)

    def __post_init__(self):
        for name in ("continuous", "discrete", "dependent", "arbitrary", "parameters"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        if not self.continuous or not self.discrete:
            raise ValueError("need at least one continuous and one discrete variable")
        names = (self.continuous + self.discrete + self.dependent
                 + self.arbitrary + self.parameters)
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate names in signature: {names}")
        indep = set(self.continuous) | set(self.discrete)
        for g, deps in self.arbitrary_deps.items():
            if g not in self.arbitrary or not set(deps) <= indep:
                raise ValueError(f"bad dependency declaration for {g}: {deps}")

    @property
    def p(self):
        return len(self.continuous)

    @property
    def m(self):
        return len(self.discrete)

    @property
    def q(self):
        return len(self.dependent)

    @property
    def x(self):
        return tuple(ContinuousVar(name, i) for i, name in enumerate(self.continuous))

    @property
    def n(self):
        return tuple(DiscreteVar(name, i) for i, name in enumerate(self.discrete))

    def param(self, name):
        if name not in self.parameters:
            raise UndeclaredSymbol(name)
        return Parameter(name)

    def jet(self, name, J=None, K=None):
        """The coordinate ``name[J|K]`` (zero multi-indices by default)."""
        J = tuple(J) if J is not None else (0,) * self.p
        K = tuple(K) if K is not None else (0,) * self.m
        if len(J) != self.p or len(K) != self.m:
            raise ValueError(f"multi-index lengths must be ({self.p}, {self.m})")
        if name in self.dependent:
            return JetVar(name, J, K)
        if name in self.arbitrary:
            deps = self.arbitrary_deps.get(name)
            if deps is None:
                return JetVar(name, J, K, arbitrary=True)
            xdeps = tuple(v in deps for v in self.continuous)
            ndeps = tuple(v in deps for v in self.discrete)
            J = tuple(j if d else 0 for j, d in zip(J, xdeps))
            K = tuple(k if d else 0 for k, d in zip(K, ndeps))
            return JetVar(name, J, K, arbitrary=True, xdeps=xdeps, ndeps=ndeps)
        raise UndeclaredSymbol(name)

    def symbol(self, name):
        """Resolve a bare name (independent variable, parameter or u^a)."""
        if name in self.continuous:
            return ContinuousVar(name, self.continuous.index(name))
        if name in self.discrete:
            return DiscreteVar(name, self.discrete.index(name))
        if name in self.parameters:
            return Parameter(name)
        return self.jet(name)

    def alpha(self, name):
        return self.dependent.index(name)

    def validate(self, e):
        """Raise UndeclaredSymbol unless every symbol of ``e`` is declared here."""
        for s in sp.sympify(e).free_symbols:
            if isinstance(s, JetVar):
                pool = self.arbitrary if s.arbitrary else self.dependent
                if s.base not in pool or len(s.J) != self.p or len(s.K) != self.m:
                    raise UndeclaredSymbol(s.name)
            elif isinstance(s, ContinuousVar):
                if s.index >= self.p or self.continuous[s.index] != s.name:
                    raise UndeclaredSymbol(s.name)
            elif isinstance(s, DiscreteVar):
                if s.index >= self.m or self.discrete[s.index] != s.name:
                    raise UndeclaredSymbol(s.name)
            elif isinstance(s, Parameter):
                if s.name not in self.parameters:
                    raise UndeclaredSymbol(s.name)
            else:
                raise UndeclaredSymbol(s.name)
        return e


# --- normalization ---------------------------------------------------------

def normalize(e, signature=None):
    """Canonical form: rational structure over a common, gcd-reduced denominator.

    Transcendental subterms are opaque atoms whose arguments are normalized
    recursively.
    """
    e = sp.sympify(e)
    if signature is not None:
        signature.validate(e)
    return _normalize(e)


@lru_cache(maxsize=8192)
def _normalize(e):
    if e.is_Atom:
        return e
    e = _normalize_inner(e)
    if e.is_Atom:
        return e
    # rebuilding in QQ[generators] or QQ(generators) gives the same result as
    # cancel() without its expression-level expansion
    try:
        gens = _generators(e)
        if _polynomial(e):
            return _poly_ring(gens, QQ)[0].from_expr(e).as_expr()
        return _to_field(_frac_field(gens, QQ)[0], e).as_expr()
    except (BasePolynomialError, ValueError):
        return sp.cancel(e)


def _to_field(K, e):
    """Element of the fraction field K equal to e, with a single final cancellation.

    sympy's own conversion cancels after every binary operation; here
    numerator and denominator are accumulated separately (sums over the lcm
    of the denominators) and reduced once.
    """
    R = K.ring
    index = dict(zip(K.symbols, R.gens))

    def build(t):
        g = index.get(t)
        if g is not None:
            return g, R.one
        if t.is_Rational:
            return R(t.p), R(t.q)
        if t.is_Add:
            parts = [build(a) for a in t.args]
            den = R.one
            for _, d in parts:
                if d != 1 and d != den:
                    den = den.lcm(d)
            num = R.zero
            for n, d in parts:
                num += n if d == den else n * den.exquo(d)
            f = K.new(num, den)
            return f.numer, f.denom
        if t.is_Mul:
            num, den = R.one, R.one
            for a in t.args:
                n, d = build(a)
                num, den = num * n, den * d
            return num, den
        if t.is_Pow and t.exp.is_Integer:
            n, d = build(t.base)
            k = int(t.exp)
            return (n**k, d**k) if k >= 0 else (d**-k, n**-k)
        if t.is_Pow and index.get(1 / t) is not None:
            return R.one, index[1 / t]
        raise ValueError(f"cannot represent {t} in {K}")

    num, den = build(e)
    return K.new(num, den)


def _generators(e):
    """Atoms that rational arithmetic treats as indeterminates, in canonical order."""
    out = set()

    def walk(t):
        if t.is_Add or t.is_Mul:
            for a in t.args:
                walk(a)
        elif t.is_Pow and t.exp.is_Integer:
            walk(t.base)
        elif t.is_Symbol or isinstance(t, sp.Function) or t.is_Pow:
            out.add(t)
        elif not t.is_Rational:
            raise ValueError(f"no rational structure for {t}")

    walk(e)
    return tuple(sorted(out, key=sp.default_sort_key))


def _polynomial(e):
    if e.is_Pow:
        return e.exp.is_Integer and e.exp >= 0 and _polynomial(e.base)
    if e.is_Add or e.is_Mul:
        return all(_polynomial(a) for a in e.args)
    return e.is_Atom or isinstance(e, sp.Function)


def _normalize_inner(e):
    if e.is_Atom:
        return e
    if isinstance(e, sp.Function):
        return e.func(*[_normalize(a) for a in e.args])
    if e.is_Pow and not e.exp.is_Integer:
        return sp.Pow(_normalize(e.base), _normalize(e.exp))
    return e.func(*[_normalize_inner(a) for a in e.args])


# --- sampling configuration ------------------------------------------------

@dataclass(frozen=True)
class SamplingConfig:
    samples: int = 8
    precision: int = 128
    tolerance: float = 1e-25
    n_window: tuple = (-3, 3)
    max_int: int = 10**4
    seed: int = 0
    retries: int = 25
    max_window_points: int = 64
    # expressions with more operations than this skip exact normalization
    exact_limit: int = 4000


_CONFIG = contextvars.ContextVar("ddvar_sampling", default=SamplingConfig())


def current_config():
    return _CONFIG.get()


@contextlib.contextmanager
def using_config(config=None, **overrides):
    """Temporarily replace the sampling configuration used by is_zero."""
    base = config if config is not None else _CONFIG.get()
    if overrides:
        base = SamplingConfig(**{**base.__dict__, **overrides})
    token = _CONFIG.set(base)
    try:
        yield base
    finally:
        _CONFIG.reset(token)


class Verdict(enum.Enum):
    YES = "yes"
    PROBABLY_YES = "probably-yes"
    NO = "no"


@dataclass(frozen=True)
class ZeroTest:
    """Outcome of an identity test.  Truthy unless the verdict is NO."""

    verdict: Verdict
    samples: int = 0
    witness: dict | None = None
    residual: object = None

    def __bool__(self):
        return self.verdict is not Verdict.NO

    @property
    def confidence(self):
        """Rough certainty: 1 for exact zero, else 1 - 2^-samples."""
        if self.verdict is Verdict.YES:
            return 1.0
        if self.verdict is Verdict.NO:
            return 0.0
        return 1.0 - 2.0 ** (-self.samples)

    def __str__(self):
        if self.verdict is Verdict.PROBABLY_YES:
            return f"probably-yes({self.samples} samples)"
        return self.verdict.value


def _alt_num(k):
    return 1 if int(k) % 2 == 0 else -1


_MODULES = [{"alt": _alt_num, "floor": mpmath.floor}, "mpmath"]


@lru_cache(maxsize=2048)
def _compiled(e, expand=True):
    """Lambdified (terms..., denominator); the terms give the relative scale."""
    if not expand:
        terms, denom = sp.Add.make_args(e), sp.S.One
    else:
        numer, denom = sp.fraction(sp.together(e)) if e.is_Mul or e.is_Pow else (e, sp.S.One)
        terms = sp.Add.make_args(sp.expand(numer)) if numer.is_Add else (numer,)
    syms = tuple(sorted(e.free_symbols, key=lambda s: s.sort_key()))
    fn = sp.lambdify(syms, list(terms) + [denom], modules=_MODULES, dummify=True)
    return syms, fn


def _random_rational(rng, bound):
    return Fraction(rng.randint(1, bound), rng.randint(1, bound))


def _n_points(discrete, config, rng):
    lo, hi = config.n_window
    window = range(lo, hi + 1)
    total = len(window) ** len(discrete)
    if total <= config.max_window_points:
        return [dict(zip(discrete, combo)) for combo in itertools.product(window, repeat=len(discrete))]
    return [{s: rng.choice(window) for s in discrete} for _ in range(config.max_window_points)]


def _is_real(v):
    return not isinstance(v, mpmath.mpc) or v.imag == 0


def _sample_values(e, config, rng):
    """Yield (point, value, scale) tuples over the configured sample set."""
    syms, fn = _compiled(e, sp.count_ops(e) <= config.exact_limit)
    discrete = [s for s in syms if isinstance(s, DiscreteVar)]
    others = [s for s in syms if not isinstance(s, DiscreteVar)]
    npoints = _n_points(discrete, config, rng)
    with mpmath.workprec(config.precision):
        for _ in range(config.samples):
            for attempt in range(config.retries):
                point = {s: _random_rational(rng, config.max_int) for s in others}
                results = []
                try:
                    for nvals in npoints:
                        full = {**point, **nvals}
                        args = [mpmath.mpf(full[s].numerator) / full[s].denominator
                                if isinstance(full[s], Fraction) else mpmath.mpf(full[s])
                                for s in syms]
                        vals = fn(*args)
                        if not all(_is_real(v) for v in vals):
                            raise ValueError("complex value")
                        vals = [mpmath.re(v) for v in vals]
                        if vals[-1] == 0:
                            raise ZeroDivisionError
                        terms = vals[:-1]
                        results.append((full, mpmath.fsum(terms), mpmath.fsum(abs(t) for t in terms)))
                except (ZeroDivisionError, ValueError, TypeError, OverflowError):
                    continue
                yield from results
                break
            else:
                raise NonEvaluable(f"no evaluable sample point for {e} after {config.retries} retries")


def is_zero(e, config=None):
    """Decide e == 0: exactly if it normalizes to 0, otherwise by sampling.

    Expressions larger than ``config.exact_limit`` operations go straight to
    sampling, since gcd-based normalization can blow up on them.
    """
    config = config or current_config()
    e = sp.sympify(e)
    if not e.free_symbols or sp.count_ops(e) <= config.exact_limit:
        e = normalize(e)
        if e == 0:
            return ZeroTest(Verdict.YES)
    if not e.free_symbols:
        return ZeroTest(Verdict.NO, witness={}, residual=e)
    rng = random.Random(config.seed)
    count = 0
    for point, value, scale in _sample_values(e, config, rng):
        count += 1
        if abs(value) > config.tolerance * max(scale, mpmath.mpf(0)) or (scale == 0 and value != 0):
            witness = {str(k): v for k, v in point.items()}
            return ZeroTest(Verdict.NO, count, witness, value)
    return ZeroTest(Verdict.PROBABLY_YES, count)


def sample_points(symbols, config, rng):
    """Random evaluation points (dicts) in the style used by is_zero."""
    symbols = list(symbols)
    discrete = [s for s in symbols if isinstance(s, DiscreteVar)]
    others = [s for s in symbols if not isinstance(s, DiscreteVar)]
    lo, hi = config.n_window
    point = {s: _random_rational(rng, config.max_int) for s in others}
    point.update({s: rng.randint(lo, hi) for s in discrete})
    return point


def evaluate(e, point, precision=128):
    """Value of ``e`` at ``point`` (symbol or name -> rational/int).

    Exact (a sympy Rational) when the result is rational, otherwise an mpmath
    number at ``precision`` bits.
    """
    e = sp.sympify(e)
    by_name = {}
    for k, v in point.items():
        by_name[k if isinstance(k, str) else k.name] = v
    subs = {}
    for s in e.free_symbols:
        if s.name not in by_name:
            raise ValueError(f"no value for {s.name}")
        v = by_name[s.name]
        subs[s] = sp.Rational(v.numerator, v.denominator) if isinstance(v, Fraction) else sp.sympify(v)
    for node in sp.preorder_traversal(e.xreplace(subs)):
        if isinstance(node, sp.log) and node.args[0].is_number and node.args[0].is_nonpositive:
            raise DomainError(f"ln of non-positive value {node.args[0]}")
    value = e.xreplace(subs)
    if value.has(sp.zoo, sp.nan, sp.oo, -sp.oo, sp.I):
        raise DomainError(f"{e} is undefined at {point}")
    if value.is_Rational:
        return value
    digits = int(precision * 0.30103) + 1
    with mpmath.workprec(precision):
        return mpmath.mpf(sp.N(value, digits))
