"""Acceptance suite: one test per numbered criterion.

Run with ``pytest tests/test_acceptance.py``; the terminal summary prints one
``criterion N: pass`` line per criterion.
"""

import random
import time

import pytest
import sympy as sp

from ddvar import (
    DERIV_MAJOR, SHIFT_MAJOR, TRIVIAL, Characteristic, ConservationLaw, ConstraintSet, Generator,
    Lagrangian, LinearDDOperator, Signature, Verdict, ansatz_solve, characteristic_of,
    constrained_claw, divergence_of, euler_lagrange, ibp_claw, intermediate_determining,
    is_divergence, is_zero, lsc_check, noether_density, parse_expr, parse_operator, prolong_apply,
    relation_verify, RelationCertificate, alt, shift, solve_for_leading, structure_check,
    total_derivative, triviality_check, varsym_check, verify_claw,
)

from conftest import SCALAR, random_claw, random_expr


def _timed(budget):
    """Assert that the wrapped block stays inside its runtime budget."""
    class _Clock:
        def __enter__(self):
            self.t0 = time.perf_counter()
            return self

        def __exit__(self, *exc):
            self.elapsed = time.perf_counter() - self.t0
            if exc[0] is None:
                assert self.elapsed < budget, f"took {self.elapsed:.1f}s, budget {budget}s"
    return _Clock()


# --- problems ------------------------------------------------------------------

VOLTERRA = Signature(("x",), ("n",), ("v",), arbitrary=("g1", "g2"),
                     arbitrary_deps={"g1": ("x",), "g2": ("x",)})
VOLTERRA_L = "v[0|-1]*v[1|0] - ln(v[0|2] - v[0|0])"

LINEAR = Signature(("x",), ("n",), ("u", "v", "w"), arbitrary=("g1", "g2", "g3"))
LINEAR_L = "(u[0|1] - v - w[1|0]/2)*w[1|0] + v*(u[0|1] - u)"


def volterra():
    L = Lagrangian(parse_expr(VOLTERRA_L, VOLTERRA), VOLTERRA)
    E = euler_lagrange(L, "v")
    return L, E, solve_for_leading([E])


def linear():
    L = Lagrangian(parse_expr(LINEAR_L, LINEAR), LINEAR)
    E = [euler_lagrange(L, a) for a in LINEAR.dependent]
    return L, E, solve_for_leading(E[:2], SHIFT_MAJOR)


def sampled_ok(test, config_samples=8):
    """Exact zero, or enough samples all under tolerance."""
    if test.verdict is Verdict.YES:
        return True
    return test.verdict is Verdict.PROBABLY_YES and test.samples >= config_samples


# --- 1 ---------------------------------------------------------------------------

@pytest.mark.criterion(1)
def test_c1_euler_lagrange_volterra():
    with _timed(10):
        L, E, _ = volterra()
        expected = parse_expr("v[1|1] - v[1|-1] + 1/(v[0|2] - v) - 1/(v - v[0|-2])", VOLTERRA)
        assert sp.simplify(E - expected) == 0
        assert is_zero(E - expected).verdict is Verdict.YES


# --- 2 ---------------------------------------------------------------------------

@pytest.mark.criterion(2)
def test_c2_divergence_kernel():
    rng = random.Random(2)
    with _timed(10):
        for _ in range(50):
            claw = random_claw(rng, SCALAR, depth=2)
            report = is_divergence(divergence_of(claw), SCALAR)
            assert all(c.test.verdict is not Verdict.NO for c in report.items), claw
        report = is_divergence(parse_expr("u[0|0]", SCALAR), SCALAR)
        assert report.items[0].test.verdict is Verdict.NO


# --- 3 ---------------------------------------------------------------------------

VOLTERRA_CLAWS = {
    # D_x(1/u) + D_n(u + u_{-1}) with u = 1/(v_1 - v_{-1})
    "1": ("v[0|1] - v[0|-1]", "1/(v[0|1] - v[0|-1]) + 1/(v - v[0|-2])"),
    "alt(n)": ("alt(n)*(v[0|1] - v[0|-1])",
               "-alt(n)*(1/(v[0|1] - v[0|-1]) - 1/(v - v[0|-2]))"),
}


@pytest.mark.criterion(3)
@pytest.mark.parametrize("q", sorted(VOLTERRA_CLAWS))
def test_c3_volterra_conservation_laws(q):
    with _timed(10):
        L, _, solved = volterra()
        F, G = VOLTERRA_CLAWS[q]
        Q = Characteristic((parse_expr(q, VOLTERRA),), VOLTERRA)
        claw = ConservationLaw([parse_expr(F, VOLTERRA)], [parse_expr(G, VOLTERRA)],
                               density=noether_density(L, Q))
        report = verify_claw(claw, solved)
        assert [c.label for c in report.items] == ["divergence", "on-solutions"]
        for c in report.items:
            assert c.passed and sampled_ok(c.test), c


# --- 4 ---------------------------------------------------------------------------

@pytest.mark.criterion(4)
def test_c4_variational_point_symmetries():
    with _timed(10):
        L, _, _ = volterra()
        Q = Characteristic((parse_expr("g1 + alt(n)*g2", VOLTERRA),), VOLTERRA)
        assert varsym_check(L, Q).passed
        basis = [parse_expr(b, VOLTERRA) for b in ("1", "alt(n)", "x", "x*alt(n)", "v")]
        found = ansatz_solve(L, basis)
        assert len(found) == 4
        # the span is exactly that of {1, alt(n), x, x*alt(n)}
        a = sp.Symbol("a")
        x = VOLTERRA.x[0]
        monomials = [1, a, x, x * a]
        rows = []
        for q in found:
            assert not q[0].has(VOLTERRA.jet("v"))
            poly = sp.Poly(q[0].subs(alt(VOLTERRA.n[0]), a), x, a)
            assert poly.total_degree() <= 2
            rows.append([poly.coeff_monomial(mono) for mono in monomials])
        assert sp.Matrix(rows).rank() == 4
        for q in found:
            assert varsym_check(L, q).passed


# --- 5 ---------------------------------------------------------------------------

PARTITIONED = Signature(("x",), ("n",), ("u",))
PARTITIONED_GENERATORS = {
    "v1": ("1", "0", "PreservesFull"),
    "v2": ("x", "u", "PreservesFull"),
    "v3": ("0", "2^floor(n/2)*u", "PreservesFull"),
    "v4": ("alt(n)", "0", "PreservesReduced(2)"),
    "v5": ("alt(n)*x", "alt(n)*u", "PreservesReduced(2)"),
    "v6": ("0", "alt(n)*2^floor(n/2)*u", "PreservesFull"),
}


def _partitioned():
    A = parse_expr("u[1|0] - u[0|2]/u[0|0]", PARTITIONED)
    return [A], solve_for_leading([A], DERIV_MAJOR)


@pytest.mark.criterion(5)
def test_c5_partitioned():
    with _timed(10):
        system, solved = _partitioned()
        for name, (xi, phi, structure) in PARTITIONED_GENERATORS.items():
            v = Generator(PARTITIONED, (parse_expr(xi, PARTITIONED),), (parse_expr(phi, PARTITIONED),))
            assert str(structure_check(v, period=(2,))) == structure, name
            assert lsc_check(system, solved, v, period=(2,)).passed, name
        doctored = Generator(PARTITIONED, (parse_expr("alt(n)*x", PARTITIONED),), (0,))
        assert not lsc_check(system, solved, doctored, period=(2,)).passed


# --- 6 ---------------------------------------------------------------------------

NLS = Signature(("t",), ("n",), ("u", "v"), parameters=("h", "gamma"))


@pytest.mark.criterion(6)
def test_c6_nls():
    with _timed(10):
        system = [parse_expr(a, NLS) for a in (
            "u[1|0] + (v[0|1] - 2*v + v[0|-1])/h^2 + (u^2 + v^2)*v",
            "v[1|0] - (u[0|1] - 2*u + u[0|-1])/h^2 - (u^2 + v^2)*u")]
        solved = solve_for_leading(system, DERIV_MAJOR)
        gamma = NLS.param("gamma")
        u, v = NLS.jet("u"), NLS.jet("v")
        v1 = Generator(NLS, (1,), (0, 0))
        v2 = Generator(NLS, (0,), (v, -u))
        combined = Generator(NLS, (1,), (-gamma * v, gamma * u))
        for g in (v1, v2, combined):
            assert lsc_check(system, solved, g).passed
        Q = characteristic_of(combined)
        expected = parse_expr("-gamma*v - u[1|0]", NLS), parse_expr("gamma*u - v[1|0]", NLS)
        assert Q.Q == expected


# --- 7 ---------------------------------------------------------------------------

@pytest.mark.criterion(7)
def test_c7_linear_relation_exact():
    with _timed(10):
        L, E, _ = linear()
        ops = [parse_operator(o, LINEAR) for o in ("D[1|0]", "D[1|0]", "D[0|0] - D[0|-1]")]
        # S^{-1} D_n = id - S^{-1}
        backward = LinearDDOperator.shift_op(0, -1, 1, 1).compose(LinearDDOperator.forward_difference(0, 1, 1))
        assert ops[2] == backward
        report = relation_verify(RelationCertificate(ops, E))
        assert report.passed
        assert report.items[0].test.verdict is Verdict.YES


# --- 8 ---------------------------------------------------------------------------

VOLTERRA_G = Signature(("x",), ("n",), ("v",), arbitrary=("g",))


@pytest.mark.criterion(8)
def test_c8_intermediate_volterra():
    with _timed(10):
        sig = VOLTERRA_G
        L = Lagrangian(parse_expr(VOLTERRA_L, sig), sig)
        solved = solve_for_leading([euler_lagrange(L, "v")])
        Q = Characteristic((sig.jet("g"),), sig)
        C = ConstraintSet([[parse_operator("D[0|1] - D[0|-1]", sig)]])
        lam = [parse_expr("v[1|0] + 1/(v[0|1] - v[0|-1])", sig)]
        assert intermediate_determining(L, Q, C, lam).passed
        ours = constrained_claw(C, lam, [sig.jet("g")])
        known = ConservationLaw([0], [parse_expr(
            "g*(v[1|-1] + 1/(v - v[0|-2])) + g[0|-1]*(v[1|0] + 1/(v[0|1] - v[0|-1]))", sig)])
        assert triviality_check(ours - known, solved) == TRIVIAL


@pytest.mark.criterion(8)
def test_c8_intermediate_linear():
    with _timed(10):
        sig = LINEAR
        L, _, solved = linear()
        g = [sig.jet(name) for name in sig.arbitrary]
        Q = Characteristic(tuple(g), sig)
        C = ConstraintSet([[parse_operator(o, sig) for o in row] for row in (
            ("-D[0|1] + D[0|0]", "0", "D[1|0]"),
            ("-D[1|0]", "D[1|0]", "0"),
            ("-D[0|1] + D[0|0]", "D[0|1] - D[0|0]", "0"))])
        lam = [parse_expr(e, sig) for e in ("-u[0|1] + v + w[1|0]", "-w", "u[0|1]")]
        assert intermediate_determining(L, Q, C, lam).passed
        ours = constrained_claw(C, lam, g)
        known = ConservationLaw(
            [parse_expr("(g1 - g2)*w + g3*(-u[0|1] + v + w[1|0])", sig)],
            [parse_expr("-g1*(v[0|-1] + w[1|-1]) + g2*u", sig)])
        assert triviality_check(ours - known, solved) == TRIVIAL


# --- 9 ---------------------------------------------------------------------------

def _random_operator(rng, sig):
    terms = {}
    for _ in range(rng.randint(1, 3)):
        J = (rng.randint(0, 2),)
        K = (rng.randint(-2, 2),)
        terms[(J, K)] = random_expr(rng, sig, depth=1, rational=False)
    return LinearDDOperator(terms, sig.p, sig.m)


@pytest.mark.criterion(9)
def test_c9_adjoint_rules():
    rng = random.Random(9)
    with _timed(10):
        for _ in range(100):
            A, B = _random_operator(rng, SCALAR), _random_operator(rng, SCALAR)
            assert A.compose(B).adjoint().equals(B.adjoint().compose(A.adjoint())), (A, B)
            assert A.adjoint().adjoint().equals(A), A


@pytest.mark.criterion(9)
def test_c9_derivative_shift_commute():
    rng = random.Random(90)
    with _timed(10):
        for _ in range(100):
            e = random_expr(rng, SCALAR, depth=2)
            K = (rng.randint(-3, 3),)
            assert is_zero(total_derivative(shift(e, K)) - shift(total_derivative(e), K)), e


# --- 10 --------------------------------------------------------------------------

@pytest.mark.criterion(10)
def test_c10_noether_identity():
    rng = random.Random(10)
    with _timed(10):
        for _ in range(20):
            L = Lagrangian(random_expr(rng, SCALAR, depth=2, rational=rng.random() < 0.3), SCALAR)
            Q = Characteristic((random_expr(rng, SCALAR, depth=1),), SCALAR)
            claw = ibp_claw(L, Q)
            identity = prolong_apply(Q, L.expr) - noether_density(L, Q) - divergence_of(claw)
            assert is_zero(identity), (L.expr, Q.Q)
