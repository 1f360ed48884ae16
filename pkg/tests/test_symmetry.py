from fractions import Fraction

import pytest
import sympy as sp
from hypothesis import given, settings

from ddvar import (
    DERIV_MAJOR, Characteristic, Generator, Lagrangian, Signature, StructureViolation, alt,
    ansatz_solve, characteristic_of, is_zero, lsc_check, normalize, parse_expr, prolong_apply,
    sampled_linear_solve, shift, solve_for_leading, structure_check, total_derivative,
    varsym_check,
)

from strategies import SIG, exprs, polys, shifts

SCALAR = Signature(("x",), ("n",), ("u",))


def test_characteristic_of_point_generator():
    x = SCALAR.x[0]
    v = Generator(SCALAR, (x,), (SCALAR.jet("u"),))
    Q = characteristic_of(v)
    assert Q.Q == (normalize(SCALAR.jet("u") - x * SCALAR.jet("u", (1,), (0,))),)
    assert Q.xi == (x,) and Q.phi == (SCALAR.jet("u"),)


def test_point_generator_validation():
    with pytest.raises(ValueError):
        Generator(SCALAR, (0,), (SCALAR.jet("u", (0,), (1,)),))
    with pytest.raises(ValueError):
        Generator(SCALAR, (0, 0), (0,))
    with pytest.raises(ValueError):
        Generator(SCALAR, mode="evolutionary")
    with pytest.raises(ValueError):
        Characteristic((1, 2), SCALAR)


def test_linear_homogeneity():
    sig = Signature(("x",), ("n",), ("u", "v"), arbitrary=("f", "g"))
    f, g = sig.jet("f"), sig.jet("g")
    assert Characteristic((f + sig.jet("g", (1,), (0,)), sig.jet("u") * g), sig).is_linear_homogeneous()
    assert not Characteristic((f + 1, g), sig).is_linear_homogeneous()
    assert not Characteristic((f * g, g), sig).is_linear_homogeneous()
    assert not Characteristic((sig.jet("u"), 0), sig).is_linear_homogeneous()


@settings(max_examples=40, deadline=None)
@given(polys, polys, exprs)
def test_evolutionary_prolongation_commutes_with_total_derivative(q1, q2, e):
    Q = Characteristic((q1, q2), SIG)
    assert is_zero(prolong_apply(Q, total_derivative(e)) - total_derivative(prolong_apply(Q, e)))


@settings(max_examples=40, deadline=None)
@given(polys, polys, exprs, shifts)
def test_evolutionary_prolongation_commutes_with_shifts(q1, q2, e, K):
    Q = Characteristic((q1, q2), SIG)
    assert is_zero(prolong_apply(Q, shift(e, K)) - shift(prolong_apply(Q, e), K))


@settings(max_examples=30, deadline=None)
@given(polys, polys)
def test_point_prolongation_splits_into_evolutionary_and_total_parts(xi, e):
    u = SCALAR.jet("u")
    xi = xi.xreplace({s: u for s in xi.free_symbols if hasattr(s, "J")})
    v = Generator(SCALAR, (xi,), (SCALAR.x[0] * u,))
    e = e.xreplace({s: SCALAR.jet("u", s.J, s.K) for s in e.free_symbols if hasattr(s, "J")})
    expected = prolong_apply(characteristic_of(v), e) + xi * total_derivative(e)
    assert is_zero(prolong_apply(v, e) - expected)


def test_structure_classification():
    n = SCALAR.n[0]
    x = SCALAR.x[0]
    u = SCALAR.jet("u")
    assert str(structure_check(Generator(SCALAR, (x,), (u,)))) == "PreservesFull"
    assert str(structure_check(Generator(SCALAR, (alt(n),), (0,)), (2,))) == "PreservesReduced(2)"
    # 2^floor(n/2) in xi has period neither 1 nor 2
    bad = structure_check(Generator(SCALAR, (2 ** sp.floor(n / 2),), (0,)), (2,))
    assert not bad and "periodic" in bad.reason
    assert not structure_check(Generator(SCALAR, (alt(n),), (0,)))
    assert not structure_check(Generator(SCALAR, (u,), (0,)))
    assert structure_check(Characteristic((u,), SCALAR)).kind == "full"


def test_lsc_refuses_structure_violations():
    A = parse_expr("u[1|0] - u[0|2]/u", SCALAR)
    solved = solve_for_leading([A], DERIV_MAJOR)
    with pytest.raises(StructureViolation):
        lsc_check([A], solved, Generator(SCALAR, (alt(SCALAR.n[0]),), (0,)))


def test_lsc_for_a_linear_equation():
    # u' = u_1 - u: scaling and translations are symmetries, u -> u + x is not
    A = parse_expr("u[1|0] - u[0|1] + u", SCALAR)
    solved = solve_for_leading([A], DERIV_MAJOR)
    assert lsc_check([A], solved, Generator(SCALAR, (0,), (SCALAR.jet("u"),))).passed
    assert lsc_check([A], solved, Generator(SCALAR, (1,), (0,))).passed
    report = lsc_check([A], solved, Generator(SCALAR, (0,), (SCALAR.x[0],)))
    assert not report and report.items[0].detail is not None


VOLTERRA = Signature(("x",), ("n",), ("v",))


def test_volterra_variational_symmetries():
    L = Lagrangian(parse_expr("v[0|-1]*v[1|0] - ln(v[0|2] - v[0|0])", VOLTERRA), VOLTERRA)
    assert varsym_check(L, Characteristic((1,), VOLTERRA))
    assert varsym_check(L, Characteristic((alt(VOLTERRA.n[0]),), VOLTERRA))
    assert not varsym_check(L, Characteristic((VOLTERRA.jet("v"),), VOLTERRA))
    # x-translation: Q = -v'
    assert varsym_check(L, characteristic_of(Generator(VOLTERRA, (1,), (0,))))


def test_sampled_linear_solve():
    x, u = SCALAR.x[0], SCALAR.jet("u")
    particular, null = sampled_linear_solve([[x], [2 * x], [u]], [x])
    assert particular == [Fraction(-1), Fraction(0), Fraction(0)]
    assert null == [[Fraction(-2), Fraction(1), Fraction(0)]]
    inconsistent, _ = sampled_linear_solve([[x]], [u])
    assert inconsistent is None


def test_ansatz_for_nls_point_symmetries():
    sig = Signature(("t",), ("n",), ("u", "v"), parameters=("h",))
    system = [parse_expr(a, sig) for a in (
        "u[1|0] + (v[0|1] - 2*v + v[0|-1])/h^2 + (u^2 + v^2)*v",
        "v[1|0] - (u[0|1] - 2*u + u[0|-1])/h^2 - (u^2 + v^2)*u")]
    solved = solve_for_leading(system, DERIV_MAJOR)
    u, v = sig.jet("u"), sig.jet("v")
    basis = [(-sig.jet("u", (1,), (0,)), -sig.jet("v", (1,), (0,))), (v, -u), (u, v)]
    found = ansatz_solve((system, solved), basis, signature=sig)
    assert len(found) == 2
    assert all(lsc_check(system, solved, Q) for Q in found)
    # scaling (u, v) is not in the span
    for Q in found:
        assert not is_zero(Q[0] - u)
    assert ansatz_solve((system, solved), [], signature=sig) == []
    with pytest.raises(ValueError):
        ansatz_solve((system, solved), basis)
