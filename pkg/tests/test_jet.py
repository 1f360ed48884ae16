import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from ddvar import (
    DEFAULT_RANKING, DERIV_MAJOR, SHIFT_MAJOR, Lagrangian, NonTerminating, NotSolvable,
    OverlappingLeaders, Signature, euler_lagrange, forward_difference, is_zero, normalize, parse_expr,
    prolong, ranking_by_name, restrict_to_solutions, shift, solve_for_leading, total_derivative,
)
from ddvar.jet import _d_raw, _d_sympy, is_prolongation

from strategies import SIG, N, X, exprs, jets, shifts

RANKINGS = [DEFAULT_RANKING, DERIV_MAJOR, SHIFT_MAJOR]


def test_shift_moves_n_and_jet_indices():
    u = SIG.jet("u", (1,), (0,))
    e = N * u + X
    assert shift(e, (2,)) == normalize((N + 2) * SIG.jet("u", (1,), (2,)) + X)


def test_total_derivative_chain_rule():
    u, u1 = SIG.jet("u"), SIG.jet("u", (0,), (1,))
    e = X * u**2 + u1
    expected = u**2 + 2 * X * u * SIG.jet("u", (1,), (0,)) + SIG.jet("u", (1,), (1,))
    assert total_derivative(e) == normalize(expected)
    assert total_derivative(N) == 0
    assert total_derivative(sp.log(u)) == normalize(SIG.jet("u", (1,), (0,)) / u)


def test_forward_difference():
    u = SIG.jet("u")
    assert forward_difference(N * u) == normalize((N + 1) * SIG.jet("u", (0,), (1,)) - N * u)
    assert forward_difference(N) == 1


def test_prolong_is_derivatives_then_shifts():
    e = X * SIG.jet("u") * SIG.jet("v", (0,), (-1,))
    assert prolong(e, (2,), (1,)) == shift(total_derivative(total_derivative(e)), (1,))


@settings(max_examples=60, deadline=None)
@given(exprs, shifts)
def test_shift_is_invertible(e, K):
    assert shift(shift(e, K), (-K[0],)) == normalize(e)


@settings(max_examples=60, deadline=None)
@given(exprs, shifts)
def test_derivative_commutes_with_shift(e, K):
    assert is_zero(total_derivative(shift(e, K)) - shift(total_derivative(e), K))


@settings(max_examples=60, deadline=None)
@given(exprs, exprs)
def test_total_derivative_is_a_derivation(a, b):
    assert is_zero(total_derivative(a * b) - a * total_derivative(b) - b * total_derivative(a))


@settings(max_examples=60, deadline=None)
@given(exprs)
def test_ring_derivative_agrees_with_sympy(e):
    assert is_zero(_d_raw(sp.sympify(e), 0) - _d_sympy(sp.sympify(e), 0))


@settings(max_examples=100, deadline=None)
@given(st.sampled_from(RANKINGS), jets, jets)
def test_rankings_are_positive(ranking, a, b):
    assert ranking.less(a, a.bumped(0))
    assert ranking.less(a, a.shifted((1,)))
    if ranking.less(a, b):
        assert ranking.less(a.bumped(0), b.bumped(0))
        assert ranking.less(a.shifted((1,)), b.shifted((1,)))
    if a != b:
        assert ranking.less(a, b) != ranking.less(b, a)


def test_ranking_by_name():
    assert ranking_by_name("shift-major").kind == "shift-major"
    with pytest.raises(ValueError):
        ranking_by_name("lexicographic")


def test_is_prolongation_offsets():
    u = SIG.jet("u", (1,), (0,))
    assert is_prolongation(SIG.jet("u", (3,), (-2,)), u) == ((2,), (-2,))
    assert is_prolongation(SIG.jet("u", (0,), (0,)), u) is None
    assert is_prolongation(SIG.jet("v", (1,), (0,)), u) is None


VOLTERRA = Signature(("x",), ("n",), ("v",))


def _volterra_el():
    L = Lagrangian(parse_expr("v[0|-1]*v[1|0] - ln(v[0|2] - v[0|0])", VOLTERRA), VOLTERRA)
    return euler_lagrange(L, "v")


def test_volterra_leader_and_recurrence():
    solved = solve_for_leading([_volterra_el()])
    eq, = solved.equations
    assert eq.leader == VOLTERRA.jet("v", (1,), (1,))
    # omega contains v[1|-1], a backward shift of the leader
    assert eq.cone == (1,)
    assert eq.admits((3,)) and not eq.admits((-1,))


def test_restriction_is_a_projection():
    E = _volterra_el()
    solved = solve_for_leading([E])
    assert restrict_to_solutions(E, solved) == 0
    e = VOLTERRA.jet("v", (2,), (3,)) * VOLTERRA.jet("v", (1,), (-1,))
    once = restrict_to_solutions(e, solved)
    assert restrict_to_solutions(once, solved) == once
    for s in once.free_symbols:
        for eq in solved.equations:
            off = is_prolongation(s, eq.leader) if hasattr(s, "J") else None
            assert off is None or not eq.admits(off[1])


def test_restriction_of_prolonged_equation_vanishes():
    E = _volterra_el()
    solved = solve_for_leading([E])
    assert restrict_to_solutions(prolong(E, (1,), (2,)), solved) == 0


NLS = Signature(("t",), ("n",), ("u", "v"), parameters=("h",))
NLS_EQS = ["u[1|0] + (v[0|1] - 2*v + v[0|-1])/h^2 + (u^2 + v^2)*v",
           "v[1|0] - (u[0|1] - 2*u + u[0|-1])/h^2 - (u^2 + v^2)*u"]


def test_nls_solved_for_time_derivatives():
    system = [parse_expr(a, NLS) for a in NLS_EQS]
    solved = solve_for_leading(system, DERIV_MAJOR)
    assert solved.leaders == (NLS.jet("u", (1,), (0,)), NLS.jet("v", (1,), (0,)))
    # shift-major rankings pick the forward shifts instead
    default = solve_for_leading(system, SHIFT_MAJOR)
    assert default.leaders == (NLS.jet("v", (0,), (1,)), NLS.jet("u", (0,), (1,)))


def test_solving_errors():
    u = SIG.jet("u")
    with pytest.raises(NotSolvable):
        solve_for_leading([SIG.jet("u", (1,), (0,)) ** 2 - u])
    with pytest.raises(NotSolvable):
        solve_for_leading([X + N])
    with pytest.raises(OverlappingLeaders):
        solve_for_leading([SIG.jet("u", (1,), (0,)) - u, SIG.jet("u", (2,), (1,)) - u])


def test_linear_el_system_has_overlapping_leaders_under_every_ranking():
    sig = Signature(("x",), ("n",), ("u", "v", "w"))
    L = Lagrangian(parse_expr("(u[0|1] - v - w[1|0]/2)*w[1|0] + v*(u[0|1] - u)", sig), sig)
    E = [euler_lagrange(L, a) for a in sig.dependent]
    for ranking in RANKINGS:
        with pytest.raises(OverlappingLeaders):
            solve_for_leading(E, ranking)
    assert len(solve_for_leading(E[:2], SHIFT_MAJOR)) == 2


def test_restriction_step_limit():
    solved = solve_for_leading([_volterra_el()])
    with pytest.raises(NonTerminating):
        restrict_to_solutions(VOLTERRA.jet("v", (1,), (40,)), solved, max_steps=5)
