"""Shared helpers and the per-criterion summary of the acceptance suite."""

import random

import pytest
import sympy as sp

from ddvar import ConservationLaw, Lagrangian, Signature, parse_expr

_RESULTS = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when != "call" and not rep.failed:
        return
    n = mark.args[0]
    _RESULTS[n] = _RESULTS.get(n, True) and rep.passed


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_RESULTS):
        terminalreporter.write_line(f"criterion {n}: {'pass' if _RESULTS[n] else 'FAIL'}")


# --- signatures and fixtures used across test files ---------------------------

SCALAR = Signature(("x",), ("n",), ("u",))
PAIR = Signature(("x",), ("n",), ("u", "v"))


@pytest.fixture
def volterra():
    sig = Signature(("x",), ("n",), ("v",), arbitrary=("g1", "g2"),
                    arbitrary_deps={"g1": ("x",), "g2": ("x",)})
    L = Lagrangian(parse_expr("v[0|-1]*v[1|0] - ln(v[0|2] - v[0|0])", sig), sig)
    return sig, L


# --- random expressions of bounded size ---------------------------------------

def random_jet(rng, sig, name=None, dmax=2, kmax=2):
    name = name or rng.choice(sig.dependent)
    J = tuple(rng.randint(0, dmax) for _ in range(sig.p))
    K = tuple(rng.randint(-kmax, kmax) for _ in range(sig.m))
    return sig.jet(name, J, K)


def random_expr(rng, sig, depth=2, rational=True, dmax=2, kmax=2):
    """Polynomial (optionally rational) expression in jets, x and n."""
    if depth == 0 or rng.random() < 0.25:
        r = rng.random()
        if r < 0.6:
            return random_jet(rng, sig, dmax=dmax, kmax=kmax)
        if r < 0.75:
            return sig.x[0]
        if r < 0.85:
            return sig.n[0]
        return sp.Integer(rng.randint(-3, 3))
    a = random_expr(rng, sig, depth - 1, rational, dmax, kmax)
    b = random_expr(rng, sig, depth - 1, rational, dmax, kmax)
    r = rng.random()
    if r < 0.45:
        return a + b
    if r < 0.9 or not rational:
        return a * b
    return a / (1 + b**2)


def random_claw(rng, sig, depth=2, dmax=1):
    F = [random_expr(rng, sig, depth, dmax=dmax) for _ in range(sig.p)]
    G = [random_expr(rng, sig, depth, dmax=dmax) for _ in range(sig.m)]
    return ConservationLaw(F, G)


@pytest.fixture
def rng():
    return random.Random(20240611)
