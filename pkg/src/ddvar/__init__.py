"""Symbolic calculus of variations for differential-difference equations.

Expressions are sympy expressions over jet coordinates ``u[J|K]``; the
modules build on each other in this order:

``expr``         symbols, normalization, evaluation and identity testing
``jet``          shifts, total derivatives, rankings, restriction to solutions
``operators``    linear differential-difference operators and adjoints
``variational``  Euler-Lagrange operators, divergences, conservation laws
``symmetry``     generators, prolongation and symmetry conditions
``noether``      Noether's first and second theorems and the intermediate theorem
``parser``, ``problem``, ``cli``  text syntax, problem files and the command line
"""

from .errors import *  # noqa: F401,F403
from .expr import (
    ContinuousVar, DiscreteVar, JetVar, Parameter, SamplingConfig, Signature, Verdict,
    ZeroTest, alt, current_config, evaluate, is_zero, jets_of, ln, normalize, using_config,
)
from .jet import (
    DEFAULT_RANKING, DERIV_MAJOR, SHIFT_MAJOR, Ranking, SolvedSystem, forward_difference,
    prolong, ranking_by_name, restrict_to_solutions, shift, solve_for_leading, total_derivative,
)
from .operators import ConservationLaw, LinearDDOperator, adjoint_defect, divergence_of
from .report import Check, Report
from .variational import (
    NOT_SHOWN_TRIVIAL, TRIVIAL, Lagrangian, euler_lagrange, euler_lagrange_all,
    euler_lagrange_wrt_arbitrary, in_linear_span, is_divergence, triviality_check, verify_claw,
)
from .symmetry import (
    Characteristic, Generator, Structure, ansatz_solve, characteristic_of, lsc_check,
    prolong_apply, sampled_linear_solve, structure_check, varsym_check,
)
from .noether import (
    ConstraintSet, RelationCertificate, adjoint_characteristic, constrained_claw, gauge_operators,
    ibp_claw, intermediate_determining, multiplier_search, noether2_relations, noether_claw,
    noether_density, relation_verify,
)
from .parser import operator_text, parse_expr, parse_operator, to_text
from .problem import ProblemFile, load_problem, parse_problem

__version__ = "0.1.0"
