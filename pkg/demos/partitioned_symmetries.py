"""
Symmetries of a lattice equation with period-two structure
==========================================================

Some lattice symmetries act differently on even and odd sites.  This script
classifies a few generators by how they treat the lattice and checks the
linearized symmetry condition for each of them.
"""

from ddvar import StructureViolation, lsc_check, structure_check, to_text
from ddvar.cli import load_fixture

###############################################################################
# The fixture ships with the package.  It declares the period and a handful
# of generators.

prob = load_fixture("partitioned")
equations = prob.equations()
solved = prob.solved()
print("equation:", [to_text(e) for e in equations])

###############################################################################
# Each generator gets a structure class and a pass/fail verdict for the
# symmetry condition on solutions.

for name, g in prob.generators.items():
    structure = structure_check(g, prob.period)
    try:
        verdict = lsc_check(equations, solved, g, prob.period).passed
    except StructureViolation:
        verdict = "not applicable"
    print(f"{name}: {structure}  symmetry={verdict}")
