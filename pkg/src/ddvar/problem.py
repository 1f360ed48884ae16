"""Problem files (``.ddn``): plain text descriptions of a variational problem.

A file is a sequence of blocks.  A block starts at column 0 with
``keyword [name]:`` (optionally followed by an inline value) and continues
with indented lines.  ``#`` starts a comment.  Vector values (one entry per
continuous variable, dependent variable, constraint column ...) are
separated by ``;``.

Keywords: ``vars period ranking lagrangian system generator characteristic
claw constraint multiplier certificate basis operator``.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass, field

import sympy as sp

from .errors import ParseError
from .expr import Signature
from .jet import ranking_by_name, solve_for_leading
from .operators import ConservationLaw
from .parser import operator_text, parse_expr, parse_operator, to_text
from .symmetry import Characteristic, Generator
from .noether import ConstraintSet
from .variational import Lagrangian, euler_lagrange

__all__ = ["ProblemFile", "ClawSpec", "CertificateSpec", "BasisSpec", "MultiplierSpec", "parse_problem", "load_problem"]

_HEADER = re.compile(r"^([a-z]+)(?:\s+([A-Za-z_][A-Za-z_0-9]*))?\s*:(.*)$")
_ENTRY = re.compile(r"^\s+([A-Za-z][A-Za-z0-9_-]*)\s*:(.*)$")
_TARGET = re.compile(r"^E\(\s*([A-Za-z_][A-Za-z_0-9]*)\s*\)$")
_DEPS = re.compile(r"^([A-Za-z_][A-Za-z_0-9]*)\s*(?:\(([^)]*)\))?$")


@dataclass(frozen=True)
class ClawSpec:
    F: tuple
    G: tuple
    density: object = None  # expression, ("noether", name) or None
    reference: tuple | None = None  # ("noether" | "constrained", name)
    expect: str = "pass"
    trivial: str | None = None  # expected triviality verdict: "yes" or "no"


@dataclass(frozen=True)
class CertificateSpec:
    ops: tuple
    targets: tuple  # each an expression or ("E", name)
    expect: str = "pass"


@dataclass(frozen=True)
class BasisSpec:
    mode: str
    elements: tuple
    expect_dim: int | None = None


@dataclass(frozen=True)
class MultiplierSpec:
    characteristic: str
    values: tuple
    expect: str = "pass"


@dataclass
class ProblemFile:
    signature: Signature
    name: str = ""
    period: tuple | None = None
    ranking: str = "default"
    lagrangian: sp.Expr | None = None
    system: tuple = ()
    system_el: tuple | None = None  # dependent names whose E-L expressions form the system
    generators: dict = field(default_factory=dict)
    generator_expect: dict = field(default_factory=dict)
    characteristics: dict = field(default_factory=dict)
    characteristic_expect: dict = field(default_factory=dict)
    supplements: dict = field(default_factory=dict)  # name -> (F, G)
    claws: dict = field(default_factory=dict)
    constraint: ConstraintSet | None = None
    multipliers: dict = field(default_factory=dict)
    certificates: dict = field(default_factory=dict)
    bases: dict = field(default_factory=dict)
    operators: dict = field(default_factory=dict)

    # derived module inputs
    @property
    def L(self):
        return None if self.lagrangian is None else Lagrangian(self.lagrangian, self.signature)

    def equations(self):
        if self.system_el is not None:
            return tuple(euler_lagrange(self.L, name) for name in self.system_el)
        return self.system

    def solved(self, ranking=None):
        eqs = self.equations()
        if not eqs:
            return None
        rk = ranking_by_name(ranking or self.ranking, self.signature.dependent)
        return solve_for_leading(eqs, rk)

    def claw(self, name):
        spec = self.claws[name]
        if spec.density is None:
            density = None
        elif isinstance(spec.density, tuple):
            from .noether import noether_density
            density = noether_density(self.L, self.characteristics[spec.density[1]])
        else:
            density = spec.density
        return ConservationLaw(spec.F, spec.G, density)

    def supplement(self, name):
        if name not in self.supplements:
            return None
        F, G = self.supplements[name]
        return ConservationLaw(F, G)

    # printing
    def to_text(self):
        sig = self.signature
        out = []
        if self.name:
            out.append(f"# {self.name}")
        out.append("vars:")
        out.append(f"  continuous: {', '.join(sig.continuous)}")
        out.append(f"  discrete: {', '.join(sig.discrete)}")
        out.append(f"  dependent: {', '.join(sig.dependent)}")
        if sig.arbitrary:
            items = []
            for g in sig.arbitrary:
                deps = sig.arbitrary_deps.get(g)
                items.append(g if deps is None else f"{g}({', '.join(deps)})")
            out.append(f"  arbitrary: {', '.join(items)}")
        if sig.parameters:
            out.append(f"  parameters: {', '.join(sig.parameters)}")
        if self.period is not None:
            out.append(f"period: {', '.join(map(str, self.period))}")
        out.append(f"ranking: {self.ranking}")
        if self.lagrangian is not None:
            out.append(f"lagrangian: {to_text(self.lagrangian)}")
        if self.system_el is not None:
            out.append(f"system: el {' '.join(self.system_el)}")
        elif self.system:
            out.append("system:")
            out.extend(f"  {to_text(e)}" for e in self.system)
        for name, g in self.generators.items():
            out.append(f"generator {name}:")
            if g.mode == "evolutionary":
                out.append(f"  Q: {_vec(g.characteristic.Q)}")
            else:
                out.append(f"  xi: {_vec(g.xi)}")
                out.append(f"  phi: {_vec(g.phi)}")
            if self.generator_expect.get(name, "pass") != "pass":
                out.append(f"  expect: {self.generator_expect[name]}")
        for name, Q in self.characteristics.items():
            out.append(f"characteristic {name}:")
            out.append(f"  Q: {_vec(Q.Q)}")
            if name in self.supplements:
                F, G = self.supplements[name]
                out.append(f"  PF: {_vec(F)}")
                out.append(f"  PG: {_vec(G)}")
            if self.characteristic_expect.get(name, "pass") != "pass":
                out.append(f"  expect: {self.characteristic_expect[name]}")
        for name, c in self.claws.items():
            out.append(f"claw {name}:")
            out.append(f"  F: {_vec(c.F)}")
            out.append(f"  G: {_vec(c.G)}")
            if isinstance(c.density, tuple):
                out.append(f"  density: noether {c.density[1]}")
            elif c.density is not None:
                out.append(f"  density: {to_text(c.density)}")
            if c.reference is not None:
                out.append(f"  reference: {c.reference[0]} {c.reference[1]}")
            if c.expect != "pass":
                out.append(f"  expect: {c.expect}")
            if c.trivial is not None:
                out.append(f"  trivial: {c.trivial}")
        if self.constraint is not None:
            out.append("constraint:")
            out.append(f"  complete: {'yes' if self.constraint.complete else 'no'}")
            for row in self.constraint.ops:
                out.append(f"  row: {'; '.join(operator_text(op) for op in row)}")
        for name, mspec in self.multipliers.items():
            out.append(f"multiplier {name}:")
            out.append(f"  characteristic: {mspec.characteristic}")
            out.append(f"  lambda: {_vec(mspec.values)}")
            if mspec.expect != "pass":
                out.append(f"  expect: {mspec.expect}")
        for name, cert in self.certificates.items():
            out.append(f"certificate {name}:")
            out.append(f"  ops: {'; '.join(operator_text(op) for op in cert.ops)}")
            targets = [f"E({t[1]})" if isinstance(t, tuple) else to_text(t) for t in cert.targets]
            out.append(f"  targets: {'; '.join(targets)}")
            if cert.expect != "pass":
                out.append(f"  expect: {cert.expect}")
        for name, b in self.bases.items():
            out.append(f"basis {name}:")
            out.append(f"  mode: {b.mode}")
            for el in b.elements:
                out.append(f"  element: {_vec(el)}")
            if b.expect_dim is not None:
                out.append(f"  expect-dim: {b.expect_dim}")
        for name, op in self.operators.items():
            out.append(f"operator {name}: {operator_text(op)}")
        return "\n".join(out) + "\n"

    def key(self):
        """Structure compared by the parse/print round trip."""
        sig = self.signature
        return (sig, tuple(sorted(sig.arbitrary_deps.items())), self.period, self.ranking,
                self.lagrangian, self.system, self.system_el, self.generators,
                self.generator_expect, self.characteristics, self.characteristic_expect,
                self.supplements, self.claws, self.constraint, self.multipliers,
                self.certificates, self.bases, self.operators)

    def __eq__(self, other):
        return isinstance(other, ProblemFile) and self.key() == other.key()


def _vec(values):
    return "; ".join(to_text(v) for v in values)


# --- reading ---------------------------------------------------------------

def _strip(line):
    return line.split("#", 1)[0].rstrip()


def _names(text):
    return [t.strip() for t in text.split(",") if t.strip()]


class _Reader:
    def __init__(self, text):
        self.blocks = []
        current = None
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = _strip(raw)
            if not line.strip():
                continue
            if not line[0].isspace():
                m = _HEADER.match(line)
                if m is None:
                    raise ParseError(f"expected a block header, found {line.strip()!r}", lineno, 1)
                inline = m.group(3)
                current = {"kw": m.group(1), "name": m.group(2), "line": lineno,
                           "inline": (inline.strip(), lineno, m.start(3) + 1 + len(inline) - len(inline.lstrip())),
                           "body": []}
                self.blocks.append(current)
            else:
                if current is None:
                    raise ParseError("indented line outside any block", lineno, 1)
                current["body"].append((line, lineno))


def _entries(block):
    """Indented ``key: value`` lines as a list of (key, value, line, column)."""
    out = []
    for line, lineno in block["body"]:
        m = _ENTRY.match(line)
        if m is None:
            raise ParseError("expected 'key: value'", lineno, len(line) - len(line.lstrip()) + 1)
        value = m.group(2)
        col = m.start(2) + 1 + len(value) - len(value.lstrip())
        out.append((m.group(1), value.strip(), lineno, col))
    return out


def _split(value, line, col):
    """Split ``a; b; c`` keeping the column of every piece."""
    parts = []
    offset = 0
    for piece in value.split(";"):
        lead = len(piece) - len(piece.lstrip())
        parts.append((piece.strip(), line, col + offset + lead))
        offset += len(piece) + 1
    return parts


def parse_problem(text, name=""):
    reader = _Reader(text)
    blocks = reader.blocks
    if not blocks or blocks[0]["kw"] != "vars":
        raise ParseError("a problem file must start with a 'vars:' block", blocks[0]["line"] if blocks else 1, 1)
    sig = _signature(blocks[0])
    prob = ProblemFile(sig, name=name)

    def expr(value, line, col):
        return parse_expr(value, sig, line, col)

    def vector(value, line, col, size=None, what="entries"):
        vals = [expr(*part) for part in _split(value, line, col)]
        if size is not None and len(vals) != size:
            raise ParseError(f"expected {size} {what}, got {len(vals)}", line, col)
        return tuple(vals)

    def expect_of(entries, block):
        vals = [v for k, v, _, _ in entries if k == "expect"]
        verdict = vals[0] if vals else "pass"
        if verdict not in ("pass", "fail"):
            raise ParseError(f"expect must be pass or fail, got {verdict!r}", block["line"], 1)
        return verdict

    for block in blocks[1:]:
        kw, bname = block["kw"], block["name"]
        inline, iline, icol = block["inline"]
        if kw == "period":
            prob.period = tuple(int(t) for t in _names(inline))
            if len(prob.period) != sig.m:
                raise ParseError(f"period needs {sig.m} entries", iline, icol)
        elif kw == "ranking":
            if inline not in ("default", "deriv-major", "shift-major"):
                raise ParseError(f"unknown ranking {inline!r}", iline, icol)
            prob.ranking = inline
        elif kw == "lagrangian":
            lines = ([(inline, iline, icol)] if inline else []) + [
                (l.strip(), n, len(l) - len(l.lstrip()) + 1) for l, n in block["body"]]
            if len(lines) != 1:
                raise ParseError("lagrangian needs exactly one expression", block["line"], 1)
            prob.lagrangian = Lagrangian(expr(*lines[0]), sig).expr
        elif kw == "system":
            if inline.startswith("el"):
                names = inline[2:].split() or list(sig.dependent)
                for n_ in names:
                    if n_ not in sig.dependent:
                        raise ParseError(f"unknown dependent variable {n_!r}", iline, icol)
                prob.system_el = tuple(names)
            else:
                lines = ([(inline, iline, icol)] if inline else []) + [
                    (l.strip(), n, len(l) - len(l.lstrip()) + 1) for l, n in block["body"]]
                prob.system = tuple(expr(*l) for l in lines)
        elif kw == "generator":
            entries = _entries(block)
            d = {k: (v, l, c) for k, v, l, c in entries}
            if "Q" in d:
                Q = Characteristic(vector(*d["Q"], sig.q, "components"), sig)
                g = Generator(sig, mode="evolutionary", characteristic=Q, name=bname)
            else:
                xi = vector(*d["xi"], sig.p, "xi components") if "xi" in d else None
                phi = vector(*d["phi"], sig.q, "phi components") if "phi" in d else None
                g = Generator(sig, xi or (), phi or (), period=prob.period, name=bname)
            prob.generators[bname] = g
            prob.generator_expect[bname] = expect_of(entries, block)
        elif kw == "characteristic":
            entries = _entries(block)
            d = {k: (v, l, c) for k, v, l, c in entries}
            prob.characteristics[bname] = Characteristic(vector(*d["Q"], sig.q, "components"), sig)
            if "PF" in d or "PG" in d:
                F = vector(*d["PF"], sig.p) if "PF" in d else (sp.S.Zero,) * sig.p
                G = vector(*d["PG"], sig.m) if "PG" in d else (sp.S.Zero,) * sig.m
                prob.supplements[bname] = (F, G)
            prob.characteristic_expect[bname] = expect_of(entries, block)
        elif kw == "claw":
            entries = _entries(block)
            d = {k: (v, l, c) for k, v, l, c in entries}
            F = vector(*d["F"], sig.p) if "F" in d else (sp.S.Zero,) * sig.p
            G = vector(*d["G"], sig.m) if "G" in d else (sp.S.Zero,) * sig.m
            density = None
            if "density" in d:
                v, l, c = d["density"]
                density = ("noether", v.split()[1]) if v.startswith("noether ") else expr(v, l, c)
            reference = None
            if "reference" in d:
                parts = d["reference"][0].split()
                if len(parts) != 2 or parts[0] not in ("noether", "constrained"):
                    raise ParseError("reference must be 'noether NAME' or 'constrained NAME'",
                                     d["reference"][1], d["reference"][2])
                reference = tuple(parts)
            trivial = d["trivial"][0] if "trivial" in d else None
            if trivial not in (None, "yes", "no"):
                raise ParseError("trivial must be yes or no", d["trivial"][1], d["trivial"][2])
            prob.claws[bname] = ClawSpec(F, G, density, reference, expect_of(entries, block), trivial)
        elif kw == "constraint":
            complete = True
            rows = []
            for k, v, l, c in _entries(block):
                if k == "complete":
                    complete = v.lower() in ("yes", "true")
                elif k == "row":
                    rows.append([parse_operator(p_, sig, pl, pc) for p_, pl, pc in _split(v, l, c)])
                else:
                    raise ParseError(f"unknown constraint entry {k!r}", l, 1)
            if len({len(r) for r in rows}) > 1:
                raise ParseError("constraint rows differ in length", block["line"], 1)
            prob.constraint = ConstraintSet(rows, complete)
        elif kw == "multiplier":
            entries = _entries(block)
            d = {k: (v, l, c) for k, v, l, c in entries}
            prob.multipliers[bname] = MultiplierSpec(d["characteristic"][0], vector(*d["lambda"]),
                                                     expect_of(entries, block))
        elif kw == "certificate":
            entries = _entries(block)
            d = {k: (v, l, c) for k, v, l, c in entries}
            ops = tuple(parse_operator(p_, sig, l, c) for p_, l, c in _split(*d["ops"]))
            targets = []
            for p_, l, c in _split(*d["targets"]):
                m = _TARGET.match(p_)
                targets.append(("E", m.group(1)) if m else expr(p_, l, c))
            if len(targets) != len(ops):
                raise ParseError("certificate needs one target per operator", d["targets"][1], d["targets"][2])
            prob.certificates[bname] = CertificateSpec(ops, tuple(targets), expect_of(entries, block))
        elif kw == "basis":
            mode, elements, dim = "varsym", [], None
            for k, v, l, c in _entries(block):
                if k == "mode":
                    if v not in ("varsym", "lsc"):
                        raise ParseError(f"basis mode must be varsym or lsc, got {v!r}", l, c)
                    mode = v
                elif k == "element":
                    elements.append(vector(v, l, c, sig.q, "components"))
                elif k == "expect-dim":
                    dim = int(v)
                else:
                    raise ParseError(f"unknown basis entry {k!r}", l, 1)
            prob.bases[bname] = BasisSpec(mode, tuple(elements), dim)
        elif kw == "operator":
            prob.operators[bname] = parse_operator(inline, sig, iline, icol)
        else:
            raise ParseError(f"unknown block keyword {kw!r}", block["line"], 1)
    return prob


def _signature(block):
    fields = {}
    for k, v, l, c in _entries(block):
        fields[k] = (v, l, c)
    for needed in ("continuous", "discrete", "dependent"):
        if needed not in fields:
            raise ParseError(f"vars block lacks {needed!r}", block["line"], 1)
    arbitrary, deps = [], {}
    if "arbitrary" in fields:
        v, l, c = fields["arbitrary"]
        for item in re.split(r",(?![^(]*\))", v):
            m = _DEPS.match(item.strip())
            if m is None:
                raise ParseError(f"bad arbitrary-function declaration {item.strip()!r}", l, c)
            arbitrary.append(m.group(1))
            if m.group(2) is not None:
                deps[m.group(1)] = tuple(_names(m.group(2)))
    try:
        return Signature(
            tuple(_names(fields["continuous"][0])), tuple(_names(fields["discrete"][0])),
            tuple(_names(fields["dependent"][0])), tuple(arbitrary),
            tuple(_names(fields["parameters"][0])) if "parameters" in fields else (), deps)
    except ValueError as err:
        raise ParseError(str(err), block["line"], 1) from None


def load_problem(path):
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return parse_problem(text, os.path.splitext(os.path.basename(str(path)))[0])
