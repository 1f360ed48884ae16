"""Command line interface: ``ddvar COMMAND [PROBLEM.ddn] [options]``.

Exit status is 0 when every check passes, 1 when some check fails and 2 on
errors.  When a command runs over every item of a file (no item selected),
items carrying ``expect: fail`` count as passing when they fail.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from importlib import resources

from .errors import DDError, NotLinearHomogeneous, NotVariational
from .expr import SamplingConfig, Verdict, ZeroTest, is_zero, using_config
from .jet import restrict_to_solutions
from .noether import (
    RelationCertificate, constrained_claw, intermediate_determining, noether2_relations,
    noether_claw, relation_verify,
)
from .operators import adjoint_defect
from .parser import operator_text, parse_expr, to_text
from .problem import load_problem, parse_problem
from .report import Report
from .symmetry import ansatz_solve, lsc_check, structure_check, varsym_check
from .variational import (
    TRIVIAL, divergence_of, euler_lagrange, is_divergence, triviality_check, verify_claw,
)

COMMANDS = ("el", "divtest", "adjoint", "lsc", "varsym", "noether1", "noether2",
            "intermediate", "relation", "claw-verify", "trivial", "ansatz", "corpus")


class Outcome:
    """Reports of one command plus free-form result lines."""

    def __init__(self, command, fmt):
        self.command = command
        self.fmt = fmt
        self.lines = []
        self.ok = True

    def info(self, key, value, **fields):
        if self.fmt == "kv":
            extra = "".join(f" {k}={v}" for k, v in fields.items())
            self.lines.append(f"check={self.command}{extra} {key}={value}")
        else:
            label = " ".join(str(v) for v in fields.values())
            self.lines.append(f"{label + ': ' if label else ''}{key} = {value}")

    def record(self, report, expected="pass", bulk=False):
        passed = report.passed
        good = passed == (expected == "pass") if bulk else passed
        self.ok &= good
        self.lines.extend(report.lines(self.fmt))
        if bulk and expected == "fail":
            note = "expected failure" if not passed else "unexpected pass"
            self.lines.append(f"{report.kv_head()} note={note!r}" if self.fmt == "kv" else f"  note: {note}")
        return good


def _flag(report, label, ok, detail=None):
    report.add(label, ZeroTest(Verdict.YES if ok else Verdict.NO), detail)
    return report


def _select(items, name, what):
    if name is None:
        return list(items), True
    if name not in items:
        raise DDError(f"no {what} named {name!r}")
    return [name], False


def _equations_for_triviality(prob):
    if prob.L is not None:
        return [euler_lagrange(prob.L, a) for a in prob.signature.dependent]
    return list(prob.equations())


def _reference_claw(prob, ref):
    kind, name = ref
    if kind == "noether":
        return noether_claw(prob.L, prob.characteristics[name], prob.supplement(name))
    mspec = prob.multipliers[name]
    sig = prob.signature
    return constrained_claw(prob.constraint, mspec.values, [sig.jet(g) for g in sig.arbitrary])


def _claw_lines(out, claw, **fields):
    for i, f in enumerate(claw.F):
        out.info(f"F{i + 1}", to_text(f), **fields)
    for i, g in enumerate(claw.G):
        out.info(f"G{i + 1}", to_text(g), **fields)


def run(command, prob, args):
    """Execute one command on a parsed problem; returns an Outcome."""
    fmt = args.format
    out = Outcome(command, fmt)
    sig = prob.signature
    ranking = args.ranking

    if command == "el":
        if prob.L is None:
            raise DDError("problem has no lagrangian")
        for name in sig.dependent:
            out.info(f"E[{name}]", to_text(euler_lagrange(prob.L, name)))

    elif command == "divtest":
        exprs = [(f"expr{i + 1}", parse_expr(t, sig)) for i, t in enumerate(args.expr or [])]
        if not exprs:
            exprs = [(name, prob.claw(name).density) for name, c in prob.claws.items()]
        for label, e in exprs:
            report = is_divergence(e, sig)
            report.check = f"divtest {label}"
            out.record(report)

    elif command == "adjoint":
        names, _ = _select(prob.operators, args.operator, "operator")
        f = sig.jet(sig.dependent[0])
        g = sig.x[0] * sig.jet(sig.dependent[-1], K=(1,) + (0,) * (sig.m - 1))
        for name in names:
            op = prob.operators[name]
            adj = op.adjoint()
            out.info("adjoint", operator_text(adj), operator=name)
            report = Report(f"adjoint {name}")
            report.add("involution", ZeroTest(Verdict.YES) if adj.adjoint().equals(op) else ZeroTest(Verdict.NO))
            claw = adjoint_defect(op, f, g)
            report.add("defect", is_zero(divergence_of(claw) - claw.density))
            out.record(report)

    elif command == "lsc":
        eqs = prob.equations()
        solved = prob.solved(ranking)
        names, bulk = _select(prob.generators, args.generator, "generator")
        for name in names:
            v = prob.generators[name]
            structure = structure_check(v, prob.period)
            out.info("structure", structure, generator=name)
            report = lsc_check(eqs, solved, v, prob.period)
            report.check = f"lsc {name}"
            out.record(report, prob.generator_expect.get(name, "pass"), bulk)

    elif command == "varsym":
        names, bulk = _select(prob.characteristics, args.characteristic, "characteristic")
        for name in names:
            report = varsym_check(prob.L, prob.characteristics[name])
            report.check = f"varsym {name}"
            out.record(report, prob.characteristic_expect.get(name, "pass"), bulk)

    elif command == "noether1":
        names, bulk = _select(prob.characteristics, args.characteristic, "characteristic")
        solved = prob.solved(ranking) if prob.equations() else None
        for name in names:
            Q = prob.characteristics[name]
            expected = prob.characteristic_expect.get(name, "pass")
            report = Report(f"noether1 {name}")
            if Q.arbitrary_jets:
                if bulk:
                    continue
            try:
                claw = noether_claw(prob.L, Q, prob.supplement(name))
            except NotVariational:
                _flag(report, "variational", False)
                out.record(report, expected, bulk)
                continue
            _claw_lines(out, claw, characteristic=name)
            report.add("divergence", is_zero(divergence_of(claw) - claw.density))
            _flag(report, "decomposed", claw.residual == 0,
                  None if claw.residual == 0 else f"residual {to_text(claw.residual)}")
            if solved is not None:
                report.add("on-solutions", is_zero(restrict_to_solutions(claw.density, solved)))
            out.record(report, expected, bulk)

    elif command == "noether2":
        names, bulk = _select(prob.characteristics, args.characteristic, "characteristic")
        for name in names:
            Q = prob.characteristics[name]
            if bulk and (not _full_gauge(Q) or prob.characteristic_expect.get(name) == "fail"):
                continue
            for r, cert in enumerate(noether2_relations(prob.L, Q)):
                g = sig.arbitrary[r]
                for op, label in zip(cert.operators, cert.labels):
                    out.info("operator", operator_text(op), characteristic=name, g=g, target=label)
                report = relation_verify(cert)
                report.check = f"noether2 {name} {g}"
                out.record(report, prob.characteristic_expect.get(name, "pass"), bulk)

    elif command == "intermediate":
        if prob.constraint is None:
            raise DDError("problem has no constraint block")
        names, bulk = _select(prob.multipliers, args.multiplier, "multiplier")
        for name in names:
            mspec = prob.multipliers[name]
            Q = prob.characteristics[mspec.characteristic]
            report = intermediate_determining(prob.L, Q, prob.constraint, mspec.values)
            report.check = f"intermediate {name}"
            if report.passed:
                claw = _reference_claw(prob, ("constrained", name))
                _claw_lines(out, claw, multiplier=name)
            out.record(report, mspec.expect, bulk)

    elif command == "relation":
        names, bulk = _select(prob.certificates, args.certificate, "certificate")
        for name in names:
            spec = prob.certificates[name]
            targets = [euler_lagrange(prob.L, t[1]) if isinstance(t, tuple) else t for t in spec.targets]
            report = relation_verify(RelationCertificate(list(spec.ops), targets))
            report.check = f"relation {name}"
            out.record(report, spec.expect, bulk)

    elif command == "claw-verify":
        solved = prob.solved(ranking)
        names, bulk = _select(prob.claws, args.claw, "claw")
        for name in names:
            spec = prob.claws[name]
            if spec.density is None and bulk:
                continue
            report = verify_claw(prob.claw(name), solved, _equations_for_triviality(prob))
            report.check = f"claw-verify {name}"
            out.record(report, spec.expect, bulk)

    elif command == "trivial":
        solved = prob.solved(ranking)
        eqs = _equations_for_triviality(prob)
        names, bulk = _select(prob.claws, args.claw, "claw")
        for name in names:
            spec = prob.claws[name]
            expected = spec.trivial or ("yes" if spec.reference else None)
            if bulk and expected is None:
                continue
            claw = prob.claw(name)
            subject = claw - _reference_claw(prob, spec.reference) if spec.reference else claw
            verdict = triviality_check(subject, solved, eqs)
            report = _flag(Report(f"trivial {name}"), "difference" if spec.reference else "claw",
                           verdict == TRIVIAL, verdict)
            out.record(report, "fail" if expected == "no" else "pass", bulk)

    elif command == "ansatz":
        names, bulk = _select(prob.bases, args.basis, "basis")
        for name in names:
            spec = prob.bases[name]
            if spec.mode == "varsym":
                found = ansatz_solve(prob.L, list(spec.elements), sig)
            else:
                found = ansatz_solve((prob.equations(), prob.solved(ranking)), list(spec.elements), sig)
            for Q in found:
                out.info("Q", "; ".join(to_text(c) for c in Q.Q), basis=name)
            report = Report(f"ansatz {name}")
            ok = spec.expect_dim is None or len(found) == spec.expect_dim
            _flag(report, "dimension", ok, f"{len(found)}" + (f" (expected {spec.expect_dim})" if spec.expect_dim is not None else ""))
            out.record(report)
    else:
        raise DDError(f"unknown command {command!r}")
    return out


def _full_gauge(Q):
    sig = Q.signature
    if not Q.arbitrary_jets:
        return False
    indep = set(sig.continuous) | set(sig.discrete)
    if any(set(sig.arbitrary_deps.get(g.base, indep)) != indep for g in Q.arbitrary_jets):
        return False
    try:
        return Q.is_linear_homogeneous()
    except NotLinearHomogeneous:
        return False


# --- corpus ---------------------------------------------------------------------

def corpus_names():
    root = resources.files("ddvar") / "corpus"
    return sorted(p.name[:-4] for p in root.iterdir() if p.name.endswith(".ddn"))


def load_fixture(name):
    text = (resources.files("ddvar") / "corpus" / f"{name}.ddn").read_text(encoding="utf-8")
    return parse_problem(text, name)


def _applicable(prob):
    cmds = []
    if prob.L is not None:
        cmds.append("el")
    if prob.operators:
        cmds.append("adjoint")
    if prob.generators:
        cmds.append("lsc")
    if prob.characteristics and prob.L is not None:
        cmds += ["varsym", "noether1", "noether2"]
    if prob.multipliers:
        cmds.append("intermediate")
    if prob.certificates:
        cmds.append("relation")
    if prob.claws:
        cmds += ["claw-verify", "trivial"]
    if prob.bases:
        cmds.append("ansatz")
    return cmds


def run_fixture(name, args):
    """All applicable commands on one built-in fixture; returns (ok, lines)."""
    with using_config(_config(args)):
        prob = load_fixture(name)
        lines, ok = [], True
        for cmd in _applicable(prob):
            try:
                out = run(cmd, prob, args)
            except DDError as err:
                lines.append(f"fixture={name} command={cmd} error={err!r}")
                ok = False
                continue
            ok &= out.ok
            status = "pass" if out.ok else "fail"
            lines.append(f"fixture={name} command={cmd} verdict={status}" if args.format == "kv"
                         else f"[{name}] {cmd}: {status}")
            if args.verbose:
                lines.extend("    " + l for l in out.lines)
        return ok, lines


def _config(args):
    return SamplingConfig(samples=args.samples, precision=args.precision,
                          tolerance=args.tolerance, seed=args.seed)


def build_parser():
    ap = argparse.ArgumentParser(prog="ddvar", description="Differential-difference variational calculus checks.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("problem", nargs="?", help="problem file (.ddn); built-in fixture names also work")
    ap.add_argument("expr", nargs="*", help="expressions for divtest")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--samples", type=int, default=8)
    ap.add_argument("--precision", type=int, default=128)
    ap.add_argument("--tolerance", type=float, default=1e-25)
    ap.add_argument("--ranking", choices=("default", "deriv-major", "shift-major"))
    ap.add_argument("--parallel", action="store_true", help="run corpus fixtures concurrently")
    ap.add_argument("--format", choices=("text", "kv"), default="text")
    ap.add_argument("-v", "--verbose", action="store_true", help="corpus: show every check")
    for item in ("generator", "characteristic", "claw", "certificate", "basis", "multiplier", "operator"):
        ap.add_argument(f"--{item}")
    return ap


def _load(path):
    """A problem file path, or the name of a built-in fixture (with or without ``.ddn``)."""
    if os.path.exists(path):
        return load_problem(path)
    name = path[:-4] if path.endswith(".ddn") else path
    if name in corpus_names():
        return load_fixture(name)
    raise DDError(f"no problem file or built-in fixture named {path!r}")


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "corpus":
            names = corpus_names()
            if args.parallel:
                with ProcessPoolExecutor() as pool:
                    results = list(pool.map(run_fixture, names, [args] * len(names)))
            else:
                results = [run_fixture(n, args) for n in names]
            ok = True
            for good, lines in results:
                ok &= good
                print("\n".join(lines))
            return 0 if ok else 1
        if args.problem is None:
            raise DDError(f"{args.command} needs a problem file")
        with using_config(_config(args)):
            prob = _load(args.problem)
            out = run(args.command, prob, args)
        print("\n".join(out.lines))
        return 0 if out.ok else 1
    except (DDError, OSError, KeyError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
