"""Text syntax for expressions and operators, and the printer that inverts it.

Grammar (standard precedence, ``^`` right-associative and binding tighter
than unary minus)::

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := ("-" | "+") unary | power
    power  := atom ("^" unary)?
    atom   := NUMBER | NAME | NAME "[" ints "|" ints "]" | NAME "(" expr ("," expr)* ")"
            | "(" expr ")"

``v[J|K]`` is a jet coordinate, a bare dependent name means ``v[0..|0..]``.
In operator text, ``D[J|K]`` stands for the word D_J S_K and every term must
be written coefficient-left (``c*D[J|K]``); a term without a word multiplies
the identity.
"""

from __future__ import annotations

import re

import sympy as sp
from sympy.printing.precedence import PRECEDENCE
from sympy.printing.str import StrPrinter

from .errors import ArityError, ParseError, UndeclaredSymbol
from .expr import alt, normalize
from .operators import LinearDDOperator

__all__ = ["parse_expr", "parse_operator", "to_text", "operator_text"]

_TOKEN = re.compile(r"\s*(?:(\d+(?:\.\d+)?)|([A-Za-z_][A-Za-z_0-9]*)|(\S))")

_FUNCTIONS = {
    "ln": (1, sp.log), "exp": (1, sp.exp), "sin": (1, sp.sin), "cos": (1, sp.cos),
    "floor": (1, sp.floor), "alt": (1, alt), "pow": (2, sp.Pow),
}


class _Marker(sp.Symbol):
    """Placeholder for an operator word while operator text is parsed."""

    def __new__(cls, J, K):
        obj = sp.Symbol.__xnew__(cls, f"__D{J}{K}")
        obj.J, obj.K = J, K
        return obj

    def _hashable_content(self):
        return super()._hashable_content() + (self.J, self.K)


class _Parser:
    def __init__(self, text, signature, line, column, operators):
        self.text = text
        self.sig = signature
        self.line = line
        self.column = column
        self.operators = operators
        self.tokens = []
        pos = 0
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if m is None or m.end() == pos:
                break
            if m.group(0).strip():
                start = m.start(m.lastindex)
                self.tokens.append((m.group(m.lastindex), m.lastindex, start))
            pos = m.end()
        self.i = 0

    # helpers
    def error(self, message, pos=None, cls=ParseError):
        if pos is None:
            pos = self.tokens[self.i][2] if self.i < len(self.tokens) else len(self.text)
        return cls(message, self.line, self.column + pos)

    def peek(self):
        return self.tokens[self.i][0] if self.i < len(self.tokens) else None

    def take(self, expected=None):
        if self.i >= len(self.tokens):
            raise self.error(f"expected {expected!r}, found end of input" if expected else "unexpected end of input")
        tok = self.tokens[self.i]
        if expected is not None and tok[0] != expected:
            raise self.error(f"expected {expected!r}, found {tok[0]!r}")
        self.i += 1
        return tok

    def parse(self):
        if not self.tokens:
            raise self.error("empty expression", 0)
        e = self.expr()
        if self.i != len(self.tokens):
            raise self.error(f"unexpected {self.peek()!r}")
        return e

    # grammar
    def expr(self):
        e = self.term()
        while self.peek() in ("+", "-"):
            op = self.take()[0]
            rhs = self.term()
            e = e + rhs if op == "+" else e - rhs
        return e

    def term(self):
        e = self.unary()
        while self.peek() in ("*", "/"):
            op = self.take()[0]
            rhs = self.unary()
            if op == "*":
                e = e * rhs
            else:
                if rhs == 0:
                    raise self.error("division by zero")
                e = e / rhs
        return e

    def unary(self):
        if self.peek() == "-":
            self.take()
            return -self.unary()
        if self.peek() == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek() == "^":
            self.take()
            return sp.Pow(base, self.unary())
        return base

    def ints(self, closer):
        out = []
        while True:
            sign = 1
            if self.peek() == "-":
                self.take()
                sign = -1
            tok, kind, _ = self.take()
            if kind != 1 or "." in tok:
                raise self.error(f"expected an integer index, found {tok!r}", self.tokens[self.i - 1][2])
            out.append(sign * int(tok))
            if self.peek() == ",":
                self.take()
                continue
            if self.peek() == closer:
                return tuple(out)
            raise self.error(f"expected ',' or {closer!r}")

    def atom(self):
        if self.i >= len(self.tokens):
            raise self.error("unexpected end of input")
        tok, kind, pos = self.take()
        if kind == 1:
            return sp.Rational(tok) if "." in tok else sp.Integer(int(tok))
        if tok == "(":
            e = self.expr()
            self.take(")")
            return e
        if kind != 2:
            raise self.error(f"unexpected {tok!r}", pos)
        if self.peek() == "[":
            self.take()
            J = self.ints("|")
            self.take("|")
            K = self.ints("]")
            self.take("]")
            return self.jet(tok, J, K, pos)
        if self.peek() == "(" and tok in _FUNCTIONS:
            self.take()
            args = [self.expr()]
            while self.peek() == ",":
                self.take()
                args.append(self.expr())
            self.take(")")
            arity, fn = _FUNCTIONS[tok]
            if len(args) != arity:
                raise self.error(f"{tok} takes {arity} argument(s), got {len(args)}", pos, ArityError)
            return fn(*args)
        try:
            return self.sig.symbol(tok)
        except UndeclaredSymbol:
            raise UndeclaredSymbol(f"{tok} (line {self.line}, column {self.column + pos})") from None

    def jet(self, name, J, K, pos):
        sig = self.sig
        if len(J) != sig.p or len(K) != sig.m:
            raise self.error(f"{name}[...] needs {sig.p} derivative and {sig.m} shift indices",
                             pos, ArityError)
        if any(j < 0 for j in J):
            raise self.error("negative derivative index", pos)
        if name == "D" and self.operators:
            return _Marker(J, K)
        try:
            return sig.jet(name, J, K)
        except UndeclaredSymbol:
            raise UndeclaredSymbol(f"{name} (line {self.line}, column {self.column + pos})") from None


def parse_expr(text, signature, line=1, column=1):
    """Parse ``text`` into a normalized expression over ``signature``."""
    return normalize(_Parser(text, signature, line, column, False).parse())


def parse_operator(text, signature, line=1, column=1):
    """Parse coefficient-left operator text ``c1*D[J|K] + ... + c0``."""
    e = sp.expand(_Parser(text, signature, line, column, True).parse())
    terms = {}
    for t in sp.Add.make_args(e):
        markers = [f for f in t.free_symbols if isinstance(f, _Marker)]
        if len(markers) > 1 or (markers and sp.degree(t, markers[0]) != 1):
            raise ParseError("operator terms must contain exactly one word D[J|K]", line, column)
        if markers:
            mk = markers[0]
            key, coeff = (mk.J, mk.K), t / mk
        else:
            key, coeff = ((0,) * signature.p, (0,) * signature.m), t
        terms[key] = terms.get(key, 0) + coeff
    return LinearDDOperator(terms, signature.p, signature.m)


class _Printer(StrPrinter):
    def _print_Pow(self, e, rational=False):
        b, x = e.as_base_exp()
        level = PRECEDENCE["Pow"]
        if x == -1:
            return "1/" + self.parenthesize(b, level)
        if x.is_Rational and x < 0:
            return "1/" + self.parenthesize(b, level) + "^" + self.parenthesize(-x, level)
        return self.parenthesize(b, level) + "^" + self.parenthesize(x, level)

    def _print_log(self, e):
        return f"ln({self._print(e.args[0])})"

    def _print_Exp1(self, e):
        return "exp(1)"

    def _print_JetVar(self, e):
        return e.name


_PRINTER = _Printer()


def to_text(e):
    """Text that :func:`parse_expr` reads back to the same normalized expression."""
    return _PRINTER.doprint(sp.sympify(e))


def operator_text(op):
    if not op.terms:
        return "0"
    parts = []
    for (J, K), c in sorted(op.terms.items()):
        word = f"D[{','.join(map(str, J))}|{','.join(map(str, K))}]"
        parts.append(f"({to_text(c)})*{word}")
    return " + ".join(parts)
