"""Exception hierarchy shared by all ddvar modules."""


class DDError(Exception):
    """Base class for every error raised by ddvar."""


class UndeclaredSymbol(DDError):
    pass


class DomainError(DDError):
    """A builtin received an argument outside its domain (ln of x <= 0, 0^-k)."""


class SingularSample(DDError):
    pass


class NonEvaluable(DDError):
    """Every sampling retry hit a singular or out-of-domain point."""


class NotSolvable(DDError):
    pass


class OverlappingLeaders(DDError):
    pass


class NonTerminating(DDError):
    pass


class StructureViolation(DDError):
    pass


class SamplingDegenerate(DDError):
    pass


class NotVariational(DDError):
    pass


class DecompositionIncomplete(DDError):
    pass


class NotLinearHomogeneous(DDError):
    pass


class RelationNonzero(DDError):
    def __init__(self, index, witness=None):
        super().__init__(f"relation {index} does not vanish identically")
        self.index = index
        self.witness = witness


class ParseError(DDError):
    """Malformed input text; carries 1-based line and column."""

    def __init__(self, message, line=1, column=1):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class ArityError(ParseError):
    pass
