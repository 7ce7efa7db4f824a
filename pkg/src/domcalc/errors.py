"""Exception types shared across the package."""


class DomcalcError(Exception):
    """Base class for all errors raised by this package."""


class DuplicateId(DomcalcError):
    """An atom id was declared twice."""


class InconsistentFlags(DomcalcError):
    """An atom declaration violates the flag implication rules."""


class ShapeMismatch(DomcalcError):
    """An expression combines operators acting on different spaces."""


class NonNormalizable(DomcalcError):
    """The expression has no monomial normal form (an entry would need a sum)."""


class ContradictionDetected(DomcalcError):
    """Two regroupings of the same product produced incompatible verdicts.

    This is an engine-soundness sentinel.  It must never fire; if it does,
    a rewrite rule is wrong.
    """


class ParseError(DomcalcError):
    """Malformed input text.

    Attributes carry the offset (or line number, for facts files) and a
    description of what was expected.
    """

    def __init__(self, message: str, position: int | None = None):
        super().__init__(message if position is None else f"{message} (at {position})")
        self.position = position


class ConflictingAxiom(DomcalcError):
    """Two axioms share a normalized key but disagree on the right-hand side."""


class UnknownScenario(DomcalcError):
    """No scenario is registered under the requested name."""


class OutOfRange(DomcalcError):
    """A numeric argument is outside its documented range."""


class DegenerateWindow(DomcalcError):
    """Too many samples in the tail-fit window underflowed to zero."""


class UnverifiedDerivation(DomcalcError):
    """A derivation failed verification so it cannot be exported."""
