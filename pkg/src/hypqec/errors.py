"""Exception types; each maps to a distinct CLI exit code."""


class HypqecError(Exception):
    exit_code = 1


class VerificationError(HypqecError):
    """An invariant (CSS condition, Coxeter relation, ...) does not hold."""

    exit_code = 2


class ResourceCapExceeded(HypqecError):
    """An enumeration outgrew its configured cap."""

    exit_code = 3


class ParseError(HypqecError):
    """A descriptor, bundle, or table file could not be read."""

    exit_code = 4


class NLCViolation(VerificationError):
    """A subgroup fails the non-local subgroup condition."""
