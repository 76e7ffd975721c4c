"""Exception types shared across the package."""


class LpEmbedError(Exception):
    """Base class for every error raised by lpembed."""


class NotSymmetric(LpEmbedError):
    """Matrix expected to be exactly symmetric is not."""


class SingularMatrix(LpEmbedError):
    """Determinant below the relative singularity threshold."""


class GuardViolation(LpEmbedError):
    """A field node was evaluated where its guard quantity vanishes.

    ``node`` names the offending node kind, ``quantity`` is the guard value.
    """

    def __init__(self, node: str, quantity: float):
        super().__init__(f"guard violated at node {node!r}: |{quantity:.3e}| below margin")
        self.node = node
        self.quantity = quantity


class SingularPoint(GuardViolation):
    """A mapping was evaluated on (or too close to) its singular set."""


class InvalidExponent(LpEmbedError):
    """p must be positive and not an even integer."""


class SingularOnDomain(LpEmbedError):
    """A mapping or weight is singular on too much of the requested domain."""


class DomainMismatch(LpEmbedError):
    """Domain coincidence validation failed for the requested witness."""


class InvalidParams(LpEmbedError):
    """Witness parameters violate a family constraint."""


class ConfigError(LpEmbedError):
    """Problem configuration is malformed or inconsistent."""
