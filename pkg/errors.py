# errors.py
"""
Named failures of the laboratory.

Everything derives from ValueError so callers that only care about
"bad input" can keep catching ValueError.
"""


class HetlabError(ValueError):
    pass


class DomainError(HetlabError):
    """Non-finite coefficients or state."""


class CoefficientFormatError(HetlabError):
    def __init__(self, message: str, key: str | None = None):
        super().__init__(message)
        self.key = key


class NoRealEquilibria(HetlabError):
    pass


class SignPatternViolation(HetlabError):
    """Both equilibria on L1 have the same sign (construction item (i) fails)."""


class NotASaddleInS134(HetlabError):
    pass


class DegenerateCoefficient(HetlabError):
    pass


class PreconditionViolated(HetlabError):
    pass


class ConfigError(HetlabError):
    pass


class NoUnstableDirection(HetlabError):
    pass
