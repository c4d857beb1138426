"""Exception hierarchy.

Every error raised by the library derives from :class:`CoinvError`; the CLI maps
the three families below onto its exit codes.
"""

from __future__ import annotations


class CoinvError(Exception):
    pass


class ConfigInvalid(CoinvError, ValueError):
    """Bad user input: malformed lattice, point, curve or run parameters."""


class TruncationInsufficient(CoinvError):
    """A requested coefficient depends on series coefficients that were discarded."""


class InvariantViolation(CoinvError):
    """An exact check failed; ``witness`` carries the offending data."""

    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


# lattice
class NotSymmetric(ConfigInvalid):
    pass


class NotEven(ConfigInvalid):
    pass


class NotPositiveDefinite(ConfigInvalid):
    pass


class RankMismatch(ConfigInvalid):
    pass


# series
class BadLeadingTerm(ConfigInvalid):
    pass


# fock
class LevelUnsupported(CoinvError):
    pass


class NotNilpotent(CoinvError):
    pass


# ppav
class GraphNotIsotropic(ConfigInvalid):
    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


class FrameDegenerate(ConfigInvalid):
    pass


class OmegaNotSiegel(ConfigInvalid):
    pass


class NotSymplectic(ConfigInvalid):
    pass


class SingularFactor(CoinvError):
    pass


class RankDeficient(InvariantViolation):
    pass


# coinvariants
class GapSetIncomplete(InvariantViolation):
    pass


class MarginTooSmall(CoinvError):
    pass
