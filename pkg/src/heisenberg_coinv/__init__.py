"""Exact, truncated computations of Heisenberg coinvariants over extended PPAV data and curves."""

from .coinvariants import (
    CoinvariantProblem,
    CoinvariantReport,
    coinvariant_dims,
    exp_on_coinvariants,
    exponentiate,
    pi0_oracle,
    preserve_check,
    scale_by_eigenvalue,
)
from .curves import HyperellipticCurve, curve_outgoing, expand_functions, residue_isotropy_report, torelli_point
from .errors import (
    CoinvError,
    ConfigInvalid,
    InvariantViolation,
    MarginTooSmall,
    TruncationInsufficient,
)
from .exactseries import GaussianRational, LaurentPoly, residue_pairing, series_sqrt
from .fock import ConformalVector, FockVector, apply_mode, apply_quadratic, graded_dimensions, virasoro
from .lattice import HVector, Lattice, dual_quadratic, lattice_validate, mode_bracket
from .ppav import ExtendedSiegelPoint, OutgoingLattice, SpMatrix, extract_outgoing, sp_act, validate_point

__version__ = "0.1.0"
