"""Transversal k-flats for 2-partitions of point sets in R^d.

Given k + 1 sets of d - k + 2 points each, find a 2-partition of every set
and a k-flat meeting all 2(k + 1) part hulls, with a re-checkable
certificate.
"""

from .certificate import Certificate, Instance, VerifyReport, certificate_at, verify
from .config import DEFAULT_TOLERANCES, Tolerances
from .errors import (
    BudgetExceeded,
    DegenerateSpec,
    DimensionMismatch,
    IllConditioned,
    InvalidInstance,
    MalformedCertificate,
    RankDeficient,
    TverflatError,
)
from .feasibility import HullSystem, common_point_gap, feasible_exact, nearest_in_hull
from .geometry import Flat, Subspace, complement_basis, flat_from, orthonormalize, project, span
from .instances import GadgetSpec, gen_degenerate, gen_gadget, gen_random
from .kernels import BACKEND
from .radon import affine_dependence, radon_partition
from .solver import FailureReport, SolveFailed, SolverConfig, brute_oracle, objective_radon_trace, solve

__version__ = "0.1.0"
