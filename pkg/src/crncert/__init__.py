"""Structural stability certificates for chemical reaction networks."""

__version__ = "0.1.0"

from ._kernels import BACKEND
from .exact import ExactMatrix, equal_kernels, exact_minor, kernel_basis
from .kinetics import KineticsSpec, RateLaw, rate_jacobian, rate_vector
from .lp import LinearProgram, lp_feasible, lp_solve
from .network import (ReactionNetwork, check_ag, conservation_analysis, parse_network,
                      rank_one_decomposition)
from .partition import ConicPartition, build_partition, enumerate_regions, neighbors, reduce_rows
from .pwlr import (Infeasible, PWLRCertificate, evaluate, synthesize, verify_certificate,
                   verify_convex, verify_l1)

__all__ = [
    "BACKEND",
    "ExactMatrix", "equal_kernels", "exact_minor", "kernel_basis",
    "KineticsSpec", "RateLaw", "rate_jacobian", "rate_vector",
    "LinearProgram", "lp_feasible", "lp_solve",
    "ReactionNetwork", "check_ag", "conservation_analysis", "parse_network", "rank_one_decomposition",
    "ConicPartition", "build_partition", "enumerate_regions", "neighbors", "reduce_rows",
    "Infeasible", "PWLRCertificate", "evaluate", "synthesize", "verify_certificate",
    "verify_convex", "verify_l1",
]
