"""Desk-scale decentralized optimization over gossip networks.

Implements the PAPC baseline, its accelerated variant APAPC, the
Chebyshev-accelerated OPAPC, and a loopless primal-dual method, with exact
accounting of gradient computations and communication rounds and
Lyapunov-based verification of the linear rates.
"""

from .dataio import Dataset, NodeShards, Trace, TraceRecord
from .diagnostics import RateFit, ReferencePoint, empirical_rate, reference_solution
from .gossip import ChebyshevParams, CommCounter, accelerated_gossip, chebyshev_params, gossip_multiply
from .oracle import LogisticOracle, Oracle, QuadraticOracle, build_oracle
from .solver import ALGORITHMS, SolverParams, SolverState, derive_params, run
from .spectral import Spectrum, SpectralSummary, eigendecompose, pinv_quadratic_form, spectral_summary
from .topology import Graph, ValidationReport, build_graph, laplacian, validate_gossip

__all__ = [
    "ALGORITHMS",
    "ChebyshevParams",
    "CommCounter",
    "Dataset",
    "Graph",
    "LogisticOracle",
    "NodeShards",
    "Oracle",
    "QuadraticOracle",
    "RateFit",
    "ReferencePoint",
    "SolverParams",
    "SolverState",
    "Spectrum",
    "SpectralSummary",
    "Trace",
    "TraceRecord",
    "ValidationReport",
    "accelerated_gossip",
    "build_graph",
    "build_oracle",
    "chebyshev_params",
    "derive_params",
    "eigendecompose",
    "empirical_rate",
    "gossip_multiply",
    "laplacian",
    "pinv_quadratic_form",
    "reference_solution",
    "run",
    "spectral_summary",
    "validate_gossip",
]

__version__ = "0.1.0"
