"""Dilute Wigner random matrices: sampling, spectra, resolvent statistics and
their leading-order asymptotics."""
__version__ = "0.1.0"

from .ensemble import (  # noqa: E402
    ConfigurationError,
    EnsembleConfig,
    EntryLaw,
    LawKind,
    SymmetricMatrix,
    draw_sample,
    sample_matrix,
    truncated_law,
)
from .eig import EigenSolverError, SpectralSample, eigen_decompose, empirical_cdf, ks_distance  # noqa: E402
from .theory import DomainError, TheoryParams, stieltjes_w  # noqa: E402

__all__ = [
    "ConfigurationError", "DomainError", "EigenSolverError", "EnsembleConfig", "EntryLaw", "LawKind",
    "SpectralSample", "SymmetricMatrix", "TheoryParams", "draw_sample", "eigen_decompose",
    "empirical_cdf", "ks_distance", "sample_matrix", "stieltjes_w", "truncated_law",
]
