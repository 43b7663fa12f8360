"""Spectra of Hadamard products of independent sample covariance matrices in
the quadratic regime ``n ~ d p``, checked against the Marchenko-Pastur law."""

__version__ = "0.1.0"

from .ensembles import (  # noqa: E402
    DimensionSchedule,
    DimensionTriple,
    EnsembleSpec,
    EntryDistribution,
    dimension_schedule,
    hadamard_covariance,
    sample_matrix,
    truncate_center,
)
from .mp_law import MPLaw, finite_n_tree_moment, mp_moment, stieltjes  # noqa: E402
from .seeding import derive_trial_seed  # noqa: E402

__all__ = [
    "DimensionSchedule",
    "DimensionTriple",
    "EnsembleSpec",
    "EntryDistribution",
    "MPLaw",
    "derive_trial_seed",
    "dimension_schedule",
    "finite_n_tree_moment",
    "hadamard_covariance",
    "mp_moment",
    "sample_matrix",
    "stieltjes",
    "truncate_center",
]
