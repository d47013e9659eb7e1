"""Conjugation-fidelity bounds and covariant two-copy state estimation for qudits."""

__version__ = "0.1.0"

from .conjugation_channel import (
    KrausChannel,
    choi_matrix,
    conjugation_fidelity,
    conjugation_fidelity_mc,
    estimation_bound,
    kraus_from_choi,
    optimal_conjugator,
    random_channel,
    validate_channel,
)
from .covariant_povm import (
    SeedOperator,
    SeedParams,
    build_generators,
    build_seed,
    completeness_residual,
    hermitian_expand,
    positivity_margin,
    reconstruct,
    reference_operator,
    stabilizer_covariance_residual,
)
from .fidelity_engine import (
    FidelityReport,
    closed_forms,
    f_local,
    f_parallel,
    f_perp,
    mean_fidelity,
    mean_fidelity_mc,
    moment_operator,
    table1,
)
from .povm_sampler import SimulationResult, sample_outcome, simulate
from .rng import RngStream
from .seed_optimizer import OptimizationResult, OptimizerConfig, optimize, verify_result
from .symmetric_space import SymBasis, bose_dim, haar_state_average, sym_isometry, sym_projector

__all__ = [name for name in dir() if not name.startswith("_")]
