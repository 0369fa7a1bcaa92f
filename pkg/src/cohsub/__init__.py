"""Verification and feasibility search for coherence state transformations."""

from .channels import (
    ChannelKind,
    ChannelSpec,
    KrausClass,
    VanishingProbabilityError,
    apply_channel,
    apply_stochastic,
    classify_kraus,
    is_incoherent_by_action,
    validate_channel,
)
from .feasibility import (
    ColumnAssignment,
    CompletionResult,
    RayMappingSolution,
    build_theorem4_instance,
    deterministic_completion_search,
    enumerate_column_assignments,
    ray_invariance_check,
    solve_ray_mapping,
    stochastic_io_reachable,
)
from .qcore import (
    DensityMatrix,
    coherence_rank_pure,
    dagger,
    dephase,
    hermitian_eigendecomposition,
    is_pure,
    purity,
)
from .subspace import (
    IncoherentProjector,
    SubspaceReport,
    enumerate_incoherent_projectors,
    max_pure_coherent_subspace,
    pure_subspace_at,
    ssio_pure_reachable,
)

__version__ = "0.1.0"
