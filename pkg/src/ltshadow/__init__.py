"""Locally tomographic shadows of finite-dimensional real quantum theory.

Block decomposition of bipartite operator space, the shadow projection on
states and processes, membership oracles for the nested tensor cones,
the tiles unextendible product basis, and a fiber sampler for the apparent
non-determinism seen by local agents.
"""

__version__ = "0.1.0"

from .blocks import (
    BlockBasis,
    BlockCoordinates,
    antisymmetric_basis,
    build_block_basis,
    decompose,
    project_block,
    recompose,
    symmetric_basis,
)
from .cones import (
    ConeMembershipResult,
    FeasibilityParams,
    effect_in_shadow_cone,
    in_boxtimes_cone,
    in_max_cone,
    in_min_cone,
    in_positive_ss_cone,
    replay_boxtimes_member,
    replay_separating_functional,
)
from .errors import (
    DimensionMismatch,
    EigenConvergenceError,
    InfeasibleShadow,
    NotLocallyPositive,
    SupportViolation,
)
from .fiber import FiberSample, SpreadReport, push_and_spread, sample_fiber
from .linalg import (
    EigenDecomposition,
    antisym_part,
    eig_sym,
    is_psd,
    kron,
    rng_from_seed,
    sym_part,
    trace_inner,
)
from .processes import (
    LinearProcess,
    ProcessBlockMatrix,
    block_matrix,
    conjugation_process,
    effect_functional,
    effect_local_positivity_census,
    epsilon_functional,
    identity_process,
    is_locally_positive,
    is_positive_map_heuristic,
    preparation_process,
    random_kernel_leaking_process,
    random_locally_positive_process,
    shadow_of_map,
    swap_process,
)
from .shadow import (
    ShadowState,
    fiber_basis,
    local_shadow_matrix,
    locally_indistinguishable,
    lt_multipartite,
    lt_state,
    lt_state_oracle,
    partial_transpose,
)
from .upb import (
    ProductVectorFamily,
    separating_max_cone_form,
    tiles_upb,
    unextendibility_margin,
    upb_state,
)
from .verify import run_verification_report

__all__ = [name for name in dir() if not name.startswith("_")]
