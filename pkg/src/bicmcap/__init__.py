"""Capacity of bit-interleaved coded modulation over discrete memoryless channels.

The main entry points are :func:`bacm_solve` for a channel matrix and
:func:`bicm_capacity_awgn` for Gray-labeled PAM over the Gaussian channel.
"""
from .bacm import (
    BacmConfig,
    BitSubproblem,
    CapacityResult,
    SolveTelemetry,
    bacm_solve,
    bisection_evaluations,
    convex_concave_bit,
    pair_entropy_term,
    penalized_objective,
    taylor_lower_bound_hj,
)
from .baseline import (
    GridResult,
    GridSpec,
    cm_capacity,
    exhaustive_bicm,
    grid_local_maxima,
    grid_objective,
    uniform_bicm,
)
from .bicm import (
    bicm_mi,
    bit_mutual_informations,
    brgc_permutation,
    check_bits,
    conditional_entropy_bit,
    effective_bit_channel,
    effective_pair_channel,
    kron_pmf,
    label_bits,
    uniform_bits,
)
from .dmc import (
    BlahutArimotoResult,
    ConvergenceError,
    Dmc,
    blahut_arimoto,
    column_entropies,
    entropy,
    load_matrix,
    mutual_information,
    output_pmf,
    save_matrix,
)
from .awgn import (
    AwgnCapacity,
    Constellation,
    DiscretizationRule,
    awgn_capacity,
    bicm_capacity_awgn,
    build_constellation,
    cm_capacity_awgn,
    db_to_linear,
    discretize_awgn,
    linear_to_db,
    snr_of,
    solve_lambda_for_snr,
    uniform_bicm_awgn,
    uniform_scaling,
)

__version__ = "0.1.0"
