"""Numerical toolkit for distances between unital quantum channels and the
convex hull of unitary channels.

Conventions: the trace distance carries no factor 1/2 (orthogonal pure
states are at distance 2) and Choi matrices are unnormalized (trace equals
the input dimension for trace-preserving channels).
"""

from .bounds import (
    BoundReport,
    birkhoff_decompose,
    c_phi,
    helstrom_measurement,
    lambda_distance_upper,
    majorize_check,
    sandwich_report,
    succ_probability,
    tensor_bound_report,
    uhlmann_mixture,
    unitary_in_span,
)
from .channels import (
    ChoiMatrix,
    KrausChannel,
    adjoint,
    apply_channel,
    choi,
    generalized_choi,
    kraus_space_basis,
    tensor,
    validate,
)
from .errors import (
    DimensionError,
    ParameterError,
    ParseError,
    PreconditionError,
    SolverError,
    StructureError,
)
from .matcore import (
    DensityOperator,
    fidelity,
    kron,
    matrix_abs,
    partial_trace,
    psd_check,
    schatten_norm,
    trace_distance,
)
from .schur import (
    DiagonalUnitaryMixture,
    SchurMatrix,
    compress_block,
    gram_factorize,
    is_schur_channel,
    mixture_from_twirl,
    mixture_to_schur,
    multiplier_norm,
    schur_apply,
    schur_to_kraus,
    split_contraction,
    twirl,
)
from .sdpsolve import (
    SdpProblem,
    SdpSolution,
    diamond_distance,
    diamond_upper_certificate,
    dump_problem,
    solve,
    trace_norm_max,
)

__version__ = "0.1.0"
