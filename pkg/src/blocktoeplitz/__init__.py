"""Block Toeplitz and Hankel operators with matrix trigonometric-polynomial symbols.

Exact finite Hankel constructions, semi-commutator and commutator diagnostics,
Poisson-extension criteria, certificates for vanishing Hankel-product sums and
radial scans of the criterion functions.
"""

from .errors import (
    BlockToeplitzError,
    DimensionMismatch,
    InconsistencyError,
    NotZeroInstance,
    PremiseViolation,
    SymbolFormatError,
)
from .symbol import (
    DiskPoint,
    MatrixSymbol,
    SplitSymbol,
    adjoint,
    block,
    cross_ext,
    evaluate,
    mod_sq_ext,
    multiply,
    poisson_ext,
    random_symbol,
    split,
    square_wave,
)
from .hardy import (
    FiniteHankel,
    KernelVec,
    RankOneSum,
    ToeplitzSection,
    hankel_matrix,
    hankel_on_kernel,
    kernel_vec,
    mobius_coeffs,
    rank_one_defect,
    semicommutator,
    toeplitz_section,
)
from .criteria import (
    CriterionReport,
    ScanTable,
    commutator_criterion,
    criterion,
    normality_criterion,
    radial_scan,
    trace_defect,
    zero_semicommutator_check,
)
from .decompose import (
    Certificate,
    XiResult,
    convex_subproblem,
    prop4_solve,
    theorem5_check,
    xi2,
)

__version__ = "0.1.0"
