"""Maximum-entropy reconstruction of data from linear features.

Given ``z = W.T @ x`` and a prior for each element of ``x``, ``solve``
returns the conditional-mean estimate of ``x`` under the maximum-entropy
surrogate.  Gaussian priors give the pseudo-inverse; positive or bounded
priors keep the reconstruction inside the data range.
"""

from .errors import (
    DegenerateSlab,
    DomainError,
    FormatError,
    InfeasibleSuspected,
    MaxEntError,
    MaxIterationsWarning,
    NotPositiveDefinite,
    NumericalError,
    ParseError,
    RangeError,
    RankError,
    ShapeError,
    TruncatedFile,
    UnsupportedModel,
)
from .linmap import LinearMap, NullBasis, acf_map, dct2_map, dense_map, nullspace_basis
from .oracles import ArModel, conditional_mean_mc, levinson, levinson_ar_spectrum, periodogram_bins
from .priors import (
    DataRange,
    ElementModel,
    EntropyReport,
    PriorKind,
    activation,
    activation_deriv,
    activation_inverse,
    entropy_measures,
    prior_entropy,
)
from .solver import (
    InversionProblem,
    SolveOptions,
    SolveResult,
    StationarityReport,
    check_stationarity,
    jacobian,
    residual,
    solve,
    solve_gaussian,
    solve_many,
)

__version__ = "0.1.0"
