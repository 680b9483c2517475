"""Dimension-reducing linear feature maps ``z = W.T @ x``.

``W`` is stored as an ``(N, M)`` array with ``M < N`` and full column rank.
"""

from dataclasses import dataclass, field
import math

import numpy as np
import scipy.linalg

from .errors import NumericalError, RankError, ShapeError

__all__ = [
    "LinearMap",
    "NullBasis",
    "dense_map",
    "dct2_map",
    "acf_map",
    "nullspace_basis",
    "ones_in_colspace",
]

RANK_RTOL = 1e-10


@dataclass(frozen=True, eq=False)
class LinearMap:
    """Validated full-rank ``N x M`` feature map.

    ``source`` records how the map was built: ``("dense",)``,
    ``("dct2", side, keep)`` or ``("acf", nfft, order)``.
    """

    w: np.ndarray
    source: tuple = field(default=("dense",))

    def __post_init__(self):
        w = np.array(self.w, dtype=float)
        if w.ndim != 2:
            raise ShapeError(f"W must be two-dimensional, got shape {w.shape}")
        n, m = w.shape
        if m < 1 or m >= n:
            raise ShapeError(f"W must be N x M with N > M >= 1, got {n} x {m}")
        if not np.all(np.isfinite(w)):
            raise ShapeError("W contains non-finite entries")
        s = np.linalg.svd(w, compute_uv=False)
        if s[-1] < RANK_RTOL * s[0]:
            raise RankError(
                f"W is numerically rank-deficient: smallest singular value {s[-1]:.3g} "
                f"< {RANK_RTOL:g} x largest {s[0]:.3g}"
            )
        w.setflags(write=False)
        object.__setattr__(self, "w", w)

    @property
    def n(self):
        return self.w.shape[0]

    @property
    def m_feat(self):
        return self.w.shape[1]

    def features(self, x):
        return self.w.T @ np.asarray(x, dtype=float)


@dataclass(frozen=True, eq=False)
class NullBasis:
    """Orthonormal basis of the orthogonal complement of ``colspace(W)``."""

    b: np.ndarray


def dense_map(matrix):
    return LinearMap(np.asarray(matrix, dtype=float), ("dense",))


def _dct_matrix(side):
    """Orthonormal DCT-II matrix; row k is the k-th basis function."""
    k = np.arange(side)[:, None]
    n = np.arange(side)[None, :]
    c = np.cos(math.pi * (2 * n + 1) * k / (2 * side))
    c *= math.sqrt(2.0 / side)
    c[0] /= math.sqrt(2.0)
    return c


def dct2_map(side, keep):
    """Map from a row-major ``side x side`` image to its lowest ``keep x keep``
    orthonormal 2-D DCT-II coefficients.

    Column ``k1 * keep + k2`` is the outer product of the 1-D basis rows
    ``k1`` (vertical) and ``k2`` (horizontal), flattened row-major.
    """
    side = int(side)
    keep = int(keep)
    if not 1 <= keep < side:
        raise ShapeError(f"need 1 <= keep < side, got keep={keep}, side={side}")
    c = _dct_matrix(side)[:keep]
    w = np.einsum("ai,bj->ijab", c, c).reshape(side * side, keep * keep)
    return LinearMap(w, ("dct2", side, keep))


def acf_map(nfft, order):
    """Map from one-sided magnitude-squared DFT bins to circular ACF lags.

    With ``x`` the first ``nfft // 2 + 1`` bins of ``|fft(s)|**2``,
    ``W.T @ x`` equals ``r_k = sum_t s[t] s[(t + k) % nfft] / nfft`` for
    ``k = 0 .. order``.  The DC and Nyquist bins appear once in the full
    spectrum and every other bin twice, which sets the fold weights.
    """
    nfft = int(nfft)
    order = int(order)
    if nfft < 4 or nfft % 2:
        raise ShapeError(f"nfft must be even and >= 4, got {nfft}")
    n = nfft // 2 + 1
    if order < 0 or order + 1 >= n:
        raise ShapeError(f"order must satisfy 0 <= order and order + 1 < {n}, got {order}")
    i = np.arange(n)
    fold = np.full(n, 2.0)
    fold[[0, n - 1]] = 1.0
    w = fold[:, None] / nfft**2 * np.cos(2 * math.pi * np.outer(i, np.arange(order + 1)) / nfft)
    return LinearMap(w, ("acf", nfft, order))


def nullspace_basis(lmap):
    n, m = lmap.w.shape
    try:
        q, _r, _p = scipy.linalg.qr(lmap.w, mode="full", pivoting=True)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericalError(f"QR factorisation of W failed: {exc}") from exc
    b = np.ascontiguousarray(q[:, m:])
    b.setflags(write=False)
    return NullBasis(b)


def ones_in_colspace(lmap, rtol=1e-8):
    """Whether the all-ones vector lies in the column space of ``W``."""
    w = lmap.w
    ones = np.ones(lmap.n)
    coef, *_ = np.linalg.lstsq(w, ones, rcond=None)
    return np.linalg.norm(ones - w @ coef) <= rtol * math.sqrt(lmap.n)
