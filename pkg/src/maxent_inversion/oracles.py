"""Reference computations that do not go through the Newton solver.

* ``periodogram_bins`` and ``levinson_ar_spectrum`` give the classical
  autoregressive spectral estimate for comparison with the maximum-entropy
  reconstruction from ACF features.
* ``conditional_mean_mc`` estimates the mean of the prior restricted to
  the constraint set ``{x : W.T x = z}`` by rejection sampling on a thin
  slab around it.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSlab, NotPositiveDefinite, ShapeError
from .priors import PriorKind

__all__ = [
    "ArModel",
    "periodogram_bins",
    "levinson",
    "levinson_ar_spectrum",
    "conditional_mean_mc",
]


@dataclass(frozen=True, eq=False)
class ArModel:
    """AR model ``s[t] + sum_k coeffs[k] s[t-k] = e[t]``, ``var(e) = error_var``."""

    coeffs: np.ndarray
    error_var: float
    reflection: np.ndarray
    error_vars: np.ndarray


def periodogram_bins(signal):
    """First ``nfft // 2 + 1`` bins of ``|fft(signal)|**2``."""
    s = np.asarray(signal, dtype=float).ravel()
    if s.size < 4 or s.size % 2:
        raise ShapeError(f"signal length must be even and >= 4, got {s.size}")
    spec = np.fft.rfft(s)
    return spec.real**2 + spec.imag**2


def levinson(acf):
    """Levinson-Durbin recursion on autocorrelation lags ``acf[0..p]``."""
    r = np.asarray(acf, dtype=float).ravel()
    if r.size < 1:
        raise ShapeError("need at least lag 0")
    order = r.size - 1
    a = np.zeros(order + 1)
    a[0] = 1.0
    refl = np.zeros(order)
    errs = np.empty(order + 1)
    err = r[0]
    if not err > 0:
        raise NotPositiveDefinite(f"lag-0 autocorrelation must be positive, got {err!r}")
    errs[0] = err
    for m in range(1, order + 1):
        acc = r[m] + np.dot(a[1:m], r[m - 1 : 0 : -1])
        k = -acc / err
        a[1 : m + 1] = a[1 : m + 1] + k * np.r_[a[m - 1 : 0 : -1], 1.0]
        refl[m - 1] = k
        err = err * (1.0 - k * k)
        if not err > 0:
            raise NotPositiveDefinite(
                f"prediction error variance became {err!r} at order {m}; ACF is not positive definite"
            )
        errs[m] = err
    return ArModel(coeffs=a, error_var=float(err), reflection=refl, error_vars=errs)


def levinson_ar_spectrum(acf, nfft):
    """AR spectrum on the one-sided DFT grid, in periodogram units.

    Returns ``nfft * e0 / |A_i|**2`` for ``i = 0 .. nfft // 2`` where ``A``
    is the DFT of the AR polynomial zero-padded to ``nfft``.  The factor
    ``nfft`` puts the result on the same scale as ``|fft(s)|**2``.
    """
    nfft = int(nfft)
    if nfft < 4 or nfft % 2:
        raise ShapeError(f"nfft must be even and >= 4, got {nfft}")
    model = levinson(acf)
    if model.coeffs.size > nfft:
        raise ShapeError("AR order must be below nfft")
    big_a = np.fft.rfft(model.coeffs, nfft)
    return nfft * model.error_var / (big_a.real**2 + big_a.imag**2)


_SAMPLERS = {
    PriorKind.TED: lambda rng, shape: rng.random(shape),
    PriorKind.EXPONENTIAL: lambda rng, shape: rng.standard_exponential(shape),
    PriorKind.GAUSSIAN: lambda rng, shape: rng.standard_normal(shape),
}


def conditional_mean_mc(problem, samples, slab_eps=None, seed=0, batch=1 << 20, max_draws=None):
    """Monte-Carlo mean of the prior conditioned on ``W.T x = z``.

    Draws from the prior (``numpy`` PCG64 seeded with ``seed``) and keeps
    samples with ``max|W.T x - z| <= slab_eps``, until ``samples`` have
    been accepted.  ``slab_eps`` defaults to ``1e-2 * max|z|``.

    Returns ``(estimate, stderr)``, both of length ``N``.
    """
    kind = problem.homogeneous_kind
    if kind not in _SAMPLERS:
        raise ValueError("conditional_mean_mc supports homogeneous TED, exponential or Gaussian models")
    n = problem.map.n
    if n > 6:
        raise ValueError(f"conditional_mean_mc is meant for N <= 6, got N={n}")
    samples = int(samples)
    z = problem.z
    if slab_eps is None:
        slab_eps = 1e-2 * max(float(np.max(np.abs(z))), 1e-12)
    if not slab_eps > 0:
        raise ValueError("slab_eps must be positive")
    if max_draws is None:
        max_draws = 2000 * max(samples, 100)

    draw = _SAMPLERS[kind]
    rng = np.random.Generator(np.random.PCG64(seed))
    w = problem.map.w
    total = np.zeros(n)
    total_sq = np.zeros(n)
    accepted = 0
    drawn = 0
    while accepted < samples and drawn < max_draws:
        size = min(batch, max_draws - drawn)
        x = draw(rng, (size, n))
        drawn += size
        keep = np.max(np.abs(x @ w - z), axis=1) <= slab_eps
        xs = x[keep]
        accepted += xs.shape[0]
        total += xs.sum(axis=0)
        total_sq += (xs * xs).sum(axis=0)
    if accepted < 100:
        raise DegenerateSlab(f"only {accepted} of {drawn} draws fell in the slab (need 100)")
    mean = total / accepted
    var = np.maximum(total_sq / accepted - mean**2, 0.0) * accepted / (accepted - 1)
    return mean, np.sqrt(var / accepted)
