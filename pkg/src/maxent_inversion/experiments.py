"""End-to-end experiments: AR spectral estimation and DCT image inversion.

Both functions return plain result objects; writing files and reports is
left to the command line layer.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import math

import numpy as np
import scipy.signal

from .linmap import acf_map, dct2_map
from .oracles import levinson_ar_spectrum, periodogram_bins
from .priors import ElementModel, PriorKind
from .solver import InversionProblem, SolveOptions, solve, solve_gaussian

__all__ = [
    "DEFAULT_POLE_RADIUS",
    "DEFAULT_POLE_ANGLE",
    "coloured_noise",
    "spectrum_models",
    "SpectrumRun",
    "spectral_experiment",
    "ImageRun",
    "autoencode_image",
    "autoencode_batch",
]

DEFAULT_POLE_RADIUS = 0.5
DEFAULT_POLE_ANGLE = math.pi / 4
_BURN_IN = 512


def coloured_noise(nfft, seed, radius=DEFAULT_POLE_RADIUS, angle=DEFAULT_POLE_ANGLE):
    """Gaussian noise through the all-pole filter with poles ``radius * exp(+-1j*angle)``.

    The first ``_BURN_IN`` output samples are discarded so the result is
    close to stationary.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    den = [1.0, -2.0 * radius * math.cos(angle), radius * radius]
    out = scipy.signal.lfilter([1.0], den, rng.standard_normal(nfft + _BURN_IN))
    return out[_BURN_IN:]


def spectrum_models(n):
    """Chi-squared(1) priors for the real DC and Nyquist bins, exponential elsewhere."""
    exp = ElementModel.of(PriorKind.EXPONENTIAL)
    chi = ElementModel.of(PriorKind.CHISQ1)
    return (chi,) + (exp,) * (n - 2) + (chi,)


@dataclass
class SpectrumRun:
    signal: np.ndarray
    bins: np.ndarray
    acf: np.ndarray
    result: object
    ar_spectrum: np.ndarray
    max_rel_deviation: float


def spectral_experiment(nfft=128, order=6, seed=0, signal=None, opts=None,
                        radius=DEFAULT_POLE_RADIUS, angle=DEFAULT_POLE_ANGLE):
    """Recover the one-sided spectrum from ACF lags and compare with Levinson AR."""
    if signal is None:
        signal = coloured_noise(nfft, seed, radius, angle)
    signal = np.asarray(signal, dtype=float).ravel()
    nfft = signal.size
    bins = periodogram_bins(signal)
    lmap = acf_map(nfft, order)
    acf = lmap.features(bins)
    problem = InversionProblem(lmap, spectrum_models(lmap.n), acf)
    result = solve(problem, opts)
    ar = levinson_ar_spectrum(acf, nfft)
    dev = float(np.max(np.abs(result.x_bar - ar) / ar))
    return SpectrumRun(signal, bins, acf, result, ar, dev)


@dataclass
class ImageRun:
    original: np.ndarray
    features: np.ndarray
    pinv: object
    exponential: object
    ted: object
    metrics: dict = field(default_factory=dict)


def _mse(a, b):
    return float(np.mean((a - b) ** 2))


def autoencode_image(pixels, lmap, opts=None):
    """Reconstruct one image from its DCT features three ways."""
    x = np.asarray(pixels, dtype=float).ravel()
    z = lmap.features(x)
    pinv = solve_gaussian(lmap, z)
    expo = solve(InversionProblem(lmap, PriorKind.EXPONENTIAL, z), opts)
    ted = solve(InversionProblem(lmap, PriorKind.TED, z), opts)
    out_of_range = int(np.sum((pinv.x_bar < 0.0) | (pinv.x_bar > 1.0)))
    metrics = {
        "pinv": {
            "residual_inf": pinv.residual_inf,
            "out_of_range": out_of_range,
            "min": float(pinv.x_bar.min()),
            "max": float(pinv.x_bar.max()),
            "mse": _mse(pinv.x_bar, x),
        },
        "exp": {
            "residual_inf": expo.residual_inf,
            "iterations": expo.iterations,
            "converged": expo.converged,
            "above_one": int(np.sum(expo.x_bar > 1.0)),
            "min": float(expo.x_bar.min()),
            "max": float(expo.x_bar.max()),
            "mse": _mse(expo.x_bar, x),
        },
        "ted": {
            "residual_inf": ted.residual_inf,
            "iterations": ted.iterations,
            "converged": ted.converged,
            "out_of_range": int(np.sum((ted.x_bar <= 0.0) | (ted.x_bar >= 1.0))),
            "min": float(ted.x_bar.min()),
            "max": float(ted.x_bar.max()),
            "mse": _mse(ted.x_bar, x),
        },
    }
    return ImageRun(x, z, pinv, expo, ted, metrics)


def autoencode_batch(images, side, keep, opts=None, workers=None):
    """Run ``autoencode_image`` over rows of ``images`` (order preserved)."""
    lmap = dct2_map(side, keep)
    opts = opts or SolveOptions()
    rows = list(np.asarray(images, dtype=float).reshape(-1, side * side))
    if workers == 1:
        return [autoencode_image(r, lmap, opts) for r in rows]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda r: autoencode_image(r, lmap, opts), rows))
