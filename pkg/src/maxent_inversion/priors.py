"""Maximum-entropy priors on a single data element and their activations.

Every prior here is a member of the exponential class

    p_e(x; a) = x**gamma * exp((alpha0 + a) * x + beta * x**2) / Z(a)

restricted to its data range.  ``a = 0`` gives the maximum-entropy prior
itself; the activation ``lambda(a)`` is the mean of ``p_e`` and its
derivative is the variance.

All kernels are vectorised over ``alpha``.
"""

from dataclasses import dataclass
from enum import Enum
import math

import numpy as np
from scipy.special import erfcx, log_ndtr

from .errors import DomainError, RangeError, UnsupportedModel

__all__ = [
    "DataRange",
    "PriorKind",
    "ElementModel",
    "EntropyReport",
    "activation",
    "activation_deriv",
    "activation_inverse",
    "prior_entropy",
    "entropy_measures",
]


class DataRange(Enum):
    UNBOUNDED = "unbounded"
    POSITIVE = "positive"
    UNIT_INTERVAL = "unit_interval"

    @property
    def bounds(self):
        return {
            DataRange.UNBOUNDED: (-math.inf, math.inf),
            DataRange.POSITIVE: (0.0, math.inf),
            DataRange.UNIT_INTERVAL: (0.0, 1.0),
        }[self]

    def contains_open(self, x):
        """True where ``x`` lies strictly inside the range."""
        lo, hi = self.bounds
        x = np.asarray(x, dtype=float)
        return (x > lo) & (x < hi)


class PriorKind(Enum):
    GAUSSIAN = "gaussian"
    TRUNC_GAUSS = "tg"
    EXPONENTIAL = "exp"
    CHISQ1 = "chisq1"
    TED = "ted"

    @classmethod
    def parse(cls, name):
        if isinstance(name, cls):
            return name
        key = str(name).strip().lower()
        aliases = {
            "gauss": "gaussian",
            "normal": "gaussian",
            "truncgauss": "tg",
            "trunc_gauss": "tg",
            "exponential": "exp",
            "expon": "exp",
            "chisq": "chisq1",
            "chi2": "chisq1",
            "uniform": "ted",
        }
        key = aliases.get(key, key)
        try:
            return cls(key)
        except ValueError:
            valid = ", ".join(k.value for k in cls)
            raise ValueError(f"unknown prior kind {name!r} (expected one of {valid})") from None


# (alpha0, beta, gamma, range, upper limit of the alpha domain)
_TABLE = {
    PriorKind.GAUSSIAN: (0.0, -0.5, 0.0, DataRange.UNBOUNDED, math.inf),
    PriorKind.TRUNC_GAUSS: (0.0, -0.5, 0.0, DataRange.POSITIVE, math.inf),
    PriorKind.EXPONENTIAL: (-1.0, 0.0, 0.0, DataRange.POSITIVE, 1.0),
    PriorKind.CHISQ1: (-0.5, 0.0, -0.5, DataRange.POSITIVE, 0.5),
    PriorKind.TED: (0.0, 0.0, 0.0, DataRange.UNIT_INTERVAL, math.inf),
}


@dataclass(frozen=True)
class ElementModel:
    """Data range and prior of one element of ``x``.

    Build with ``ElementModel.of(kind)``; the numeric parameters are fixed
    by the kind and validated on construction.
    """

    kind: PriorKind
    alpha0: float
    beta: float
    gamma: float
    range: DataRange

    def __post_init__(self):
        a0, b, g, rng, _ = _TABLE[self.kind]
        if (self.alpha0, self.beta, self.gamma, self.range) != (a0, b, g, rng):
            raise ValueError(
                f"parameters ({self.alpha0}, {self.beta}, {self.gamma}, {self.range.value}) "
                f"do not match the {self.kind.value} prior"
            )

    @classmethod
    def of(cls, kind):
        kind = PriorKind.parse(kind)
        a0, b, g, rng, _ = _TABLE[kind]
        return cls(kind, a0, b, g, rng)

    @property
    def alpha_max(self):
        """Supremum of the activation domain (exclusive)."""
        return _TABLE[self.kind][4]

    def in_domain(self, alpha):
        alpha = np.asarray(alpha, dtype=float)
        return np.isfinite(alpha) & (alpha < self.alpha_max)


@dataclass(frozen=True)
class EntropyReport:
    h_ds: float
    h_s: float
    h_e: float


# ---------------------------------------------------------------------------
# Kernels.  Inputs are float arrays already known to be in the domain.

_SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)

_TED_SERIES_CUT = 0.2
_TED_LARGE = 36.0
_TG_TAIL = -6.0
_CF_DEPTH = 200


def _lam_gauss(a):
    return a.copy()


def _dlam_gauss(a):
    return np.ones_like(a)


def _tg_tail(a):
    """Mean and variance of the positive truncated Gaussian for a << 0.

    With t = -a the mean is 1/(t + g) where g = 2/(t + 3/(t + 4/(...)))
    is the tail of the continued fraction for the inverse Mills ratio, so
    no cancellation occurs.  The variance follows as mean * (g - mean).
    """
    t = -a
    tail = np.zeros_like(t)
    for k in range(_CF_DEPTH, 1, -1):
        tail = k / (t + tail)
    mean = 1.0 / (t + tail)
    return mean, mean * (tail - mean)


def _tg_body(a):
    r = _SQRT_2_OVER_PI / erfcx(-a / math.sqrt(2.0))
    mean = a + r
    return mean, 1.0 - r * mean


def _tg(a):
    mean = np.empty_like(a)
    var = np.empty_like(a)
    tail = a < _TG_TAIL
    mean[tail], var[tail] = _tg_tail(a[tail])
    mean[~tail], var[~tail] = _tg_body(a[~tail])
    return mean, var


def _lam_tg(a):
    return _tg(a)[0]


def _dlam_tg(a):
    return _tg(a)[1]


def _lam_exp(a):
    return 1.0 / (1.0 - a)


def _dlam_exp(a):
    return 1.0 / (1.0 - a) ** 2


def _lam_chisq1(a):
    return 1.0 / (1.0 - 2.0 * a)


def _dlam_chisq1(a):
    return 2.0 / (1.0 - 2.0 * a) ** 2


def _lam_ted(a):
    out = np.empty_like(a)
    small = np.abs(a) < _TED_SERIES_CUT
    s = a[small]
    s2 = s * s
    out[small] = 0.5 + s * (1 / 12 + s2 * (-1 / 720 + s2 * (1 / 30240 + s2 * (-1 / 1209600 + s2 / 47900160))))
    hi = a >= _TED_SERIES_CUT
    ah = a[hi]
    # e^a/(e^a - 1) = 1/(1 - e^-a); saturates to 1 - 1/a beyond the cut.
    out[hi] = np.where(ah > _TED_LARGE, 1.0 - 1.0 / ah, -1.0 / np.expm1(-np.minimum(ah, _TED_LARGE)) - 1.0 / ah)
    lo = a <= -_TED_SERIES_CUT
    al = a[lo]
    out[lo] = np.where(al < -_TED_LARGE, -1.0 / al, np.exp(al) / np.expm1(np.maximum(al, -_TED_LARGE)) - 1.0 / al)
    return out


def _dlam_ted(a):
    out = np.empty_like(a)
    small = np.abs(a) < _TED_SERIES_CUT
    s2 = a[small] ** 2
    out[small] = 1 / 12 + s2 * (-1 / 240 + s2 * (1 / 6048 + s2 * (-1 / 172800 + s2 / 5322240)))
    big = ~small
    ab = np.abs(a[big])
    u = np.exp(-ab)
    out[big] = 1.0 / ab**2 - u / np.expm1(-ab) ** 2
    return out


_KERNELS = {
    PriorKind.GAUSSIAN: (_lam_gauss, _dlam_gauss),
    PriorKind.TRUNC_GAUSS: (_lam_tg, _dlam_tg),
    PriorKind.EXPONENTIAL: (_lam_exp, _dlam_exp),
    PriorKind.CHISQ1: (_lam_chisq1, _dlam_chisq1),
    PriorKind.TED: (_lam_ted, _dlam_ted),
}


def _checked(model, alpha):
    arr = np.asarray(alpha, dtype=float)
    ok = model.in_domain(arr)
    if not np.all(ok):
        bad = arr.flat[int(np.flatnonzero(~ok.ravel())[0])]
        raise DomainError(
            f"alpha={bad!r} outside the {model.kind.value} activation domain "
            f"(alpha < {model.alpha_max})"
        )
    return arr


def _scalar_or_array(value, like):
    return float(value) if np.ndim(like) == 0 else value


def activation(model, alpha):
    """Mean of the exponential-class prior at natural parameter ``alpha``."""
    arr = _checked(model, alpha)
    out = _KERNELS[model.kind][0](np.atleast_1d(arr)).reshape(arr.shape)
    return _scalar_or_array(out, alpha)


def activation_deriv(model, alpha):
    """Derivative of the activation, i.e. the variance of the prior."""
    arr = _checked(model, alpha)
    out = _KERNELS[model.kind][1](np.atleast_1d(arr)).reshape(arr.shape)
    return _scalar_or_array(out, alpha)


def _bracket(kind, m):
    if kind is PriorKind.TED:
        # lambda(a) < -1/a for a < 0 and lambda(a) > 1 - 1/a for a > 0
        return -1.0 / m, 1.0 / (1.0 - m)
    # truncated Gaussian: lambda(a) > a, and lambda(a) < -1/a for a < 0
    return -1.0 / m, m


def _newton_bisect(kind, m, max_iter=200):
    lam, dlam = _KERNELS[kind]
    lo, hi = _bracket(kind, m)
    lo = lo.copy()
    hi = hi.copy()
    a = np.clip(np.zeros_like(m), lo, hi)
    active = np.ones(m.shape, dtype=bool)
    for _ in range(max_iter):
        if not active.any():
            break
        aa = a[active]
        f = lam(aa) - m[active]
        sub_lo = lo[active]
        sub_hi = hi[active]
        sub_lo = np.where(f < 0, aa, sub_lo)
        sub_hi = np.where(f > 0, aa, sub_hi)
        step = f / dlam(aa)
        trial = aa - step
        outside = ~((trial > sub_lo) & (trial < sub_hi))
        trial = np.where(outside, 0.5 * (sub_lo + sub_hi), trial)
        done = (f == 0) | (np.abs(trial - aa) <= 4e-16 * np.maximum(1.0, np.abs(aa)))
        lo[active] = sub_lo
        hi[active] = sub_hi
        a[active] = np.where(f == 0, aa, trial)
        idx = np.flatnonzero(active)
        active[idx[done]] = False
    return a


def activation_inverse(model, mean):
    """Natural parameter whose activation equals ``mean``.

    ``mean`` must lie strictly inside the model's data range.
    """
    m = np.asarray(mean, dtype=float)
    if not np.all(np.isfinite(m)) or not np.all(model.range.contains_open(m)):
        raise RangeError(
            f"mean must lie strictly inside the {model.range.value} range for the {model.kind.value} prior"
        )
    kind = model.kind
    if kind is PriorKind.GAUSSIAN:
        out = m.copy()
    elif kind is PriorKind.EXPONENTIAL:
        out = 1.0 - 1.0 / m
    elif kind is PriorKind.CHISQ1:
        out = 0.5 * (1.0 - 1.0 / m)
    else:
        out = _newton_bisect(kind, np.atleast_1d(m)).reshape(m.shape)
    return _scalar_or_array(out, mean)


def _ted_log_z(a):
    """log((e^a - 1) / a), the TED log-normaliser."""
    out = np.empty_like(a)
    small = np.abs(a) < _TED_SERIES_CUT
    s = a[small]
    s2 = s * s
    out[small] = 0.5 * s + s2 * (1 / 24 + s2 * (-1 / 2880 + s2 * (1 / 181440 + s2 * (-1 / 9676800 + s2 / 479001600))))
    big = ~small
    ab = a[big]
    absb = np.abs(ab)
    out[big] = np.maximum(ab, 0.0) + np.log(-np.expm1(-absb)) - np.log(absb)
    return out


def _ted_entropy(a):
    out = np.empty_like(a)
    small = np.abs(a) < _TED_SERIES_CUT
    s2 = a[small] ** 2
    out[small] = s2 * (-1 / 24 + s2 * (1 / 960 + s2 * (-1 / 36288 + s2 * (1 / 1382400 - s2 / 53222400))))
    big = ~small
    out[big] = _ted_log_z(a[big]) - a[big] * _lam_ted(a[big])
    return out


# Log-normalisers up to additive constants.  Their gradients are the
# activations, which makes sum(log_z(W h)) - h.z a convex potential whose
# stationary point solves the inversion equations.
_LOG_PARTITION = {
    PriorKind.GAUSSIAN: lambda a: 0.5 * a * a,
    PriorKind.TRUNC_GAUSS: lambda a: 0.5 * a * a + log_ndtr(a),
    PriorKind.EXPONENTIAL: lambda a: -np.log1p(-a),
    PriorKind.CHISQ1: lambda a: -0.5 * np.log1p(-2.0 * a),
    PriorKind.TED: _ted_log_z,
}


def prior_entropy(model, alpha):
    """Differential entropy of the univariate prior at ``alpha``.

    Only the exponential and TED priors are supported.
    """
    arr = _checked(model, alpha)
    if model.kind is PriorKind.EXPONENTIAL:
        out = 1.0 - np.log1p(-arr)
    elif model.kind is PriorKind.TED:
        out = _ted_entropy(np.atleast_1d(arr)).reshape(arr.shape)
    else:
        raise UnsupportedModel(f"prior_entropy is not available for the {model.kind.value} prior")
    return _scalar_or_array(out, alpha)


def entropy_measures(x):
    """Discrete, spectral and exponential-prior entropies of a positive vector.

    ``h_ds = -sum(x log x)`` is evaluated on ``x`` as given; it is a proper
    distribution entropy only when ``x`` sums to one, and no normalisation
    is applied here.
    """
    x = np.asarray(x, dtype=float).ravel()
    if x.size == 0 or not np.all(x > 0) or not np.all(np.isfinite(x)):
        raise RangeError("entropy measures require strictly positive finite values")
    logs = np.log(x)
    h_s = float(np.sum(logs))
    return EntropyReport(h_ds=float(-np.sum(x * logs)), h_s=h_s, h_e=float(np.sum(1.0 + logs)))
