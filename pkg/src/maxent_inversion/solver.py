"""Maximum-entropy feature inversion.

Given features ``z = W.T @ x`` and a prior per element of ``x``, find the
natural coordinates ``h`` solving ``W.T @ lam(W @ h) = z`` and return the
reconstruction ``x_bar = lam(W @ h)``.  ``lam`` is the element-wise prior
activation, so ``x_bar`` always lies inside each element's data range.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import math
import warnings

import numpy as np
import scipy.linalg

from .errors import (
    DomainError,
    InfeasibleSuspected,
    MaxIterationsWarning,
    NumericalError,
    RangeError,
    ShapeError,
)
from .linmap import LinearMap, nullspace_basis, ones_in_colspace
from .priors import _KERNELS, _LOG_PARTITION, ElementModel, PriorKind, activation_inverse

__all__ = [
    "InversionProblem",
    "SolveOptions",
    "SolveResult",
    "StationarityReport",
    "residual",
    "jacobian",
    "solve",
    "solve_gaussian",
    "solve_many",
    "check_stationarity",
]


def _as_models(models, n):
    if isinstance(models, (ElementModel, PriorKind, str)):
        model = models if isinstance(models, ElementModel) else ElementModel.of(models)
        return (model,) * n
    out = tuple(m if isinstance(m, ElementModel) else ElementModel.of(m) for m in models)
    return out


@dataclass(frozen=True, eq=False)
class InversionProblem:
    """A feature map, one prior per input element, and observed features.

    ``models`` may be a single model (or kind name) applied to every
    element, or a sequence of length ``N``.
    """

    map: LinearMap
    models: tuple
    z: np.ndarray

    def __post_init__(self):
        n = self.map.n
        models = _as_models(self.models, n)
        if len(models) != n:
            raise ShapeError(f"expected {n} element models, got {len(models)}")
        z = np.array(self.z, dtype=float).ravel()
        if z.size != self.map.m_feat:
            raise ShapeError(f"z has length {z.size}, W has {self.map.m_feat} columns")
        if not np.all(np.isfinite(z)):
            raise ShapeError("z contains non-finite entries")
        z.setflags(write=False)
        object.__setattr__(self, "models", models)
        object.__setattr__(self, "z", z)

        groups = {}
        for i, model in enumerate(models):
            groups.setdefault(model.kind, []).append(i)
        object.__setattr__(self, "_groups", {k: np.asarray(v) for k, v in groups.items()})

        if self.homogeneous_kind is PriorKind.EXPONENTIAL and not ones_in_colspace(self.map):
            raise ValueError(
                "homogeneous exponential problems need the all-ones vector in the column space of W"
            )

    @property
    def homogeneous_kind(self):
        return next(iter(self._groups)) if len(self._groups) == 1 else None

    def alpha_limits(self):
        """Per-element exclusive upper bound of the activation domain."""
        out = np.empty(self.map.n)
        for kind, idx in self._groups.items():
            out[idx] = ElementModel.of(kind).alpha_max
        return out

    def activations(self, alpha):
        """Element-wise activation and its derivative at ``alpha``."""
        alpha = np.asarray(alpha, dtype=float)
        limits = self.alpha_limits()
        bad = ~(np.isfinite(alpha) & (alpha < limits))
        if bad.any():
            i = int(np.flatnonzero(bad)[0])
            raise DomainError(
                f"element {i}: alpha={alpha[i]!r} outside the {self.models[i].kind.value} "
                f"activation domain",
                index=i,
            )
        kind = self.homogeneous_kind
        if kind is not None:
            lam, dlam = _KERNELS[kind]
            return lam(alpha), dlam(alpha)
        lam_out = np.empty_like(alpha)
        dlam_out = np.empty_like(alpha)
        for kind, idx in self._groups.items():
            lam, dlam = _KERNELS[kind]
            lam_out[idx] = lam(alpha[idx])
            dlam_out[idx] = dlam(alpha[idx])
        return lam_out, dlam_out

    def range_bounds(self):
        lo = np.empty(self.map.n)
        hi = np.empty(self.map.n)
        for kind, idx in self._groups.items():
            lo[idx], hi[idx] = ElementModel.of(kind).range.bounds
        return lo, hi

    def separates(self, v):
        """Whether direction ``v`` certifies that no interior ``x`` gives ``z``.

        True when ``v.z`` is at least the supremum of ``(W v).x`` over the
        data ranges, i.e. ``z`` lies on or beyond a supporting hyperplane of
        the attainable feature set.
        """
        g = self.map.w @ np.asarray(v, dtype=float)
        lo, hi = self.range_bounds()
        with np.errstate(invalid="ignore"):
            support = np.sum(np.where(g > 0, g * hi, np.where(g < 0, g * lo, 0.0)))
        if not np.isfinite(support) or not np.any(g):
            return False
        return float(np.dot(v, self.z)) >= support

    def potential(self, alpha):
        """Sum of element log-normalisers at in-domain ``alpha``."""
        kind = self.homogeneous_kind
        if kind is not None:
            return float(np.sum(_LOG_PARTITION[kind](alpha)))
        return float(sum(np.sum(_LOG_PARTITION[k](alpha[idx])) for k, idx in self._groups.items()))


@dataclass(frozen=True)
class SolveOptions:
    tol: float = 1e-10
    max_iter: int = 200
    backtrack: float = 0.5
    min_step: float = 1e-12
    h_limit: float = 1e8

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if not 0 < self.backtrack < 1:
            raise ValueError("backtrack must lie in (0, 1)")


@dataclass
class SolveResult:
    h: np.ndarray
    x_bar: np.ndarray
    residual_inf: float
    iterations: int
    trace: list = field(default_factory=list)
    converged: bool = True
    status: str = "converged"


@dataclass(frozen=True)
class StationarityReport:
    der0_residual: float | None = None
    der1um_residual: float | None = None


def residual(problem, h):
    """``W.T @ lam(W @ h) - z``."""
    w = problem.map.w
    lam, _ = problem.activations(w @ np.asarray(h, dtype=float))
    return w.T @ lam - problem.z


def jacobian(problem, h):
    """``W.T @ diag(lam'(W @ h)) @ W``; symmetric positive definite."""
    w = problem.map.w
    _, dlam = problem.activations(w @ np.asarray(h, dtype=float))
    return w.T @ (dlam[:, None] * w)


def solve_gaussian(lmap, z):
    """Closed-form least-squares reconstruction ``W (W^T W)^-1 z``."""
    w = lmap.w
    z = np.asarray(z, dtype=float).ravel()
    if z.size != lmap.m_feat:
        raise ShapeError(f"z has length {z.size}, W has {lmap.m_feat} columns")
    gram = w.T @ w
    cond = np.linalg.cond(gram)
    if not cond <= 1e12:
        raise NumericalError(f"W^T W is ill-conditioned (condition number {cond:.3g})")
    h = scipy.linalg.cho_solve(scipy.linalg.cho_factor(gram), z)
    x_bar = w @ h
    res = float(np.max(np.abs(w.T @ x_bar - z)))
    return SolveResult(h=h, x_bar=x_bar, residual_inf=res, iterations=0, trace=[res])


def solve(problem, opts=None):
    """Damped Newton solve of ``W.T @ lam(W @ h) = z`` starting from ``h = 0``.

    The equations are the stationarity conditions of the convex potential
    ``sum(log_z(W h)) - h.z``.  Steps are halved until the trial point is
    inside every element's activation domain and the potential shows an
    Armijo decrease; once the predicted decrease falls below the rounding
    level of the potential, ``||F||_2`` decrease is required instead.

    ``h`` and ``W h`` are accumulated in extended precision: near the
    boundary of the feasible set ``|h|`` grows very large while ``W h``
    stays moderate, and double precision would leave a residual floor.

    Returns a result with ``converged=False`` (and a warning) when
    ``max_iter`` is exhausted or the line search stalls.  Raises
    ``InfeasibleSuspected`` once ``|h|`` exceeds ``h_limit`` and the
    direction of ``h`` (or of the Newton step) separates ``z`` from the
    attainable feature set.  Large ``|h|`` alone is not an error: features
    of images with large exactly-zero regions need ``|h|`` near 1e9.
    """
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        return _solve(problem, opts)


def _solve(problem, opts):
    opts = opts or SolveOptions()
    w = problem.map.w
    w_ext = w.astype(np.longdouble)
    z = problem.z
    z_ext = z.astype(np.longdouble)
    target = opts.tol * max(1.0, float(np.max(np.abs(z))))
    eps = np.finfo(float).eps

    def evaluate(h):
        alpha = (w_ext @ h).astype(float)
        lam, dlam = problem.activations(alpha)
        f = w.T @ lam - z
        pot = problem.potential(alpha) - float(h @ z_ext)
        return lam, dlam, f, pot

    h = np.zeros(problem.map.m_feat, dtype=np.longdouble)
    lam, dlam, f, pot = evaluate(h)
    fnorm = float(np.linalg.norm(f))
    trace = [float(np.max(np.abs(f)))]

    def result(iterations, converged, status):
        return SolveResult(
            h=h.astype(float),
            x_bar=lam,
            residual_inf=trace[-1],
            iterations=iterations,
            trace=trace,
            converged=converged,
            status=status,
        )

    def diverged(direction=None):
        h_float = h.astype(float)
        if not np.linalg.norm(h_float) > opts.h_limit:
            return False
        candidates = [h_float] if direction is None else [h_float, direction]
        return any(problem.separates(v) for v in candidates)

    for it in range(opts.max_iter + 1):
        if trace[-1] <= target:
            return result(it, True, "converged")
        if it == opts.max_iter:
            break

        jac = w.T @ (dlam[:, None] * w)
        scale = 1.0 / np.sqrt(np.diag(jac))
        try:
            factor = scipy.linalg.cho_factor(scale[:, None] * jac * scale[None, :])
        except (np.linalg.LinAlgError, ValueError) as exc:
            if diverged():
                raise InfeasibleSuspected(
                    "Jacobian lost positive definiteness while |h| grew; z is likely unattainable",
                    result(it, False, "infeasible"),
                ) from exc
            raise NumericalError(f"Newton system is not positive definite: {exc}") from exc
        step = -scale * scipy.linalg.cho_solve(factor, scale * f)
        slope = float(f @ step)
        step_ext = step.astype(np.longdouble)

        t = 1.0
        accepted = False
        while t >= opts.min_step:
            h_try = h + t * step_ext
            try:
                lam_try, dlam_try, f_try, pot_try = evaluate(h_try)
            except DomainError:
                t *= opts.backtrack
                continue
            norm_try = float(np.linalg.norm(f_try))
            if -t * slope <= 64 * eps * max(1.0, abs(pot)):
                ok = norm_try <= (1.0 - 1e-4 * t) * fnorm
            else:
                ok = pot_try <= pot + 1e-4 * t * slope
            if ok:
                accepted = True
                break
            t *= opts.backtrack

        if not accepted:
            if diverged(step) or np.linalg.norm(h.astype(float)) > 1e150:
                raise InfeasibleSuspected(
                    "line search stalled with |h| large; z is likely unattainable",
                    result(it, False, "infeasible"),
                )
            warnings.warn(
                f"line search stalled at residual {trace[-1]:.3g} after {it} iterations",
                MaxIterationsWarning,
                stacklevel=3,
            )
            return result(it, False, "stalled")

        h, lam, dlam, f, fnorm, pot = h_try, lam_try, dlam_try, f_try, norm_try, pot_try
        trace.append(float(np.max(np.abs(f))))
        if diverged(step):
            raise InfeasibleSuspected(
                f"|h| exceeded {opts.h_limit:g} along a separating direction; "
                "z has no preimage inside the data range",
                result(it + 1, False, "infeasible"),
            )

    warnings.warn(
        f"no convergence in {opts.max_iter} iterations (residual {trace[-1]:.3g})",
        MaxIterationsWarning,
        stacklevel=3,
    )
    return result(opts.max_iter, False, "max_iterations")


def solve_many(problems, opts=None, max_workers=None):
    """Solve independent problems concurrently; results keep input order."""
    problems = list(problems)
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        return list(pool.map(lambda p: solve(p, opts), problems))


def check_stationarity(problem, result, basis=None):
    """Null-space optimality residuals of a solved problem.

    For homogeneous exponential problems ``1 / x_bar`` must be orthogonal
    to the null-space basis; for homogeneous TED problems the natural
    parameters recovered from ``x_bar`` must be.  Other problems get an
    empty report.
    """
    kind = problem.homogeneous_kind
    if kind not in (PriorKind.EXPONENTIAL, PriorKind.TED):
        return StationarityReport()
    x_bar = np.asarray(result.x_bar, dtype=float)
    model = problem.models[0]
    if not np.all(model.range.contains_open(x_bar)):
        raise RangeError("reconstruction touches the boundary of the data range")
    b = (basis if basis is not None else nullspace_basis(problem.map)).b
    if kind is PriorKind.EXPONENTIAL:
        inv = 1.0 / x_bar
        return StationarityReport(der0_residual=float(np.max(np.abs(b.T @ inv)) / np.linalg.norm(inv)))
    alpha = activation_inverse(model, x_bar)
    return StationarityReport(
        der1um_residual=float(np.max(np.abs(b.T @ alpha)) / max(1.0, float(np.linalg.norm(alpha))))
    )
