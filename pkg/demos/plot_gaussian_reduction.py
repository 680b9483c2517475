"""
Gaussian priors give the pseudo-inverse
=======================================

With a Gaussian prior on every element the inversion is linear and the
Newton solver lands on W (W^T W)^-1 z after a single step.  Positive or
bounded priors give a different, range-respecting answer for the same
features.
"""

import numpy as np

from maxent_inversion import InversionProblem, dense_map, solve, solve_gaussian

rng = np.random.default_rng(0)
w = rng.standard_normal((12, 3))
w[:, 0] = 1.0
x = rng.random(12)
lmap = dense_map(w)
z = lmap.features(x)

newton = solve(InversionProblem(lmap, "gaussian", z))
closed = solve_gaussian(lmap, z)
print("iterations:", newton.iterations)
print("max difference from closed form:", np.abs(newton.x_bar - closed.x_bar).max())

# the pseudo-inverse can leave [0, 1]; the TED prior cannot
ted = solve(InversionProblem(lmap, "ted", z))
print("pinv range: [%.3f, %.3f]" % (closed.x_bar.min(), closed.x_bar.max()))
print("TED range:  [%.3f, %.3f]" % (ted.x_bar.min(), ted.x_bar.max()))
print("feature residuals:", closed.residual_inf, ted.residual_inf)
