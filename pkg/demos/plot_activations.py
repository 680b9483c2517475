"""
Prior activations and their inverses
====================================

Each prior kind maps a natural parameter alpha to a mean.  The mean always
lands inside the data range of the prior, which is what keeps the
reconstructions in range later on.
"""

import numpy as np

from maxent_inversion import ElementModel, activation, activation_deriv, activation_inverse

alphas = np.array([-20.0, -3.0, -0.5, 0.0, 0.3, 0.45])

for name in ["gaussian", "tg", "exp", "chisq1", "ted"]:
    model = ElementModel.of(name)
    a = alphas[alphas < model.alpha_max]
    mean = activation(model, a)
    var = activation_deriv(model, a)
    print(f"{name:8s} range={model.range.value}")
    for ai, mi, vi in zip(a, mean, var):
        print(f"    alpha={ai:7.2f}  mean={mi:10.6f}  var={vi:10.6f}")

# TED means stay strictly in (0, 1) even for huge |alpha|
ted = ElementModel.of("ted")
print(activation(ted, np.array([-1e4, 1e4])))

# inverting is exact to rounding, including deep in the truncated-Gaussian tail
tg = ElementModel.of("tg")
a = np.array([-50.0, -7.0, 0.0, 4.0])
print(np.abs(activation_inverse(tg, activation(tg, a)) - a).max())
