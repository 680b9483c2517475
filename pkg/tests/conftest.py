from pathlib import Path
import sys

import numpy as np
import pytest

from maxent_inversion import InversionProblem, PriorKind, dense_map

DATA_DIR = Path(__file__).parent / "data"
MNIST_FIXTURE = DATA_DIR / "mnist-digits-idx3-ubyte"

_DRAW = {
    PriorKind.GAUSSIAN: lambda rng, k: rng.standard_normal(k),
    PriorKind.TRUNC_GAUSS: lambda rng, k: np.abs(rng.standard_normal(k)) + 1e-3,
    PriorKind.EXPONENTIAL: lambda rng, k: rng.standard_exponential(k) + 1e-3,
    PriorKind.CHISQ1: lambda rng, k: rng.chisquare(1, k) + 1e-3,
    PriorKind.TED: lambda rng, k: rng.uniform(0.02, 0.98, k),
}


def draw_in_range(kinds, rng):
    """One in-range sample per element for the given kinds."""
    return np.array([_DRAW[k](rng, 1)[0] for k in kinds])


def random_problem(rng, kinds, n=30, m=5, ones_column=False):
    """Feasible problem with ``z = W.T x`` for an in-range random ``x``.

    ``kinds`` is a single kind or a length-``n`` sequence.
    """
    if isinstance(kinds, PriorKind):
        kinds = [kinds] * n
    w = rng.standard_normal((n, m))
    if ones_column:
        w[:, 0] = 1.0
    x = draw_in_range(kinds, rng)
    lmap = dense_map(w)
    return InversionProblem(lmap, kinds, lmap.features(x)), x


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    acceptance = sys.modules.get("test_acceptance")
    results = getattr(acceptance, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        terminalreporter.write_line(results[number])
