import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coverml import kernels

from helpers import gini

needs_compiled = pytest.mark.skipif(
    "compiled" not in kernels.available_backends(),
    reason="compiled kernel extension not built",
)


def brute_gini(x, y):
    """Direct formula evaluation at every boundary of a sorted feature."""
    n = len(x)
    best = (float("nan"), float("-inf"))
    c1 = float(sum(y))
    g_parent = gini(n - c1, c1)
    for i in range(n - 1):
        if x[i] == x[i + 1]:
            continue
        nl = i + 1.0
        cl = float(sum(y[: i + 1]))
        dec = g_parent - (nl / n) * gini(nl - cl, cl) - ((n - nl) / n) * gini(
            (n - nl) - (c1 - cl), c1 - cl
        )
        if dec > best[1]:
            thr = 0.5 * (x[i] + x[i + 1])
            if thr == x[i + 1]:
                thr = x[i]
            best = (thr, dec)
    return best


def sorted_case(rng, n, tie_heavy):
    x = rng.random(n)
    if tie_heavy:
        x = np.round(x, 1)
    x = np.sort(x)
    y = rng.integers(0, 2, size=n).astype(np.float64)
    return x, y


def same_split(a, b):
    """Bitwise-equal splits; the no-split sentinel (nan, -inf) compares equal."""
    if np.isneginf(a[1]) and np.isneginf(b[1]):
        return np.isnan(a[0]) and np.isnan(b[0])
    return a == b


def test_constant_feature_has_no_split():
    x = np.full(5, 2.0)
    y = np.array([0.0, 1.0, 0.0, 1.0, 1.0])
    thr, dec = kernels.best_split_gini(x, y)
    assert dec == float("-inf") and np.isnan(thr)
    thr, dec = kernels.best_split_sse(x, y)
    assert dec == float("-inf") and np.isnan(thr)


def test_gini_matches_brute_force():
    rng = np.random.default_rng(0)
    for trial in range(200):
        x, y = sorted_case(rng, int(rng.integers(2, 40)), trial % 2 == 0)
        assert same_split(kernels.best_split_gini(x, y), brute_gini(x.tolist(), y.tolist()))


def test_sse_picks_variance_reducing_threshold():
    x = np.array([0.0, 1.0, 2.0, 3.0])
    y = np.array([5.0, 5.0, -5.0, -5.0])
    thr, dec = kernels.best_split_sse(x, y)
    assert thr == 1.5
    assert dec == pytest.approx(25.0)


def test_use_backend_restores():
    before = kernels.backend_name()
    with kernels.use_backend("python"):
        assert kernels.backend_name() == "python"
    assert kernels.backend_name() == before


def test_unknown_backend():
    with pytest.raises(ValueError):
        kernels.get_backend("fortran")


@needs_compiled
class TestBackendParity:
    """Both backends must return bit-identical (threshold, decrease)."""

    def test_gini_parity_randomized(self):
        rng = np.random.default_rng(7)
        py = kernels.get_backend("python")
        cy = kernels.get_backend("compiled")
        for trial in range(300):
            x, y = sorted_case(rng, int(rng.integers(2, 120)), trial % 3 != 0)
            assert same_split(cy.best_split_gini(x, y), py.best_split_gini(x, y))

    def test_sse_parity_randomized(self):
        rng = np.random.default_rng(8)
        py = kernels.get_backend("python")
        cy = kernels.get_backend("compiled")
        for trial in range(300):
            x, _ = sorted_case(rng, int(rng.integers(2, 120)), trial % 3 != 0)
            y = rng.normal(size=x.shape[0])
            assert same_split(cy.best_split_sse(x, y), py.best_split_sse(x, y))

    @settings(max_examples=60, deadline=None)
    @given(data=st.data())
    def test_gini_parity_property(self, data):
        n = data.draw(st.integers(2, 40))
        xs = np.sort(np.array(data.draw(st.lists(st.integers(0, 6), min_size=n, max_size=n)), dtype=np.float64))
        ys = np.array(data.draw(st.lists(st.integers(0, 1), min_size=n, max_size=n)), dtype=np.float64)
        py = kernels.get_backend("python")
        cy = kernels.get_backend("compiled")
        assert same_split(cy.best_split_gini(xs, ys), py.best_split_gini(xs, ys))
