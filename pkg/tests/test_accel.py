import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kalpha import _accel


def test_fd_weights_central_second_derivative():
    w = _accel.fd_weights(0.0, [-1.0, 0.0, 1.0], 2)
    assert np.allclose(w[2], [1.0, -2.0, 1.0])
    assert np.allclose(w[1], [-0.5, 0.0, 0.5])


def test_fd_weights_exact_on_polynomials():
    nodes = np.array([0.0, 0.3, 0.7, 1.2, 2.0])
    w = _accel.fd_weights(0.5, nodes, 2)
    f = 1 + 2 * nodes - nodes ** 2 + 0.5 * nodes ** 3
    assert w[1] @ f == pytest.approx(2 - 2 * 0.5 + 1.5 * 0.25, abs=1e-12)
    assert w[2] @ f == pytest.approx(-2 + 3 * 0.5, abs=1e-11)


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=1, max_value=50), st.integers(min_value=0, max_value=2 ** 31))
def test_shape_kernels_agree(n, seed):
    rng = np.random.default_rng(seed)
    parts = [rng.normal(size=(n, 3)) for _ in range(5)]
    a = _accel.shape_from_partials_numpy(*parts, 1e-9)
    b = _accel.shape_from_partials_numba(*parts, 1e-9)
    for x, y in zip(a, b):
        assert np.allclose(x, y, rtol=1e-9, atol=1e-12, equal_nan=True)


def test_shape_kernel_flags_degenerate_rows():
    Xs = np.array([[1.0, 0, 0], [1.0, 0, 0]])
    Xt = np.array([[0, 1.0, 0], [2.0, 0, 0]])
    z = np.zeros((2, 3))
    for fn in (_accel.shape_from_partials_numpy, _accel.shape_from_partials_numba):
        U, forms, curv, nrm = fn(Xs, Xt, z, z, z, 1e-9)
        assert np.all(np.isfinite(curv[0])) and np.all(np.isnan(curv[1]))
        assert nrm[1] == 0.0


@settings(max_examples=20, deadline=None)
@given(st.integers(min_value=0, max_value=2 ** 31))
def test_polyline_kernels_agree(seed):
    rng = np.random.default_rng(seed)
    pts = rng.normal(size=(40, 2))
    poly = np.cumsum(rng.normal(size=(30, 2)), axis=0)
    assert np.allclose(_accel.polyline_distance_numpy(pts, poly),
                       _accel.polyline_distance_numba(pts, poly), atol=1e-12)


def test_polyline_distance_simple():
    poly = np.array([[0.0, 0.0], [1.0, 0.0]])
    pts = np.array([[0.5, 2.0], [2.0, 0.0], [-1.0, -1.0]])
    assert np.allclose(_accel.polyline_distance(pts, poly), [2.0, 1.0, np.sqrt(2.0)])


def test_curve_stencils_agree_and_are_exact_for_quadratics():
    rng = np.random.default_rng(3)
    sigma = np.cumsum(rng.uniform(0.5, 1.5, 30))
    a = _accel.curve_stencils_numpy(sigma)
    b = _accel.curve_stencils_numba(sigma)
    for x, y in zip(a, b):
        assert np.allclose(x, y)
    cols, d1, d2 = a
    f = 3 - sigma + 0.25 * sigma ** 2
    assert np.allclose(np.einsum("nk,nk->n", d1, f[cols]), -1 + 0.5 * sigma)
    assert np.allclose(np.einsum("nk,nk->n", d2, f[cols]), 0.5)


@pytest.mark.parametrize("flag,expected", [("1", "numpy"), ("0", "numba")])
def test_env_flag_selects_backend(flag, expected):
    env = dict(os.environ, KALPHA_NO_NUMBA=flag)
    out = subprocess.run([sys.executable, "-c", "import kalpha; print(kalpha.backend())"],
                         capture_output=True, text=True, env=env, check=True)
    want = expected if (_accel.HAVE_NUMBA or expected == "numpy") else "numpy"
    assert out.stdout.strip() == want
