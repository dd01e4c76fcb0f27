import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kalpha.canal import RadiusProfile, build_canal, make_spine, surface_of_revolution, torus
from kalpha.errors import DegeneratePoint, NonFiniteDerivative
from kalpha.geometry import (GridSpec, SurfaceChart, curvature_field, curvature_sample,
                             grid_parameters, plane, sample_grid, sphere, unit_normal)

from conftest import graph_chart, random_graph_coeffs
from oracles import graph_chart_sympy, symbolic_curvatures


def test_gridspec_parse_and_validation():
    assert GridSpec.parse("12x7") == GridSpec(12, 7)
    with pytest.raises(ValueError):
        GridSpec(1, 5)
    with pytest.raises(ValueError):
        GridSpec.parse("12by7")


def test_sphere_normal_is_radial():
    U = unit_normal(sphere(1.0), 0.0, 0.0)
    assert np.allclose(np.abs(U), [1.0, 0.0, 0.0])


def test_plane_normal():
    assert np.allclose(np.abs(unit_normal(plane(), 0.2, -0.3)), [0, 0, 1])


def test_flip_reverses_normal():
    assert np.allclose(unit_normal(sphere(), 0.1, 0.2, flip=True), -unit_normal(sphere(), 0.1, 0.2))


@pytest.mark.parametrize("r", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("mode,tol", [("analytic", 1e-12), ("fd", 1e-6), ("semi", 1e-6)])
def test_sphere_curvatures(r, mode, tol):
    smp = curvature_sample(sphere(r), 0.3, 1.1, mode=mode)
    assert smp.K == pytest.approx(1 / r ** 2, rel=tol)
    assert abs(smp.H) == pytest.approx(1 / r, rel=tol)
    assert smp.k1 * smp.k2 == pytest.approx(smp.K, rel=1e-12)


def test_plane_curvatures_vanish():
    smp = curvature_sample(plane(), 0.1, 0.2)
    assert smp.K == 0 and smp.H == 0


def test_flip_negates_mean_curvature_only():
    a = curvature_sample(sphere(2.0), 0.2, 0.4)
    b = curvature_sample(sphere(2.0), 0.2, 0.4, flip=True)
    assert b.K == pytest.approx(a.K) and b.H == pytest.approx(-a.H)
    assert (b.k1, b.k2) == pytest.approx((-a.k2, -a.k1))


def test_sample_grid_sphere_4x4():
    samples = sample_grid(sphere(2.0), GridSpec(4, 4))
    assert len(samples) == 16
    assert all(abs(x.K - 0.25) < 1e-10 for x in samples)


def test_sample_grid_flags_parabolic_tube_points():
    surf = torus(3.0, 1.0)
    samples = sample_grid(surf.chart, GridSpec(3, 4))
    flagged = [x for x in samples if x.parabolic]
    assert len(flagged) == 6  # theta = pi/2 and 3pi/2 on each of the three rings
    assert all(abs(x.theta - np.pi / 2) < 1e-12 or abs(x.theta - 3 * np.pi / 2) < 1e-12 for x in flagged)


def test_degenerate_row_where_radius_slope_reaches_one():
    # r' = -s reaches -1 at s = 1 (sin(phi) = 0 on that ring)
    prof = RadiusProfile.from_functions(lambda s: 1 - s ** 2 / 2, lambda s: -s, lambda s: -np.ones_like(s),
                                        lambda s: np.zeros_like(s), interval=(0.0, 1.0))
    surf = surface_of_revolution(prof)
    samples = sample_grid(surf.chart, GridSpec(5, 4))
    deg = [x.s for x in samples if x.degenerate]
    assert deg and all(abs(s - 1.0) < 1e-12 for s in deg)
    with pytest.raises(DegeneratePoint):
        unit_normal(surf.chart, 1.0, 0.3)


def test_nonfinite_derivative_raises():
    def X(s, t):
        return np.column_stack((s, t, np.where(s > 0.9, np.nan, s * t)))

    ch = SurfaceChart(X, ((0.0, 1.0), (0.0, 1.0)))
    with pytest.raises(NonFiniteDerivative):
        curvature_sample(ch, 0.9, 0.5, mode="fd")


def test_matches_symbolic_oracle_on_random_graphs():
    rng = np.random.default_rng(11)
    for _ in range(3):
        co = random_graph_coeffs(rng)
        ch = graph_chart(co)
        ev = symbolic_curvatures(graph_chart_sympy(co))
        s, t = rng.uniform(-0.45, 0.45, (2, 10))
        for mode, tol in (("analytic", 1e-12), ("fd", 1e-7)):
            f = curvature_field(ch, s, t, mode=mode)
            for i in range(10):
                K, H, U = ev(s[i], t[i])
                assert f.K[i] == pytest.approx(K, abs=tol)
                assert f.H[i] == pytest.approx(H, abs=tol)
                assert np.allclose(f.U[i], U, atol=1e-10)


def test_one_sided_stencils_at_domain_edge():
    ch = sphere(1.0)
    (lo, hi), _ = ch.domain
    smp = curvature_sample(ch, hi, 0.0, mode="fd")
    assert smp.K == pytest.approx(1.0, rel=1e-4)


coords = st.floats(min_value=-0.45, max_value=0.45)


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=2 ** 31), coords, coords)
def test_finite_difference_partials_match_analytic(seed, s, t):
    ch = graph_chart(random_graph_coeffs(np.random.default_rng(seed)))
    a = ch.partials([s], [t], mode="analytic")
    b = ch.partials([s], [t], mode="fd")
    for x, y in zip(a[1:3], b[1:3]):
        assert np.linalg.norm(x - y) <= 1e-4 * max(1.0, np.linalg.norm(x))


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=2 ** 31), coords, coords)
def test_sample_invariants(seed, s, t):
    ch = graph_chart(random_graph_coeffs(np.random.default_rng(seed)))
    x = curvature_sample(ch, s, t)
    assert np.linalg.norm(x.U) == pytest.approx(1.0, abs=1e-12)
    assert abs(x.U @ x.X_s) <= 1e-8 and abs(x.U @ x.X_theta) <= 1e-8
    assert x.E * x.G - x.F ** 2 > 0
    assert x.k1 * x.k2 - x.K == pytest.approx(0.0, abs=1e-12 * max(1, abs(x.K)))
    assert (x.k1 + x.k2) / 2 - x.H == pytest.approx(0.0, abs=1e-12 * max(1, abs(x.H)))
    assert x.H ** 2 >= x.K - 1e-9
    ev = np.sort(np.linalg.eigvals(x.shape_operator()).real)
    assert np.allclose(ev, sorted([x.k2, x.k1]), atol=1e-6)


def test_grid_parameters_skip_periodic_endpoint():
    S, T = grid_parameters(sphere(), GridSpec(3, 4))
    assert S.shape == (3, 4)
    assert np.allclose(T[0], [0, np.pi / 2, np.pi, 3 * np.pi / 2])


def test_helix_tube_semi_and_fd_modes_agree():
    surf = build_canal(make_spine("helix", a=2.0, b=0.5), RadiusProfile.constant(0.4))
    s = np.array([1.0, 3.0]); t = np.array([0.5, 2.5])
    a = curvature_field(surf.chart, s, t, mode="analytic")
    b = curvature_field(surf.chart, s, t, mode="fd")
    c = curvature_field(surf.chart, s, t, mode="semi")
    assert np.allclose(a.K, b.K, atol=1e-6) and np.allclose(a.K, c.K, atol=1e-8)
    assert np.allclose(a.H, b.H, atol=1e-6) and np.allclose(a.H, c.H, atol=1e-8)
