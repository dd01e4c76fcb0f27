import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from kalpha import offset as off
from kalpha.errors import DegenerateCoefficients, OffsetSingularity
from kalpha.geometry import GridSpec, curvature_field, curvature_sample, grid_parameters, sphere

from conftest import graph_chart, random_graph_coeffs
from oracles import parallel_K_H


def test_sphere_offset_is_a_smaller_sphere():
    # the sphere chart's normal points inward
    par = off.build_parallel(sphere(2.0), 1.0)
    smp = curvature_sample(par.chart, 0.3, 0.4)
    assert smp.K == pytest.approx(1.0, rel=1e-8)
    assert np.linalg.norm(smp.position) == pytest.approx(1.0, abs=1e-14)


def test_parallel_curvatures_scalar_and_focal():
    Kb, Hb, eps = off.parallel_curvatures(1.0, 1.0, 0.5)
    assert (Kb, Hb, eps) == (4.0, 2.0, 1)
    with pytest.raises(OffsetSingularity):
        off.parallel_curvatures(1.0, 1.0, 1.0)


def test_zero_offset_rejected():
    with pytest.raises(ValueError):
        off.build_parallel(sphere(), 0.0)


def test_check_grid_detects_focal_sheet():
    with pytest.raises(OffsetSingularity):
        off.build_parallel(sphere(1.0), 1.0, check_grid=GridSpec(4, 4))


def test_offset_engine_matches_principal_curvature_route():
    rng = np.random.default_rng(5)
    ch = graph_chart(random_graph_coeffs(rng))
    s, t = rng.uniform(-0.4, 0.4, (2, 30))
    base = curvature_field(ch, s, t)
    lam = 0.15
    par = off.build_parallel(ch, lam)
    f = curvature_field(par.chart, s, t)
    for i in range(30):
        K_o, H_o = parallel_K_H(base.K[i], base.H[i], lam)
        eps = np.sign(off._focal_factor(base.K[i], base.H[i], lam))
        assert f.K[i] == pytest.approx(K_o, rel=1e-6, abs=1e-9)
        assert f.H[i] == pytest.approx(eps * H_o, rel=1e-6, abs=1e-9)


def test_epsilon_flips_past_the_focal_point():
    ch = graph_chart({(2, 0): 0.5})  # k1 = 1 at the origin, k2 = 0
    s = np.array([0.0]); t0 = np.array([0.0])
    assert off.build_parallel(ch, 0.5).epsilon((s, t0))[0][0] == 1
    eps, const = off.build_parallel(ch, 2.0).epsilon((s, t0))
    assert eps[0] == -1 and const


@pytest.mark.parametrize("lam", [0.5, 2.0, -0.7])
def test_offset_normal_is_eps_times_base_normal(lam):
    ch = graph_chart({(2, 0): 0.5, (0, 2): 0.1})
    par = off.build_parallel(ch, lam)
    D = par.focal_factor(np.array([0.1]), np.array([0.2]))[0]
    Ub = curvature_sample(par.chart, 0.1, 0.2).U
    U = curvature_sample(ch, 0.1, 0.2).U
    assert Ub @ U == pytest.approx(np.sign(D), abs=1e-9)


def test_same_speed_sphere_at_twice_radius():
    S, T = grid_parameters(sphere(1.5), GridSpec(8, 8))
    f = curvature_field(sphere(1.5), S, T)
    v = off.check_same_speed_conditions(f.K, f.H, 3.0, 1.0)
    assert v.case_i and v.holds == "i" and v.dual_i_residual < 1e-12


def test_second_condition_needs_odd_alpha():
    lam = 0.8
    K = np.linspace(-1, 1, 11)
    H = (lam * lam * K + 2) / (2 * lam)
    assert off.check_same_speed_conditions(K, H, lam, 3).case_ii
    assert not off.check_same_speed_conditions(K, H, lam, 2).case_ii
    assert not off.check_same_speed_conditions(K, H, lam, 0.5).case_ii


def test_lambda_scan_finds_the_right_offset():
    S, T = grid_parameters(sphere(2.0), GridSpec(6, 6))
    f = curvature_field(sphere(2.0), S, T)
    scan = off.lambda_scan(f.K, f.H, 1.0)
    assert len(scan.lams) == 10001
    assert np.allclose(scan.passing, [4.0])


def test_half_offset_checks():
    lam = 1.2
    K = np.linspace(-2, 2, 9)
    v = off.half_offset_checks(K, lam * K / 2, lam)
    assert v.minimal_ok and not v.constant_K_ok
    K = K[K != 0]  # the lam/2 offset is focal where K = 0
    v = off.half_offset_checks(K, (lam * lam * K + 2) / (2 * lam), lam)
    assert v.constant_K_ok


def test_weingarten_coeffs():
    assert off.WeingartenCoeffs.from_normalized(2.0, 3.0).as_tuple() == (2.0, 1.5, -1.0)
    with pytest.raises(DegenerateCoefficients):
        off.WeingartenCoeffs(0, 0, 0)
    with pytest.raises(DegenerateCoefficients):
        off.scaled_speed_translator(off.WeingartenCoeffs(1.0, 0.0, 1.0), 1.0)
    with pytest.raises(DegenerateCoefficients):
        off.scaled_speed_translator(off.WeingartenCoeffs(1.0, 1.0, 1.0), 1.0)


def test_scaled_speed_on_unit_sphere():
    S, T = grid_parameters(sphere(1.0), GridSpec(5, 5))
    f = curvature_field(sphere(1.0), S, T)
    sc = off.scaled_speed_translator(off.WeingartenCoeffs(1.0, 1.0, -3.0), 1.0, f.K, f.H)
    assert sc.lam == -1.0 and sc.mu == pytest.approx(0.25)
    assert sc.max_dev < 1e-12


finite = st.floats(min_value=-2, max_value=2)


@settings(max_examples=200, deadline=None)
@given(finite, finite, finite, finite, finite)
def test_transfer_preserves_linear_relation(a, b, c, lam, K):
    assume(abs(b) > 1e-2)
    H = -(a * K + c) / (2 * b)
    assume(abs(off._focal_factor(K, H, lam)) > 1e-2)
    Kb, Hb, _ = off.parallel_curvatures(K, H, lam)
    t = off.weingarten_transfer(off.WeingartenCoeffs(a, b, c), lam)
    assert abs(t.residual(Kb, Hb)) <= 1e-10 * max(1.0, abs(Kb), abs(Hb)) * 10


@settings(max_examples=200, deadline=None)
@given(finite, finite, st.floats(min_value=-1, max_value=1))
def test_offset_involution(k1, k2, lam):
    K, H = k1 * k2, (k1 + k2) / 2
    D = off._focal_factor(K, H, lam)
    assume(D > 1e-2)
    Kb, Hb, eps = off.parallel_curvatures(K, H, lam)
    assert eps == 1
    K2, H2, _ = off.parallel_curvatures(Kb, Hb, -lam)
    assert K2 == pytest.approx(K, abs=1e-8 * max(1, abs(K)) / D ** 2)
    assert H2 == pytest.approx(H, abs=1e-8 * max(1, abs(H)) / D ** 2)


@settings(max_examples=200, deadline=None)
@given(finite, finite, st.floats(min_value=-1, max_value=1))
def test_formula_matches_principal_route(k1, k2, lam):
    K, H = k1 * k2, (k1 + k2) / 2
    assume(abs(1 - lam * k1) > 0.05 and abs(1 - lam * k2) > 0.05)
    Kb, Hb, _ = off.parallel_curvatures(K, H, lam)
    Ko, Ho = parallel_K_H(K, H, lam)
    assert Kb == pytest.approx(Ko, rel=1e-9, abs=1e-9)
    assert Hb == pytest.approx(Ho, rel=1e-9, abs=1e-9)
