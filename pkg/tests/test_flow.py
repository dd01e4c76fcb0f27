import numpy as np
import pytest

from kalpha import flow
from kalpha.errors import ConvexityLoss, StepTooLarge
from kalpha.flow import FlowRun, ProfileState, circle_arc, profile_from_radius


def alpha1_profile(sol, n):
    s_lo, s_hi = sorted(float(x) for x in sol.s_of_r([1.3, 1.02]))
    return profile_from_radius(sol.profile(), n, (s_lo, s_hi))


def test_profile_state_validation():
    with pytest.raises(ValueError):
        ProfileState(np.ones(3), np.zeros(3))
    with pytest.raises(ValueError):
        ProfileState(np.array([1, 1, -1, 1, 1.0]), np.arange(5.0))


def test_zero_step_is_identity():
    st = circle_arc(1.0, 50)
    assert flow.step(st, 1.0, 0.0) is st


def test_zero_horizon_run():
    st = circle_arc(1.0, 50)
    res = flow.run(FlowRun(st, 1.0, 1e-3, 0.0))
    assert res.deviations == [0.0] and res.steps == 0


def test_flowrun_validation():
    st = circle_arc(1.0, 20)
    with pytest.raises(ValueError):
        FlowRun(st, 1.0, -1e-3, 1.0)
    with pytest.raises(ValueError):
        FlowRun(st, 1.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        FlowRun(st, 1.0, 1e-3, 0.1, snapshots=(0.2,))
    assert FlowRun(st, 1.0, 1e-3, 0.1, snapshots=(0.1, 0.0)).snapshots == (0.0, 0.1)


def test_sphere_curvature_of_arc():
    K = flow.gauss_curvature(circle_arc(2.0, 400))
    assert np.allclose(K[1:-1], 0.25, rtol=1e-4)


def test_explicit_step_bound():
    st = circle_arc(1.0, 100)
    bound = flow.stable_step_bound(st, 1.0)
    with pytest.raises(StepTooLarge):
        flow.step(st, 1.0, 2 * bound, scheme="explicit")
    out = flow.step(st, 1.0, 0.5 * bound, scheme="explicit")
    assert out.t == pytest.approx(0.5 * bound)


def test_node_reversal_raises():
    folded = ProfileState(np.array([1.0, 1.1, 1.2, 1.15, 1.3, 1.4]), np.arange(6.0) * 0.0 + [0, 0, 0, 0, 0.01, 0.02])
    with pytest.raises(StepTooLarge):
        flow._check_order(folded)
    flow._check_order(circle_arc(1.0, 10))


def test_saddle_profile_with_fractional_power():
    z = np.linspace(-0.5, 0.5, 40)
    neck = ProfileState(np.cosh(z), z)  # catenoid: K < 0
    with pytest.raises(ConvexityLoss):
        flow.step(neck, 0.5, 1e-4)
    flow.step(neck, 1.0, 1e-5)  # integer power is fine


def test_unknown_options():
    st = circle_arc(1.0, 20)
    with pytest.raises(ValueError):
        flow.step(st, 1.0, 1e-4, boundary="mirror")
    with pytest.raises(ValueError):
        flow.step(st, 1.0, 1e-4, scheme="leapfrog")


def test_renode_keeps_shape_and_ends():
    st = circle_arc(1.0, 60)
    psi = np.linspace(0.3, np.pi - 0.3, 60) ** 1.3 / (np.pi - 0.3) ** 0.3
    uneven = ProfileState(np.sin(psi), np.cos(psi))
    out = flow.renode(uneven)
    seg = np.diff(out.arclength())
    assert np.ptp(seg) < 1e-3 * seg.mean()
    assert np.allclose(out.points[[0, -1]], uneven.points[[0, -1]])
    assert np.allclose(np.hypot(out.rho, out.z), 1.0, atol=1e-6)
    assert flow.deviation(st, st) == 0.0


def test_translator_moves_rigidly(alpha1_surface):
    sol, _ = alpha1_surface
    res = flow.run(FlowRun(alpha1_profile(sol, 200), 1.0, 2e-4, 0.01, boundary="translate"))
    assert res.deviations[-1] < 5e-4


def test_sphere_negative_control():
    res = flow.run(FlowRun(circle_arc(1.0, 200), 1.0, 1e-4, 0.05, boundary="translate"))
    assert res.deviations[-1] > 5e-3


def test_sphere_law():
    slope, _ = flow.sphere_law_slope(n=150, dt=2e-4, horizon=0.06)
    assert slope == pytest.approx(-3.0, rel=0.02)


def test_rows_layout():
    res = flow.run(FlowRun(circle_arc(1.0, 20), 1.0, 1e-4, 2e-4, snapshots=(0.0, 2e-4)))
    rows = res.rows()
    assert len(rows) == 40 and rows[0][:2] == (0.0, 0) and rows[-1][:2] == (2e-4, 19)
