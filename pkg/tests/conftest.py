import numpy as np
import pytest

from kalpha.canal import RadiusProfile, build_canal, make_spine
from kalpha.geometry import SurfaceChart

ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[key])


def graph_chart(coeffs, extent=0.5):
    """(s, t) -> (s, t, p(s, t)) with analytic partials, p = sum c_ij s^i t^j."""
    items = list(coeffs.items())

    def p(s, t, ds=0, dt=0):
        out = np.zeros_like(s)
        for (i, j), c in items:
            if i < ds or j < dt:
                continue
            fi = np.prod(np.arange(i - ds + 1, i + 1)) if ds else 1
            fj = np.prod(np.arange(j - dt + 1, j + 1)) if dt else 1
            out = out + c * fi * fj * s ** (i - ds) * t ** (j - dt)
        return out

    def X(s, t):
        return np.column_stack((s, t, p(s, t)))

    def first(s, t):
        o, z = np.ones_like(s), np.zeros_like(s)
        return np.column_stack((o, z, p(s, t, 1, 0))), np.column_stack((z, o, p(s, t, 0, 1)))

    def second(s, t):
        z = np.zeros_like(s)
        return (np.column_stack((z, z, p(s, t, 2, 0))), np.column_stack((z, z, p(s, t, 1, 1))),
                np.column_stack((z, z, p(s, t, 0, 2))))

    return SurfaceChart(X, ((-extent, extent), (-extent, extent)), first, second, name="graph")


def random_graph_coeffs(rng):
    return {(2, 0): rng.uniform(-1, 1), (1, 1): rng.uniform(-1, 1), (0, 2): rng.uniform(-1, 1),
            (3, 0): rng.uniform(-0.5, 0.5), (1, 2): rng.uniform(-0.5, 0.5), (2, 2): rng.uniform(-0.3, 0.3),
            (1, 0): rng.uniform(-0.5, 0.5)}


def random_canal(rng, kind=None):
    """Canal surface on a random helix or general space curve with a wavy radius."""
    kind = kind or rng.choice(["helix", "curve"])
    if kind == "helix":
        spine = make_spine("helix", a=rng.uniform(1.0, 3.0), b=rng.uniform(-1.0, 1.0), turns=1.0)
    else:
        a, b = rng.uniform(1.5, 2.5), rng.uniform(0.2, 0.6)

        def c(t):
            return np.column_stack((a * np.cos(t), b * np.sin(2 * t) + np.sin(t), 0.5 * t))

        spine = make_spine("curve", func=c, t_range=(0.0, 4.0))
    lo, hi = spine.s_range
    hi = min(hi, lo + 4.0)
    r0 = rng.uniform(0.15, 0.3)
    amp = rng.uniform(0.02, 0.08)
    om = rng.uniform(1.0, 3.0)
    ph = rng.uniform(0, 2 * np.pi)
    prof = RadiusProfile.from_functions(
        lambda s: r0 + amp * np.sin(om * s + ph),
        lambda s: amp * om * np.cos(om * s + ph),
        lambda s: -amp * om ** 2 * np.sin(om * s + ph),
        lambda s: -amp * om ** 3 * np.cos(om * s + ph),
        interval=(lo, hi))
    return build_canal(spine, prof)


@pytest.fixture(scope="session")
def alpha1_surface():
    from kalpha.witnesses import alpha1_translator
    return alpha1_translator()


@pytest.fixture(scope="session")
def alpha_neg_half_surface():
    from kalpha.witnesses import alpha_neg_half_translator
    return alpha_neg_half_translator()
