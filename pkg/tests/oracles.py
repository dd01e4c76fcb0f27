"""Independent reference computations for the test-suite.

Nothing here calls the package's differentiation or curvature code: charts
are differentiated symbolically with sympy and integrals use mpmath.
"""
import mpmath as mp
import numpy as np
import sympy as sp

s_sym, t_sym = sp.symbols("s t", real=True)


def symbolic_curvatures(xyz):
    """Numeric function (s, t) -> (K, H, U) for a sympy chart [x, y, z].

    U = X_s x X_t / |.|, e = <X_ss, U>; same orientation as the package.
    """
    X = sp.Matrix(xyz)
    Xs, Xt = X.diff(s_sym), X.diff(t_sym)
    Xss, Xst, Xtt = Xs.diff(s_sym), Xs.diff(t_sym), Xt.diff(t_sym)
    E, F, G = Xs.dot(Xs), Xs.dot(Xt), Xt.dot(Xt)
    cr = Xs.cross(Xt)
    fn = sp.lambdify((s_sym, t_sym), [E, F, G, list(cr), list(Xss), list(Xst), list(Xtt)], "numpy")

    def evaluate(s, t):
        E_, F_, G_, c, a, b, d = fn(float(s), float(t))
        c = np.array(c, float)
        U = c / np.linalg.norm(c)
        e, f, g = np.dot(a, U), np.dot(b, U), np.dot(d, U)
        det = E_ * G_ - F_ * F_
        return (e * g - f * f) / det, (e * G_ - 2 * f * F_ + g * E_) / (2 * det), U

    return evaluate


def graph_chart_sympy(coeffs):
    """Sympy graph (s, t, p(s, t)) with p = sum c_ij s^i t^j."""
    p = sum(c * s_sym ** i * t_sym ** j for (i, j), c in coeffs.items())
    return [s_sym, t_sym, p]


def sphere_curvature(r):
    return 1.0 / r ** 2, 1.0 / r


def alpha1_s_closed(r):
    """r - sqrt(2) artanh(r / sqrt(2)) with mpmath."""
    return float(mp.mpf(r) - mp.sqrt(2) * mp.atanh(mp.mpf(r) / mp.sqrt(2)))


def alpha_neg_half_s_closed(r, sign=1):
    return float(sign / mp.sqrt(2) * mp.log(mp.mpf(r) + mp.sqrt(mp.mpf(r) ** 2 - mp.mpf(1) / 2)))


def quad_s(g, a, b):
    """High-precision integral of g from a to b."""
    with mp.workdps(30):
        return float(mp.quad(lambda x: g(x), [a, b]))


def torus_K(R, r, theta):
    """Gauss curvature of a torus; theta = 0 is the innermost circle (towards the axis)."""
    return -np.cos(theta) / (r * (R - r * np.cos(theta)))


def parallel_K_H(K, H, lam):
    """Offset curvatures from principal curvatures (independent route)."""
    disc = np.sqrt(max(H * H - K, 0.0))
    k1, k2 = H + disc, H - disc
    kb1, kb2 = k1 / (1 - lam * k1), k2 / (1 - lam * k2)
    return kb1 * kb2, (kb1 + kb2) / 2
