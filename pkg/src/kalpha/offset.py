"""Parallel (offset) surfaces X + lam U and their curvature transfer.

Curvatures of the offset are expressed against the base normal U:
with D = 1 - 2 lam H + lam^2 K,

    K_bar = K / D,    H_bar = (H - lam K) / D,    eps = sign(D).

The offset chart's own cross-product normal is eps U, so the engine's mean
curvature on the offset chart equals eps * H_bar.
"""
import logging
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateCoefficients, OffsetSingularity
from .geometry import GridSpec, SurfaceChart, curvature_field, grid_parameters

log = logging.getLogger(__name__)

FOCAL_TOL = 1e-10


def _focal_factor(K, H, lam):
    return 1.0 - 2.0 * lam * H + lam * lam * K


def parallel_curvatures(K, H, lam, focal_tol=FOCAL_TOL):
    """Offset (K_bar, H_bar, eps); works elementwise on arrays."""
    K = np.asarray(K, float)
    H = np.asarray(H, float)
    D = _focal_factor(K, H, lam)
    if np.any(np.abs(D) < focal_tol):
        raise OffsetSingularity(f"focal point: |1 - 2 lam H + lam^2 K| < {focal_tol:g} at lam = {lam:g}")
    Kb = K / D
    Hb = (H - lam * K) / D
    eps = np.sign(D)
    if Kb.ndim == 0:
        return float(Kb), float(Hb), int(eps)
    return Kb, Hb, eps.astype(int)


def _normal_frame(base, s, t, mode, flip):
    """X, U and the derivatives U_s, U_t from the Weingarten equations."""
    X, Xs, Xt, Xss, Xst, Xtt = base.partials(s, t, mode=mode)
    cr = np.cross(Xs, Xt)
    U = cr / np.linalg.norm(cr, axis=1)[:, None]
    if flip:
        U = -U
    E = np.einsum("ij,ij->i", Xs, Xs)
    F = np.einsum("ij,ij->i", Xs, Xt)
    G = np.einsum("ij,ij->i", Xt, Xt)
    e = np.einsum("ij,ij->i", Xss, U)
    f = np.einsum("ij,ij->i", Xst, U)
    g = np.einsum("ij,ij->i", Xtt, U)
    det = E * G - F * F
    # U_s = p Xs + q Xt with [E F; F G][p q]^T = -[e f]^T, likewise for U_t
    ps = -(G * e - F * f) / det
    qs = -(E * f - F * e) / det
    pt = -(G * f - F * g) / det
    qt = -(E * g - F * f) / det
    Us = ps[:, None] * Xs + qs[:, None] * Xt
    Ut = pt[:, None] * Xs + qt[:, None] * Xt
    return X, Xs, Xt, U, Us, Ut


@dataclass
class ParallelSurface:
    base: SurfaceChart
    lam: float
    chart: SurfaceChart
    flip: bool = False
    base_mode: str = "auto"

    def focal_factor(self, s, t):
        fld = curvature_field(self.base, s, t, mode=self.base_mode, flip=self.flip)
        return _focal_factor(fld.K, fld.H, self.lam)

    def epsilon(self, grid):
        """Per-point sign of 1 - 2 lam H + lam^2 K and whether it is constant."""
        S, T = grid_parameters(self.base, grid) if isinstance(grid, GridSpec) else grid
        eps = np.sign(self.focal_factor(S, T)).astype(int)
        const = bool(np.all(eps == eps.flat[0]))
        if not const:
            log.warning("offset sign eps changes over the grid at lam = %g", self.lam)
        return eps, const


def build_parallel(base, lam, flip=False, mode="auto", check_grid=None, focal_tol=FOCAL_TOL):
    """Chart of X + lam U over the base domain.

    First partials are exact when the base has analytic second partials
    (X_bar_s = X_s + lam U_s with U_s from the Weingarten equations); second
    partials are finite differences of those.  ``flip`` offsets along -U.
    When ``check_grid`` is given the focal factor is checked there.
    """
    lam = float(lam)
    if lam == 0.0:
        raise ValueError("offset distance must be nonzero")

    def X(s, t):
        P, _, _, U, _, _ = _normal_frame(base, s, t, mode, flip)
        return P + lam * U

    def first(s, t):
        _, Xs, Xt, _, Us, Ut = _normal_frame(base, s, t, mode, flip)
        return Xs + lam * Us, Xt + lam * Ut

    chart = SurfaceChart(X, base.domain, first, None, periodic=base.periodic,
                         scale=base.scale, name=f"parallel({base.name}, {lam:g})",
                         rel_step_first=base.rel_step_first, rel_step_second=base.rel_step_second)
    surf = ParallelSurface(base, lam, chart, flip, mode)
    if check_grid is not None:
        S, T = grid_parameters(base, check_grid)
        D = surf.focal_factor(S, T)
        if np.any(np.abs(D) < focal_tol):
            raise OffsetSingularity(f"focal point on the sampled grid at lam = {lam:g}")
    return surf


# ---------------------------------------------------------------------------
# Same-speed conditions for M and its parallel
# ---------------------------------------------------------------------------
def _is_odd_integer(alpha):
    return float(alpha).is_integer() and int(alpha) % 2 != 0


@dataclass
class SameSpeedVerdict:
    lam: float
    alpha: float
    tolerance: float
    case_i_residual: float
    case_ii_residual: float
    case_ii_applicable: bool
    dual_i_residual: float
    dual_ii_residual: float
    eps_constant: bool
    note: str = ""

    @property
    def case_i(self):
        return self.case_i_residual <= self.tolerance

    @property
    def case_ii(self):
        return self.case_ii_applicable and self.case_ii_residual <= self.tolerance

    @property
    def holds(self):
        if self.case_i:
            return "i"
        if self.case_ii:
            return "ii"
        return None

    def to_dict(self):
        d = dict(self.__dict__)
        d.update(case_i=self.case_i, case_ii=self.case_ii, holds=self.holds)
        return d


def check_same_speed_conditions(K, H, lam, alpha, tol=1e-8):
    """Test lam K - 2H = 0 (any alpha) and lam^2 K - 2 lam H + 2 = 0 (odd alpha).

    The dual residuals lam K_bar + 2 H_bar and lam^2 K_bar + 2 lam H_bar + 2
    are computed from the transferred curvatures as a cross-check.
    """
    K = np.ravel(np.asarray(K, float))
    H = np.ravel(np.asarray(H, float))
    r1 = float(np.max(np.abs(lam * K - 2 * H)))
    r2 = float(np.max(np.abs(lam * lam * K - 2 * lam * H + 2)))
    applicable = _is_odd_integer(alpha)
    note = "" if applicable else "second condition needs an odd integer power"
    try:
        Kb, Hb, eps = parallel_curvatures(K, H, lam)
        d1 = float(np.max(np.abs(lam * Kb + 2 * Hb)))
        d2 = float(np.max(np.abs(lam * lam * Kb + 2 * lam * Hb + 2)))
        const = bool(np.all(eps == eps[0]))
    except OffsetSingularity:
        d1 = d2 = float("inf")
        const = False
        note = (note + "; " if note else "") + "focal point among samples"
    return SameSpeedVerdict(float(lam), float(alpha), tol, r1, r2, applicable, d1, d2, const, note)


@dataclass
class LambdaScan:
    lams: np.ndarray
    case_i: np.ndarray
    case_ii: np.ndarray
    tolerance: float
    case_ii_applicable: bool

    @property
    def passing(self):
        ok = self.case_i <= self.tolerance
        if self.case_ii_applicable:
            ok |= self.case_ii <= self.tolerance
        return self.lams[ok]

    @property
    def best_case_i(self):
        k = int(np.argmin(self.case_i))
        return float(self.lams[k]), float(self.case_i[k])

    @property
    def best_case_ii(self):
        k = int(np.argmin(self.case_ii))
        return float(self.lams[k]), float(self.case_ii[k])

    def to_dict(self):
        return {
            "lam_min": float(self.lams[0]), "lam_max": float(self.lams[-1]), "n": int(len(self.lams)),
            "best_case_i": self.best_case_i, "best_case_ii": self.best_case_ii,
            "case_ii_applicable": self.case_ii_applicable,
            "n_passing": int(len(self.passing)), "tolerance": self.tolerance,
        }


def lambda_scan(K, H, alpha, lams=None, tol=1e-6, chunk=512):
    """Max-over-samples residual of both same-speed conditions for each lam."""
    if lams is None:
        lams = np.round(np.arange(-5000, 5001) * 1e-3, 12)
    lams = np.asarray(lams, float)
    K = np.ravel(np.asarray(K, float))
    H = np.ravel(np.asarray(H, float))
    good = np.isfinite(K) & np.isfinite(H)
    K, H = K[good], H[good]
    m1 = np.empty(len(lams))
    m2 = np.empty(len(lams))
    for i in range(0, len(lams), chunk):
        L = lams[i:i + chunk, None]
        m1[i:i + chunk] = np.max(np.abs(L * K - 2 * H), axis=1)
        m2[i:i + chunk] = np.max(np.abs(L * L * K - 2 * L * H + 2), axis=1)
    return LambdaScan(lams, m1, m2, tol, _is_odd_integer(alpha))


@dataclass
class HalfOffsetVerdict:
    lam: float
    tolerance: float
    case_i_holds: bool
    case_ii_holds: bool
    half_H_max: float
    half_K_dev: float

    @property
    def minimal_ok(self):
        return self.case_i_holds and self.half_H_max <= self.tolerance

    @property
    def constant_K_ok(self):
        return self.case_ii_holds and self.half_K_dev <= self.tolerance

    def to_dict(self):
        d = dict(self.__dict__)
        d.update(minimal_ok=self.minimal_ok, constant_K_ok=self.constant_K_ok)
        return d


def half_offset_checks(K, H, lam, tol=1e-8):
    """Curvature of the offset at lam/2 under either same-speed condition.

    Under lam K = 2H it must be minimal; under lam^2 K - 2 lam H + 2 = 0 its
    Gauss curvature must equal -4/lam^2.
    """
    K = np.ravel(np.asarray(K, float))
    H = np.ravel(np.asarray(H, float))
    ci = bool(np.max(np.abs(lam * K - 2 * H)) <= tol)
    cii = bool(np.max(np.abs(lam * lam * K - 2 * lam * H + 2)) <= tol)
    Kh, Hh, _ = parallel_curvatures(K, H, lam / 2.0)
    return HalfOffsetVerdict(float(lam), tol, ci, cii, float(np.max(np.abs(Hh))),
                             float(np.max(np.abs(Kh + 4.0 / lam ** 2))))


# ---------------------------------------------------------------------------
# Linear Weingarten relations
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class WeingartenCoeffs:
    """Homogeneous coefficients of a K + 2 b H + c = 0."""

    a: float
    b: float
    c: float

    def __post_init__(self):
        if self.a == 0 and self.b == 0 and self.c == 0:
            raise DegenerateCoefficients("Weingarten coefficients are all zero")

    @classmethod
    def from_normalized(cls, a, b):
        """From a K + b H = 1."""
        return cls(float(a), float(b) / 2.0, -1.0)

    def residual(self, K, H):
        return self.a * np.asarray(K) + 2 * self.b * np.asarray(H) + self.c

    def as_tuple(self):
        return (self.a, self.b, self.c)


def weingarten_transfer(coeffs, lam):
    """Coefficients satisfied by the offset at distance lam (curvatures against U)."""
    a, b, c = coeffs.as_tuple()
    return WeingartenCoeffs(a + 2 * lam * b + lam * lam * c, b + lam * c, c)


@dataclass
class ScaledSpeed:
    lam: float
    mu: float
    eps: int
    factor: float
    max_dev: float

    def to_dict(self):
        return dict(self.__dict__)


def scaled_speed_translator(coeffs, alpha, K=None, H=None):
    """Offset distance lam = -a/b turning a Weingarten translator into one with K_bar = mu K.

    mu = b^2 / (b^2 - a c); the new speed is eps mu^alpha times the old one.
    With samples (K, H) the relation K_bar = mu K is checked and its worst
    deviation reported.
    """
    a, b, c = coeffs.as_tuple()
    if b == 0:
        raise DegenerateCoefficients("b = 0: no offset rescales K")
    disc = b * b - a * c
    if disc == 0:
        raise DegenerateCoefficients("b^2 = a c: offset is focal everywhere")
    lam = -a / b
    mu = b * b / disc
    eps = 1 if disc * b * b > 0 else -1
    dev = float("nan")
    if K is not None:
        K = np.ravel(np.asarray(K, float))
        H = np.ravel(np.asarray(H, float))
        if lam == 0:
            Kb, eps_pts = K, np.ones(len(K), int)
        else:
            Kb, _, eps_pts = parallel_curvatures(K, H, lam)
        dev = float(np.max(np.abs(Kb - mu * K)))
        eps = int(eps_pts[0])
    mu_pow = mu ** alpha if (mu > 0 or float(alpha).is_integer()) else float("nan")
    return ScaledSpeed(float(lam), float(mu), eps, float(eps * mu_pow), dev)
