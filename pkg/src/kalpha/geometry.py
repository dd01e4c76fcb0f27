"""Parametric surface charts and their pointwise differential geometry.

A chart maps (s, theta) to R^3.  Partials come either from callables
supplied with the chart or from finite differences of the chart itself;
the latter is the independent oracle used to check the former.

Orientation is fixed by U = X_s x X_theta / |X_s x X_theta|, and the shape
operator is S = I^-1 II with e = <X_ss, U>, so S(v) = -dU(v).
"""
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import _accel
from .errors import DegeneratePoint, NonFiniteDerivative

REGULARITY_THRESHOLD = 1e-9
PARABOLIC_TOL = 1e-9


@dataclass(frozen=True)
class GridSpec:
    n_s: int
    n_theta: int

    def __post_init__(self):
        if int(self.n_s) < 2 or int(self.n_theta) < 2:
            raise ValueError(f"grid needs n_s, n_theta >= 2, got {self.n_s}x{self.n_theta}")

    @classmethod
    def parse(cls, text):
        """Parse ``"NxM"``."""
        try:
            a, b = text.lower().split("x")
            return cls(int(a), int(b))
        except ValueError as exc:
            raise ValueError(f"bad grid '{text}', expected NxM") from exc


@lru_cache(maxsize=None)
def _stencil(order, shift, npts=5):
    offsets = np.arange(npts) - npts // 2 + shift
    w = _accel.fd_weights(0.0, offsets.astype(float), order)[order]
    return offsets, w


class SurfaceChart:
    """A map (s, theta) -> R^3 on a rectangle, with optional analytic partials.

    ``func(s, t)`` takes equal-shape 1-D arrays and returns an (N, 3) array.
    ``first(s, t)`` returns ``(X_s, X_t)`` and ``second(s, t)`` returns
    ``(X_ss, X_st, X_tt)``, each (N, 3).  ``periodic`` marks parameters whose
    stencils may leave the nominal domain.
    """

    def __init__(self, func, domain, first=None, second=None, *, periodic=(False, False),
                 scale=1.0, name="chart", rel_step_first=1e-5, rel_step_second=1e-3):
        (s0, s1), (t0, t1) = domain
        if not (s1 > s0 and t1 > t0):
            raise ValueError(f"empty chart domain {domain}")
        self.func = func
        self.domain = ((float(s0), float(s1)), (float(t0), float(t1)))
        self.first = first
        self.second = second
        self.periodic = tuple(bool(p) for p in periodic)
        self.scale = float(scale)
        self.name = name
        self.rel_step_first = rel_step_first
        self.rel_step_second = rel_step_second

    def __repr__(self):
        return f"SurfaceChart({self.name!r}, domain={self.domain})"

    @property
    def has_analytic(self):
        return self.first is not None and self.second is not None

    def __call__(self, s, t):
        s, t = np.broadcast_arrays(np.asarray(s, float), np.asarray(t, float))
        out = np.asarray(self.func(s.ravel(), t.ravel()), dtype=float)
        return out.reshape(s.shape + (3,))

    def with_domain(self, domain):
        return SurfaceChart(self.func, domain, self.first, self.second, periodic=self.periodic,
                            scale=self.scale, name=self.name,
                            rel_step_first=self.rel_step_first,
                            rel_step_second=self.rel_step_second)

    # -- finite differences -------------------------------------------------
    def _shifts(self, x, axis, h, npts=5):
        if self.periodic[axis]:
            return np.zeros(x.shape, dtype=int)
        lo, hi = self.domain[axis]
        half = npts // 2
        # slack keeps stencil nodes inside after rounding
        eps = 1e-12 * (hi - lo)
        need_lo = np.ceil((lo - eps - x) / h + half).astype(int)
        need_hi = np.floor((hi + eps - x) / h - half).astype(int)
        shift = np.clip(0, need_lo, None)
        shift = np.minimum(shift, need_hi)
        return np.clip(shift, -half, half)

    def _fd(self, fn, s, t, axis, order, h):
        """Derivative of ``fn`` along one axis with shifted 5-point stencils."""
        x = s if axis == 0 else t
        shifts = self._shifts(x, axis, h)
        out = None
        for shift in np.unique(shifts):
            sel = shifts == shift
            offsets, w = _stencil(order, int(shift))
            acc = 0.0
            for o, wk in zip(offsets, w):
                if wk == 0.0:
                    continue
                if axis == 0:
                    vals = fn(s[sel] + o * h, t[sel])
                else:
                    vals = fn(s[sel], t[sel] + o * h)
                acc = acc + wk * np.asarray(vals, dtype=float)
            acc = acc / h ** order
            if out is None:
                out = np.empty((len(s),) + np.shape(acc)[1:])
            out[sel] = acc
        if not np.all(np.isfinite(out)):
            raise NonFiniteDerivative(f"{self.name}: non-finite finite difference")
        return out

    def _steps(self, rel):
        return tuple(rel * (hi - lo) for lo, hi in self.domain)

    def fd_partials(self, s, t):
        """All five partials by finite differences of ``func`` alone."""
        h1s, h1t = self._steps(self.rel_step_first)
        h2s, h2t = self._steps(self.rel_step_second)
        f = self.func
        Xs = self._fd(f, s, t, 0, 1, h1s)
        Xt = self._fd(f, s, t, 1, 1, h1t)
        Xss = self._fd(f, s, t, 0, 2, h2s)
        Xtt = self._fd(f, s, t, 1, 2, h2t)

        def d_s(ss, tt):
            return self._fd(f, ss, tt, 0, 1, h2s)

        Xst = self._fd(d_s, s, t, 1, 1, h2t)
        return Xs, Xt, Xss, Xst, Xtt

    def semi_partials(self, s, t):
        """Analytic first partials, second partials by differencing them."""
        h2s, h2t = self._steps(self.rel_step_second)
        Xs, Xt = self.first(s, t)

        def fs(ss, tt):
            return self.first(ss, tt)[0]

        def ft(ss, tt):
            return self.first(ss, tt)[1]

        Xss = self._fd(fs, s, t, 0, 1, h2s)
        Xst = self._fd(fs, s, t, 1, 1, h2t)
        Xtt = self._fd(ft, s, t, 1, 1, h2t)
        return np.asarray(Xs, float), np.asarray(Xt, float), Xss, Xst, Xtt

    def partials(self, s, t, mode="auto"):
        """Return ``(X, X_s, X_t, X_ss, X_st, X_tt)`` for flat arrays s, t.

        mode: ``"analytic"`` (supplied callables), ``"fd"`` (finite
        differences only) or ``"auto"`` (best available).
        """
        s = np.atleast_1d(np.asarray(s, float)).ravel()
        t = np.atleast_1d(np.asarray(t, float)).ravel()
        X = np.asarray(self.func(s, t), float)
        if mode == "auto":
            mode = "analytic" if self.has_analytic else ("semi" if self.first is not None else "fd")
        if mode == "analytic":
            if not self.has_analytic:
                raise ValueError(f"{self.name} has no analytic partials")
            # singular rings (|r'| = 1 and the like) yield NaN and get flagged later
            with np.errstate(divide="ignore", invalid="ignore"):
                Xs, Xt = self.first(s, t)
                Xss, Xst, Xtt = self.second(s, t)
            parts = tuple(np.asarray(p, float) for p in (Xs, Xt, Xss, Xst, Xtt))
        elif mode == "semi":
            parts = self.semi_partials(s, t)
        elif mode == "fd":
            parts = self.fd_partials(s, t)
        else:
            raise ValueError(f"unknown derivative mode {mode!r}")
        return (X,) + parts


@dataclass(frozen=True)
class CurvatureSample:
    """Pointwise geometric record of a surface."""

    s: float
    theta: float
    position: np.ndarray
    X_s: np.ndarray
    X_theta: np.ndarray
    X_ss: np.ndarray
    X_stheta: np.ndarray
    X_thetatheta: np.ndarray
    U: np.ndarray
    E: float
    F: float
    G: float
    e: float
    f: float
    g: float
    K: float
    H: float
    k1: float
    k2: float
    degenerate: bool = False
    parabolic: bool = False

    @property
    def first_form(self):
        return np.array([[self.E, self.F], [self.F, self.G]])

    @property
    def second_form(self):
        return np.array([[self.e, self.f], [self.f, self.g]])

    def shape_operator(self):
        """Matrix of S = -dU in the (X_s, X_theta) basis."""
        return np.linalg.solve(self.first_form, self.second_form)


@dataclass
class CurvatureField:
    """Curvature data on an array of parameter points (any shape)."""

    s: np.ndarray
    theta: np.ndarray
    X: np.ndarray
    partials: tuple
    U: np.ndarray
    forms: np.ndarray
    K: np.ndarray
    H: np.ndarray
    k1: np.ndarray
    k2: np.ndarray
    cross_norm: np.ndarray
    degenerate: np.ndarray
    parabolic: np.ndarray = field(default=None)

    @property
    def shape(self):
        return self.s.shape

    def sample(self, idx):
        """Extract one :class:`CurvatureSample` by (multi-)index."""
        flat = np.ravel_multi_index(idx, self.shape) if isinstance(idx, tuple) else int(idx)
        p = [q.reshape(-1, 3)[flat] for q in self.partials]
        fm = self.forms.reshape(-1, 6)[flat]
        return CurvatureSample(
            s=float(self.s.ravel()[flat]), theta=float(self.theta.ravel()[flat]),
            position=self.X.reshape(-1, 3)[flat], X_s=p[0], X_theta=p[1], X_ss=p[2],
            X_stheta=p[3], X_thetatheta=p[4], U=self.U.reshape(-1, 3)[flat],
            E=fm[0], F=fm[1], G=fm[2], e=fm[3], f=fm[4], g=fm[5],
            K=float(self.K.ravel()[flat]), H=float(self.H.ravel()[flat]),
            k1=float(self.k1.ravel()[flat]), k2=float(self.k2.ravel()[flat]),
            degenerate=bool(self.degenerate.ravel()[flat]),
            parabolic=bool(self.parabolic.ravel()[flat]),
        )


def curvature_field(chart, s, t, mode="auto", flip=False, threshold=None,
                    parabolic_tol=PARABOLIC_TOL):
    """Evaluate normals, fundamental forms and curvatures at every (s, t).

    Degenerate points are flagged (NaN curvatures), never raised.
    """
    s, t = np.broadcast_arrays(np.asarray(s, float), np.asarray(t, float))
    shape = s.shape
    X, Xs, Xt, Xss, Xst, Xtt = chart.partials(s.ravel(), t.ravel(), mode=mode)
    thr = REGULARITY_THRESHOLD * chart.scale if threshold is None else threshold
    kern = _accel.shape_from_partials
    U, forms, curv, nrm = kern(np.ascontiguousarray(Xs), np.ascontiguousarray(Xt),
                               np.ascontiguousarray(Xss), np.ascontiguousarray(Xst),
                               np.ascontiguousarray(Xtt), float(thr))
    K, H, k1, k2 = curv.T
    if flip:
        U = -U
        forms = forms.copy()
        forms[:, 3:] *= -1.0
        H, k1, k2 = -H, -k2, -k1
    deg = ~np.isfinite(K)
    with np.errstate(invalid="ignore"):
        par = (~deg) & (np.abs(K) < parabolic_tol)

    def rs(a, tail=()):
        return np.asarray(a).reshape(shape + tail)

    return CurvatureField(
        s=s.copy(), theta=t.copy(), X=rs(X, (3,)),
        partials=tuple(rs(p, (3,)) for p in (Xs, Xt, Xss, Xst, Xtt)),
        U=rs(U, (3,)), forms=rs(forms, (6,)), K=rs(K), H=rs(H), k1=rs(k1), k2=rs(k2),
        cross_norm=rs(nrm), degenerate=rs(deg), parabolic=rs(par),
    )


def unit_normal(chart, s, theta, mode="auto", flip=False, threshold=None):
    """Unit normal X_s x X_theta / |X_s x X_theta| at one point."""
    _, Xs, Xt, *_ = chart.partials([s], [theta], mode=mode)
    with np.errstate(invalid="ignore"):
        cr = np.cross(Xs[0], Xt[0])
    n = np.linalg.norm(cr)
    thr = REGULARITY_THRESHOLD * chart.scale if threshold is None else threshold
    if not n >= thr:  # NaN partials count as degenerate
        raise DegeneratePoint(f"{chart.name}: |X_s x X_theta| = {n:.3e} at ({s}, {theta})")
    return -cr / n if flip else cr / n


def curvature_sample(chart, s, theta, mode="auto", flip=False, threshold=None):
    """Full :class:`CurvatureSample` at one regular point."""
    fld = curvature_field(chart, np.array([s]), np.array([theta]), mode=mode, flip=flip,
                          threshold=threshold)
    if fld.degenerate[0]:
        raise DegeneratePoint(
            f"{chart.name}: |X_s x X_theta| = {fld.cross_norm[0]:.3e} at ({s}, {theta})")
    return fld.sample(0)


def grid_parameters(chart, grid):
    """Row-major (s, theta) arrays of shape (n_s, n_theta) over the chart domain."""
    (s0, s1), (t0, t1) = chart.domain
    sv = np.linspace(s0, s1, grid.n_s)
    tv = np.linspace(t0, t1, grid.n_theta, endpoint=not chart.periodic[1])
    S, T = np.meshgrid(sv, tv, indexing="ij")
    return S, T


def sample_grid(chart, grid, mode="auto", flip=False):
    """List of samples in row-major order; singular points are flagged."""
    S, T = grid_parameters(chart, grid)
    fld = curvature_field(chart, S, T, mode=mode, flip=flip)
    return [fld.sample(i) for i in range(S.size)]


# ---------------------------------------------------------------------------
# Elementary charts
# ---------------------------------------------------------------------------
def sphere(radius=1.0, center=(0.0, 0.0, 0.0), margin=1e-3):
    """(s, t) -> c + r (cos s cos t, cos s sin t, sin s); s is latitude."""
    r = float(radius)
    c = np.asarray(center, float)

    def X(s, t):
        return c + r * np.column_stack((np.cos(s) * np.cos(t), np.cos(s) * np.sin(t), np.sin(s)))

    def first(s, t):
        cs, ss, ct, st = np.cos(s), np.sin(s), np.cos(t), np.sin(t)
        Xs = r * np.column_stack((-ss * ct, -ss * st, cs))
        Xt = r * np.column_stack((-cs * st, cs * ct, np.zeros_like(s)))
        return Xs, Xt

    def second(s, t):
        cs, ss, ct, st = np.cos(s), np.sin(s), np.cos(t), np.sin(t)
        Xss = r * np.column_stack((-cs * ct, -cs * st, -ss))
        Xst = r * np.column_stack((ss * st, -ss * ct, np.zeros_like(s)))
        Xtt = r * np.column_stack((-cs * ct, -cs * st, np.zeros_like(s)))
        return Xss, Xst, Xtt

    half = np.pi / 2 - margin
    return SurfaceChart(X, ((-half, half), (0.0, 2 * np.pi)), first, second,
                        periodic=(False, True), scale=r * r, name=f"sphere(r={r:g})")


def plane(extent=1.0):
    """The plane z = 0 as (s, t) -> (s, t, 0)."""

    def X(s, t):
        return np.column_stack((s, t, np.zeros_like(s)))

    def first(s, t):
        one, zero = np.ones_like(s), np.zeros_like(s)
        return np.column_stack((one, zero, zero)), np.column_stack((zero, one, zero))

    def second(s, t):
        z = np.zeros((len(s), 3))
        return z, z.copy(), z.copy()

    e = float(extent)
    return SurfaceChart(X, ((-e, e), (-e, e)), first, second, name="plane")
