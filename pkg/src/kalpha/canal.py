"""Spine curves, radius profiles and canal / tube / revolution surfaces.

A canal surface is written X = c + r (sin(phi) cos(t) N + sin(phi) sin(t) B
+ cos(phi) T) with cos(phi) = -r' and sin(phi) = +sqrt(1 - r'^2).
"""
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .errors import InvalidRadius, ZeroCurvature
from .geometry import SurfaceChart, _stencil

STRAIGHT_TOL = 1e-12
SIN_PHI_TOL = 1e-12
PARABOLIC_P_TOL = 1e-12

_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)


class Frame(NamedTuple):
    c: np.ndarray
    T: np.ndarray
    N: np.ndarray
    B: np.ndarray
    kappa: np.ndarray
    tau: np.ndarray
    dkappa: np.ndarray
    dtau: np.ndarray


def _unit(v):
    return np.asarray(v, float) / np.linalg.norm(v)


def _const(v, n):
    return np.broadcast_to(np.asarray(v, float), (n, 3)).copy()


class SpineCurve:
    """Arc-length spine with Frenet data.

    ``frame_fn(s)`` maps a 1-D array of arc lengths to a :class:`Frame`.
    ``length`` may be ``inf`` for lines.
    """

    def __init__(self, frame_fn, length, kind, s_range=None):
        self._frame_fn = frame_fn
        self.length = float(length)
        self.kind = kind
        if s_range is None:
            s_range = (-np.inf, np.inf) if np.isinf(length) else (0.0, float(length))
        self.s_range = tuple(float(x) for x in s_range)

    def frame(self, s):
        return self._frame_fn(np.atleast_1d(np.asarray(s, float)))

    def point(self, s):
        return self.frame(s).c

    @property
    def is_straight(self):
        return self.kind == "line"

    def __repr__(self):
        return f"SpineCurve({self.kind}, length={self.length:g})"


def _line(origin=(0.0, 0.0, 0.0), T=(0.0, 0.0, 1.0), N=(1.0, 0.0, 0.0), B=(0.0, 1.0, 0.0)):
    o = np.asarray(origin, float)
    T, N, B = _unit(T), _unit(N), _unit(B)
    if abs(T @ N) > 1e-12 or abs(T @ B) > 1e-12 or abs(N @ B) > 1e-12:
        raise ValueError("line frame must be orthonormal")

    def fn(s):
        n = len(s)
        z = np.zeros(n)
        return Frame(o + s[:, None] * T, _const(T, n), _const(N, n), _const(B, n), z, z, z, z)

    return SpineCurve(fn, np.inf, "line")


def _circle(radius):
    R = float(radius)

    def fn(s):
        u = s / R
        cu, su = np.cos(u), np.sin(u)
        z, one = np.zeros_like(s), np.ones_like(s)
        c = np.column_stack((R * cu, R * su, z))
        T = np.column_stack((-su, cu, z))
        N = np.column_stack((-cu, -su, z))
        B = np.column_stack((z, z, one))
        return Frame(c, T, N, B, one / R, z, z, z)

    return SpineCurve(fn, 2 * np.pi * R, "circle")


def _helix(a, b, turns=2.0):
    a, b = float(a), float(b)
    C = np.hypot(a, b)
    kappa, tau = a / C ** 2, b / C ** 2

    def fn(s):
        t = s / C
        ct, st = np.cos(t), np.sin(t)
        z, one = np.zeros_like(s), np.ones_like(s)
        c = np.column_stack((a * ct, a * st, b * t))
        T = np.column_stack((-a * st, a * ct, b * one)) / C
        N = np.column_stack((-ct, -st, z))
        B = np.column_stack((b * st, -b * ct, a * one)) / C
        return Frame(c, T, N, B, kappa * one, tau * one, z, z)

    return SpineCurve(fn, 2 * np.pi * turns * C, "helix")


def _fd_along(fn, x, h):
    offsets, w = _stencil(1, 0)
    return sum(wk * fn(x + o * h) for o, wk in zip(offsets, w) if wk != 0.0) / h


def _general(curve, t_range, derivs=None, n_table=2049):
    """Spine from an arbitrary regular curve c(t), re-parametrised by arc length."""
    t0, t1 = (float(x) for x in t_range)
    ht = 1e-3 * (t1 - t0)

    def cvec(t):
        return np.asarray(curve(np.atleast_1d(t)), float).reshape(-1, 3)

    if derivs is None:
        def d1(t):
            return _fd_along(cvec, t, ht)

        def d2(t):
            return _fd_along(d1, t, ht)

        def d3(t):
            return _fd_along(d2, t, ht)
    else:
        def wrap(f):
            return lambda t: np.asarray(f(np.atleast_1d(t)), float).reshape(-1, 3)

        d1, d2, d3 = (wrap(f) for f in derivs)

    def speed(t):
        return np.linalg.norm(d1(t), axis=1)

    def seg_len(ta, tb):
        mid, half = 0.5 * (ta + tb), 0.5 * (tb - ta)
        pts = mid[:, None] + half[:, None] * _GL_X[None, :]
        v = speed(pts.ravel()).reshape(pts.shape)
        return half * (v @ _GL_W)

    tt = np.linspace(t0, t1, n_table)
    S = np.concatenate(([0.0], np.cumsum(seg_len(tt[:-1], tt[1:]))))
    length = S[-1]

    def t_of_s(s):
        s = np.clip(s, 0.0, length)
        t = np.interp(s, S, tt)
        for _ in range(8):
            i = np.clip(np.searchsorted(tt, t) - 1, 0, n_table - 2)
            st = S[i] + seg_len(tt[i], t)
            dt = (st - s) / speed(t)
            t = np.clip(t - dt, t0, t1)
            if np.max(np.abs(dt)) < 1e-15 * max(1.0, abs(t1 - t0)):
                break
        return t

    def raw(s):
        t = t_of_s(s)
        p1, p2, p3 = d1(t), d2(t), d3(t)
        sp = np.linalg.norm(p1, axis=1)
        cr = np.cross(p1, p2)
        crn = np.linalg.norm(cr, axis=1)
        if np.any(crn < STRAIGHT_TOL * sp ** 3):
            raise ZeroCurvature("principal normal undefined where kappa = 0; "
                                "use a line spine with an explicit frame")
        T = p1 / sp[:, None]
        B = cr / crn[:, None]
        N = np.cross(B, T)
        kappa = crn / sp ** 3
        tau = np.einsum("ij,ij->i", cr, p3) / crn ** 2
        return cvec(t), T, N, B, kappa, tau

    hs = 1e-4 * length

    def fn(s):
        c, T, N, B, kappa, tau = raw(s)
        # kappa', tau' only feed tangential parts of X_ss; shifted at the ends
        sc = np.clip(s, 2 * hs, length - 2 * hs)
        dk = _fd_along(lambda x: raw(x)[4], sc, hs)
        dt = _fd_along(lambda x: raw(x)[5], sc, hs)
        return Frame(c, T, N, B, kappa, tau, dk, dt)

    return SpineCurve(fn, length, "curve")


def make_spine(kind, **params):
    """Build a spine: ``line``, ``circle`` (radius), ``helix`` (a, b, turns) or
    ``curve`` (func, t_range, optional derivs=(c', c'', c'''))."""
    if kind == "line":
        return _line(**params)
    if kind == "circle":
        return _circle(params["radius"])
    if kind == "helix":
        return _helix(params["a"], params["b"], params.get("turns", 2.0))
    if kind == "curve":
        return _general(params["func"], params["t_range"], params.get("derivs"))
    raise ValueError(f"unknown spine kind {kind!r}")


# ---------------------------------------------------------------------------
# Radius profiles
# ---------------------------------------------------------------------------
@dataclass
class RadiusProfile:
    """r(s) with derivatives on a validity interval.

    ``derivs(s)`` returns ``(r, r', r'', r''')`` arrays.  ``representation`` is
    ``"closed"``, ``"constant"``, ``"implicit"`` or ``"ode"``.
    """

    derivs: Callable
    interval: tuple
    representation: str = "closed"
    meta: dict = None

    def __call__(self, s):
        return self.derivs(np.atleast_1d(np.asarray(s, float)))[0]

    def __post_init__(self):
        a, b = self.interval
        self.interval = (float(a), float(b))
        if self.meta is None:
            self.meta = {}

    @classmethod
    def constant(cls, r0, interval=(0.0, 1.0)):
        r0 = float(r0)
        if r0 <= 0:
            raise InvalidRadius(f"radius must be positive, got {r0}")

        def d(s):
            z = np.zeros_like(s)
            return r0 + z, z, z.copy(), z.copy()

        return cls(d, interval, "constant", {"r0": r0})

    @classmethod
    def from_functions(cls, r, dr, d2r, d3r=None, interval=(0.0, 1.0)):
        """Closed-form profile; r''' falls back to differencing r''."""
        h = 1e-4 * (interval[1] - interval[0])

        def d(s):
            r3 = d3r(s) if d3r is not None else _fd_along(d2r, s, h)
            return r(s), dr(s), d2r(s), r3

        return cls(d, interval, "closed")

    def with_interval(self, interval):
        return RadiusProfile(self.derivs, interval, self.representation, dict(self.meta))

    def samples(self, n=257):
        s = np.linspace(*self.interval, n)
        return (s,) + tuple(self.derivs(s))

    def validate(self, n=257):
        """Raise :class:`InvalidRadius` unless r > 0 and |r'| < 1 on the interior."""
        s, r, r1, *_ = self.samples(n)
        if not np.all(np.isfinite(r)) or not np.all(np.isfinite(r1)):
            raise InvalidRadius("radius profile is not finite on its interval")
        if np.any(r <= 0):
            raise InvalidRadius(f"r <= 0 at s = {s[np.argmin(r)]:.6g}")
        inner = slice(1, -1)
        if np.any(1.0 - r1[inner] ** 2 < SIN_PHI_TOL):
            bad = s[inner][np.argmax(np.abs(r1[inner]))]
            raise InvalidRadius(f"|r'| >= 1 at s = {bad:.6g} (sin(phi) = 0)")

    @property
    def is_constant(self):
        if self.representation == "constant":
            return True
        _, _, r1, r2, _ = self.samples(65)
        return bool(np.max(np.abs(r1)) <= 1e-14 and np.max(np.abs(r2)) <= 1e-14)


def trimmed_interval(profile, n=4001, tol=SIN_PHI_TOL):
    """Largest sub-interval (on a sample grid) where 1 - r'^2 >= tol."""
    s, r, r1, *_ = profile.samples(n)
    ok = (1.0 - r1 ** 2 >= tol) & (r > 0) & np.isfinite(r1)
    if not ok.any():
        raise InvalidRadius("no regular sub-interval")
    idx = np.flatnonzero(ok)
    # longest run of consecutive admissible samples
    breaks = np.flatnonzero(np.diff(idx) > 1)
    starts = np.concatenate(([0], breaks + 1))
    ends = np.concatenate((breaks, [len(idx) - 1]))
    k = np.argmax(ends - starts)
    return float(s[idx[starts[k]]]), float(s[idx[ends[k]]])


# ---------------------------------------------------------------------------
# Canal surfaces
# ---------------------------------------------------------------------------
class CanalCurvatures(NamedTuple):
    K: np.ndarray
    H: np.ndarray
    P: np.ndarray
    Q: np.ndarray
    parabolic: np.ndarray


@dataclass
class CanalSurface:
    spine: SpineCurve
    radius: RadiusProfile
    chart: SurfaceChart
    kind: str
    is_tube: bool
    is_revolution: bool

    def local(self, s, theta):
        """Spine frame and radius data broadcast to (s, theta)."""
        s, theta = np.broadcast_arrays(np.asarray(s, float), np.asarray(theta, float))
        shape = s.shape
        fr = self.spine.frame(s.ravel())
        r, r1, r2, r3 = self.radius.derivs(s.ravel())
        return shape, fr, (r, r1, r2, r3), theta.ravel()

    def sphere_normal(self, s, theta):
        """cos(phi) T + sin(phi) cos(t) N + sin(phi) sin(t) B (outward from the spine spheres)."""
        shape, fr, (r, r1, *_), t = self.local(s, theta)
        cphi, sphi = -r1, np.sqrt(1.0 - r1 ** 2)
        n = np.cos(t)[:, None] * fr.N + np.sin(t)[:, None] * fr.B
        return (cphi[:, None] * fr.T + sphi[:, None] * n).reshape(shape + (3,))

    def frame_components(self, s, w):
        """Coordinates (w1, w2, w3) of a fixed vector in the spine frame at s."""
        fr = self.spine.frame(s)
        w = np.asarray(w, float)
        return fr.T @ w, fr.N @ w, fr.B @ w


def _canal_funcs(spine, radius):
    def pieces(s, t):
        fr = spine.frame(s)
        r, r1, r2, r3 = radius.derivs(s)
        ct, st = np.cos(t), np.sin(t)
        n = ct[:, None] * fr.N + st[:, None] * fr.B
        m = -st[:, None] * fr.N + ct[:, None] * fr.B
        return fr, (r, r1, r2, r3), ct, st, n, m

    def coeffs(r, r1, r2, r3):
        a = -r * r1
        a1 = -r1 ** 2 - r * r2
        a2 = -3.0 * r1 * r2 - r * r3
        w = np.sqrt(1.0 - r1 ** 2)
        w1 = -r1 * r2 / w
        w2 = -(r2 ** 2 + r1 * r3) / w - r1 ** 2 * r2 ** 2 / w ** 3
        b = r * w
        b1 = r1 * w + r * w1
        b2 = r2 * w + 2.0 * r1 * w1 + r * w2
        return a, a1, a2, b, b1, b2

    def X(s, t):
        fr, (r, r1, _, _), _, _, n, _ = pieces(s, t)
        a = -r * r1
        b = r * np.sqrt(1.0 - r1 ** 2)
        return fr.c + a[:, None] * fr.T + b[:, None] * n

    def first(s, t):
        fr, rr, ct, st, n, m = pieces(s, t)
        a, a1, _, b, b1, _ = coeffs(*rr)
        k, tau = fr.kappa, fr.tau
        A = 1.0 + a1 - b * k * ct
        Bn = a * k * ct + b1
        Bm = -a * k * st + b * tau
        Xs = A[:, None] * fr.T + Bn[:, None] * n + Bm[:, None] * m
        Xt = b[:, None] * m
        return Xs, Xt

    def second(s, t):
        fr, rr, ct, st, n, m = pieces(s, t)
        a, a1, a2, b, b1, b2 = coeffs(*rr)
        k, tau, dk, dtau = fr.kappa, fr.tau, fr.dkappa, fr.dtau
        A = 1.0 + a1 - b * k * ct
        Bn = a * k * ct + b1
        Bm = -a * k * st + b * tau
        dA = a2 - b1 * k * ct - b * dk * ct
        dBn = a1 * k * ct + a * dk * ct + b2
        dBm = -a1 * k * st - a * dk * st + b1 * tau + b * dtau
        cT = dA - Bn * k * ct + Bm * k * st
        cn = A * k * ct - Bm * tau + dBn
        cm = -A * k * st + Bn * tau + dBm
        Xss = cT[:, None] * fr.T + cn[:, None] * n + cm[:, None] * m
        Xst = (b * k * st)[:, None] * fr.T - (b * tau)[:, None] * n + b1[:, None] * m
        Xtt = -b[:, None] * n
        return Xss, Xst, Xtt

    return X, first, second


def _surface_domain(spine, radius, s_range):
    lo, hi = radius.interval
    slo, shi = spine.s_range
    if s_range is not None:
        lo, hi = s_range
    lo, hi = max(lo, slo), min(hi, shi)
    if not hi > lo:
        raise InvalidRadius(f"empty canal parameter interval [{lo}, {hi}]")
    return lo, hi


def build_canal(spine, radius, s_range=None):
    """Canal surface over ``spine`` with radius profile ``radius``.

    ``kind`` is ``"revolution"`` for straight spines, else ``"tube"`` for
    constant radius, else ``"canal"``; ``is_tube`` / ``is_revolution`` report
    the two classes independently.
    """
    lo, hi = _surface_domain(spine, radius, s_range)
    radius = radius.with_interval((lo, hi))
    radius.validate()
    X, first, second = _canal_funcs(spine, radius)
    sv = np.linspace(lo, hi, 65)
    straight = spine.is_straight or float(np.max(np.abs(spine.frame(sv).kappa))) <= STRAIGHT_TOL
    tube = radius.is_constant
    kind = "revolution" if straight else ("tube" if tube else "canal")
    rmax = float(np.max(np.abs(radius(sv))))
    chart = SurfaceChart(X, ((lo, hi), (0.0, 2 * np.pi)), first, second, periodic=(False, True),
                         scale=max(rmax, 1e-3) ** 2, name=f"{kind}[{spine.kind}]")
    return CanalSurface(spine, radius, chart, kind, tube, straight)


def surface_of_revolution(radius, s_range=None):
    """Revolution surface about the z-axis: (r sin(phi) cos t, r sin(phi) sin t, r cos(phi) + s)."""
    return build_canal(_line(), radius, s_range)


def canal_curvatures(surface, s, theta):
    """Closed-form K, H, P, Q measured against the outward spine-sphere normal.

    P = r r'' + r kappa sin(phi) cos(t) - sin^2(phi), Q = r'' + kappa sin(phi) cos(t),
    K = Q / (r P), H = -(2P + sin^2(phi)) / (2 r P).  Points with |P| < 1e-12 are
    flagged parabolic and carry NaN.
    """
    shape, fr, (r, r1, r2, _), t = surface.local(s, theta)
    sphi2 = 1.0 - r1 ** 2
    sphi = np.sqrt(sphi2)
    kc = fr.kappa * sphi * np.cos(t)
    P = r * r2 + r * kc - sphi2
    Q = r2 + kc
    bad = np.abs(P) < PARABOLIC_P_TOL
    Ps = np.where(bad, np.nan, P)
    K = Q / (r * Ps)
    H = -(2.0 * Ps + sphi2) / (2.0 * r * Ps)
    rs = lambda a: np.asarray(a).reshape(shape)  # noqa: E731
    return CanalCurvatures(rs(K), rs(H), rs(P), rs(Q), rs(bad))


def linear_identity_residual(K, H, r):
    """H + (K r + 1/r) / 2, which vanishes on every canal surface."""
    return np.asarray(H) + 0.5 * (np.asarray(K) * r + 1.0 / np.asarray(r))


def torus(R=2.0, r=0.5):
    return build_canal(_circle(R), RadiusProfile.constant(r, (0.0, 2 * np.pi * R)))
