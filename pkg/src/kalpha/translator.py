"""K^alpha-translators: residual checks, the rotational radius equation,
quadrature solutions and Weingarten nonexistence witnesses.

A surface is a K^alpha-translator with speed w when K^alpha = <U, w>.
For a surface of revolution about the z-axis with w = (0, 0, 1) this reduces
to (r'' / (r (r r'' - 1 + r'^2)))^alpha = -r'.
"""
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, optimize

from .canal import RadiusProfile, _fd_along, canal_curvatures
from .errors import (IntegrandDomainError, NonMonotone, NoRealBranch, StiffStop)
from .geometry import GridSpec, curvature_field, grid_parameters

SQRT2 = np.sqrt(2.0)
_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)


@dataclass(frozen=True)
class TranslatorSpec:
    alpha: float
    w: tuple = (0.0, 0.0, 1.0)

    def __post_init__(self):
        if self.alpha == 0:
            raise ValueError("alpha must be nonzero")
        w = np.asarray(self.w, float)
        if w.shape != (3,) or abs(np.linalg.norm(w) - 1.0) > 1e-12:
            raise ValueError(f"w must be a unit 3-vector, got {self.w}")
        object.__setattr__(self, "w", tuple(float(x) for x in w))


def _is_integer(alpha):
    return float(alpha).is_integer()


def real_power(K, alpha):
    """K**alpha where real; returns ``(value, complex_mask)``.

    Non-integer powers need K > 0; integer powers accept any nonzero K.
    """
    K = np.asarray(K, float)
    with np.errstate(divide="ignore", invalid="ignore"):
        if _is_integer(alpha):
            bad = ~np.isfinite(K) | ((K == 0) & (alpha < 0))
            val = np.where(bad, np.nan, np.power(np.where(bad, 1.0, K), int(alpha)))
        else:
            bad = ~np.isfinite(K) | (K <= 0)
            val = np.where(bad, np.nan, np.power(np.where(bad, 1.0, K), alpha))
    return val, bad


@dataclass
class TranslatorReport:
    residual: np.ndarray
    max_abs: float
    mean_abs: float
    skipped: int
    n_points: int
    tolerance: float
    orientation: int
    counts: dict = field(default_factory=dict)

    @property
    def skipped_fraction(self):
        return self.skipped / self.n_points

    @property
    def verdict(self):
        ok = np.isfinite(self.max_abs) and self.max_abs <= self.tolerance
        return "pass" if ok and self.skipped_fraction <= 0.10 else "fail"

    @property
    def passed(self):
        return self.verdict == "pass"

    def to_dict(self):
        return {
            "verdict": self.verdict,
            "max_abs": self.max_abs,
            "mean_abs": self.mean_abs,
            "skipped": self.skipped,
            "n_points": self.n_points,
            "skipped_fraction": self.skipped_fraction,
            "tolerance": self.tolerance,
            "orientation": self.orientation,
            "counts": dict(self.counts),
        }


def translator_residual(chart, spec, grid, tol=1e-6, mode="auto", parabolic_tol=1e-9):
    """Residual K^alpha - <U, w> on a grid, for the better of the two orientations.

    Points are skipped when the chart is singular, when K^alpha is not real,
    or when |K| < ``parabolic_tol`` (the equation presumes K != 0).
    """
    if isinstance(grid, GridSpec):
        S, T = grid_parameters(chart, grid)
    else:
        S, T = grid
    fld = curvature_field(chart, S, T, mode=mode)
    Ka, cplx = real_power(fld.K, spec.alpha)
    with np.errstate(invalid="ignore"):
        parab = np.abs(fld.K) < parabolic_tol
    skip = fld.degenerate | cplx | parab
    proj = fld.U @ np.asarray(spec.w)
    best = None
    for sign in (1, -1):
        res = Ka - sign * proj
        # residual is still recorded where K == 0 so flat pieces show their defect
        shown = np.where(fld.degenerate, np.nan, np.where(cplx & ~parab, np.nan, res))
        shown = np.where(parab & ~fld.degenerate, -sign * proj, shown)
        used = np.abs(res[~skip])
        mx = float(used.max()) if used.size else np.inf
        mean = float(used.mean()) if used.size else np.inf
        if best is None or mx < best[1]:
            best = (shown, mx, mean, sign)
    shown, mx, mean, sign = best
    counts = {"degenerate": int(fld.degenerate.sum()), "complex_power": int((cplx & ~fld.degenerate).sum()),
              "parabolic": int((parab & ~fld.degenerate).sum())}
    return TranslatorReport(shown, mx, mean, int(skip.sum()), int(skip.size), float(tol), sign, counts)


@dataclass
class AlignmentVerdict:
    passed: bool
    max_normal_component: float
    max_binormal_component: float
    max_transeq1: float
    offending: str

    def to_dict(self):
        return dict(self.__dict__)


def speed_alignment_check(surface, spec, grid, tol=1e-8):
    """Split w into (w1, w2, w3) along the spine frame and test sin(phi) w2 = sin(phi) w3 = 0.

    Also reports max |w1 cos(phi) - K^alpha| with K from the closed form
    (NaN where K^alpha is not real).
    """
    S, T = grid_parameters(surface.chart, grid) if isinstance(grid, GridSpec) else grid
    s = S[:, 0]
    w1, w2, w3 = surface.frame_components(s, spec.w)
    _, r1, *_ = surface.radius.derivs(s)
    sphi = np.sqrt(1.0 - r1 ** 2)
    cphi = -r1
    n2 = float(np.max(np.abs(sphi * w2)))
    n3 = float(np.max(np.abs(sphi * w3)))
    cc = canal_curvatures(surface, S, T)
    Ka, _ = real_power(cc.K, spec.alpha)
    eq1 = np.abs(-Ka + (w1 * cphi)[:, None])
    eq1max = float(np.nanmax(eq1)) if np.isfinite(eq1).any() else float("nan")
    passed = n2 <= tol and n3 <= tol
    offending = "" if passed else ("N" if n2 >= n3 else "B")
    return AlignmentVerdict(passed, n2, n3, eq1max, offending)


# ---------------------------------------------------------------------------
# Rotational translator ODE
# ---------------------------------------------------------------------------
def curvature_roots(r1, alpha):
    """Real K with K**alpha = -r1, as an array of candidates (possibly empty)."""
    v = -float(r1)
    if _is_integer(alpha):
        n = int(alpha)
        if v == 0.0:
            return np.array([0.0]) if n > 0 else np.array([])
        if n % 2 == 0:
            if v < 0:
                return np.array([])
            k = v ** (1.0 / n)
            return np.array([k, -k])
        return np.array([np.sign(v) * abs(v) ** (1.0 / n)])
    if v <= 0:
        return np.array([])
    return np.array([v ** (1.0 / alpha)])


def radius_second_derivative(r, r1, alpha, branch=1):
    """Isolate r'' from (r''/(r(r r'' - 1 + r'^2)))^alpha = -r'.

    K(r'') = r''/(r(r r'' - q)), q = 1 - r'^2, is a Moebius map of r'', so
    each admissible K gives r'' = K r q / (K r^2 - 1).  ``branch`` picks the
    sign of K when two real roots exist (even integer alpha).
    """
    ks = curvature_roots(r1, alpha)
    if branch < 0:
        ks = ks[::-1]
    q = 1.0 - r1 * r1
    for k in ks:
        den = k * r * r - 1.0
        if abs(den) > 1e-14:
            return k * r * q / den
    raise NoRealBranch(f"no real r'' for r={r:.6g}, r'={r1:.6g}, alpha={alpha:g}")


def radius_second_derivative_bracketed(r, r1, alpha, prev=None, r_start=10.0, grow=4.0, max_r=1e8,
                                       xtol=1e-12):
    """Same root as :func:`radius_second_derivative` by bracketing and bisection.

    Scans [-R, R] (R growing geometrically) for sign changes of
    F(x) = K(x)^alpha + r' away from the pole x = q/r, then refines with
    Brent's method.  The root nearest ``prev`` wins.
    """
    q = 1.0 - r1 * r1
    pole = q / r

    def F(x):
        K = x / (r * (r * x - q))
        val, bad = real_power(K, alpha)
        return np.where(bad, np.nan, val + r1)

    R = r_start
    while R <= max_r:
        x = np.linspace(-R, R, 4001)
        x = x[np.abs(x - pole) > 1e-9 * R]
        fx = F(x)
        roots = []
        for i in range(len(x) - 1):
            fa, fb = fx[i], fx[i + 1]
            if not (np.isfinite(fa) and np.isfinite(fb)):
                continue
            if x[i] < pole < x[i + 1]:
                continue
            if fa == 0.0:
                roots.append(x[i])
            elif fa * fb < 0:
                roots.append(optimize.brentq(lambda z: float(F(z)), x[i], x[i + 1], xtol=xtol,
                                             rtol=4 * np.finfo(float).eps))
        if roots:
            roots = np.array(roots)
            ref = 0.0 if prev is None else prev
            return float(roots[np.argmin(np.abs(roots - ref))])
        R *= grow
    raise NoRealBranch(f"no bracketed r'' for r={r:.6g}, r'={r1:.6g}, alpha={alpha:g}")


@dataclass
class OdeResult:
    profile: RadiusProfile
    reason: str
    s_end: float
    n_steps: int


def _branch_gap(r, r1, alpha, branch):
    """|K r^2 - 1| for the active branch; r'' is 0/0 where this and 1 - r'^2 vanish."""
    ks = curvature_roots(r1, alpha)
    if len(ks) == 0:
        return 0.0
    k = ks[-1] if branch < 0 else ks[0]
    return abs(k * r * r - 1.0)


def solve_radius_ode(alpha, r0, dr0, s_span, rtol=1e-10, atol=1e-12, branch=1,
                     sin_tol=1e-12, gap_tol=1e-4, r_min=1e-8, max_steps=200000):
    """Integrate the rotational translator equation from (r0, r'0) at s_span[0].

    Uses an adaptive Dormand-Prince 8(5,3) integrator.  Integration stops at
    s_span[1] or earlier when |r'| -> 1, r -> 0, no real r'' exists, or the
    isolated r'' approaches 0/0 (|K r^2 - 1| < ``gap_tol``); the reason is
    recorded.  Past a 0/0 point the line r' = -1 is itself a solution, so
    continuing would silently switch solutions.  The returned profile interpolates r, r' densely and
    evaluates r'' from the equation itself.
    """
    s0, s1 = (float(x) for x in s_span)
    if r0 <= 0 or abs(dr0) >= 1:
        raise NoRealBranch(f"inadmissible initial data r0={r0}, r'0={dr0}")
    radius_second_derivative(r0, dr0, alpha, branch)  # raises NoRealBranch

    def rhs(s, y):
        return np.array([y[1], radius_second_derivative(y[0], y[1], alpha, branch)])

    solver = integrate.DOP853(rhs, s0, np.array([r0, dr0], float), s1, rtol=rtol, atol=atol)
    ts, interps = [s0], []
    reason = "end"

    def margin(y):
        return min(1.0 - y[1] ** 2 - sin_tol, y[0] - r_min,
                   _branch_gap(y[0], y[1], alpha, branch) - gap_tol)

    if margin(np.array([r0, dr0])) <= 0:
        raise NoRealBranch(f"initial data r0={r0}, r'0={dr0} sit on a singular point")

    n = 0
    while solver.status == "running":
        try:
            msg = solver.step()
        except NoRealBranch:
            reason = "no-real-branch"
            break
        n += 1
        if solver.status == "failed":
            reason = "stiff-stop"
            if len(interps) == 0:
                raise StiffStop(f"step size underflow at s={solver.t}: {msg}")
            break
        dense = solver.dense_output()
        if margin(solver.y) <= 0:
            # locate the boundary inside the last step
            def g(s):
                return margin(dense(s))

            a, b = solver.t_old, solver.t
            s_stop = optimize.brentq(g, a, b, xtol=1e-14) if g(a) > 0 else a
            # keep strictly inside the admissible region
            s_stop = a + (s_stop - a) * (1 - 1e-9)
            if s_stop != a:
                ts.append(s_stop)
                interps.append(dense)
            y = solver.y
            reason = ("sin-phi-zero" if 1.0 - y[1] ** 2 < sin_tol else
                      "radius-zero" if y[0] <= r_min else "branch-singular")
            break
        ts.append(solver.t)
        interps.append(dense)
        if n >= max_steps:
            reason = "max-steps"
            break
    if not interps:
        raise NoRealBranch("integration could not take a single step")

    ts = np.array(ts)
    sol = integrate.OdeSolution(ts, interps)
    lo, hi = min(ts[0], ts[-1]), max(ts[0], ts[-1])

    def r2_of(r, r1):
        return np.array([radius_second_derivative(a, b, alpha, branch) for a, b in zip(r, r1)])

    h = 1e-4 * (hi - lo)

    def derivs(s):
        s = np.asarray(s, float)
        y = sol(np.clip(s, lo, hi))
        r, r1 = y[0], y[1]
        r2 = r2_of(r, r1)

        def r2s(x):
            yy = sol(np.clip(x, lo, hi))
            return r2_of(yy[0], yy[1])

        sc = np.clip(s, lo + 2 * h, hi - 2 * h)
        r3 = _fd_along(r2s, sc, h)
        return r, r1, r2, r3

    prof = RadiusProfile(derivs, (lo, hi), "ode",
                         {"alpha": alpha, "r0": r0, "dr0": dr0, "reason": reason, "solution": sol})
    return OdeResult(prof, reason, float(ts[-1]), n)


# ---------------------------------------------------------------------------
# Quadrature families
# ---------------------------------------------------------------------------
def _csqrt(x):
    return np.sqrt(x + 0j) if not np.iscomplexobj(x) else np.sqrt(x)


def _integrand(family, k, branch):
    """ds/dr for each family, written to accept complex r (complex-step safe)."""
    sg = float(branch)
    if family == "alpha1":
        c1 = k["c1"]
        return lambda r: r ** 2 / (-1.0 + sg * _csqrt(r ** 4 + c1 * r ** 2 + 1.0)), \
            lambda r: {"radicand": r ** 4 + c1 * r ** 2 + 1.0}
    if family == "alpha12-a":
        c1 = k["c1"]
        return lambda r: sg / _csqrt(r ** 2 - _csqrt(c1 + r ** 4 - 2.0 * r ** 2)), \
            lambda r: {"radicand": c1 + r ** 4 - 2.0 * r ** 2,
                       "inner": r ** 2 - np.sqrt(np.maximum(c1 + r ** 4 - 2.0 * r ** 2, 0.0))}
    if family == "alpha12-b":
        c1 = k["c1"]
        return lambda r: sg / _csqrt(_csqrt(r ** 4 - 2.0 * r ** 2 + c1) + r ** 2), \
            lambda r: {"radicand": r ** 4 - 2.0 * r ** 2 + c1,
                       "inner": np.sqrt(np.maximum(r ** 4 - 2.0 * r ** 2 + c1, 0.0)) + r ** 2}
    if family == "weingarten-WC1":
        c, c1 = k["c"], k["c1"]
        return lambda r: sg * _csqrt((r + c) / (r + c + c1)), \
            lambda r: {"ratio": (r + c) / (r + c + c1)}
    if family == "weingarten-WC2":
        a, b, c1 = k["a"], k["b"], k["c1"]
        return lambda r: sg * _csqrt((r * r + b * r - a) / (r * r + b * r - a - c1)), \
            lambda r: {"ratio": (r * r + b * r - a) / (r * r + b * r - a - c1)}
    raise ValueError(f"unknown family {family!r}")


FAMILY_ALPHA = {"alpha1": 1.0, "alpha12-a": -0.5, "alpha12-b": -0.5}
FAMILY_CONSTANTS = {
    "alpha1": ("c1",), "alpha12-a": ("c1",), "alpha12-b": ("c1",),
    "weingarten-WC1": ("c", "c1"), "weingarten-WC2": ("a", "b", "c1"),
}


@dataclass
class QuadratureSolution:
    """Tabulated s(r) = c2 + integral of a family integrand, with its inverse."""

    family: str
    constants: dict
    branch: int
    c2: float
    r_table: np.ndarray
    s_table: np.ndarray
    g: object = field(repr=False)

    @property
    def alpha(self):
        return FAMILY_ALPHA.get(self.family)

    @property
    def r_range(self):
        return float(self.r_table[0]), float(self.r_table[-1])

    @property
    def s_interval(self):
        return float(self.s_table.min()), float(self.s_table.max())

    def integrand(self, r):
        return np.real(self.g(np.asarray(r, float)))

    def dr_ds(self, r):
        """r' as a function of r (= 1 / (ds/dr))."""
        return 1.0 / self.integrand(r)

    def d2r(self, r):
        """r'' = h h' with h(r) = r'(r); h' via complex-step differentiation."""
        r = np.asarray(r, float)
        step = 1e-30
        gp = np.imag(self.g(r + 1j * step)) / step
        g = self.integrand(r)
        h = 1.0 / g
        return h * (-gp / g ** 2)

    def _s_from_node(self, r):
        i = np.clip(np.searchsorted(self.r_table, r) - 1, 0, len(self.r_table) - 2)
        a = self.r_table[i]
        mid, half = 0.5 * (a + r), 0.5 * (r - a)
        pts = mid[:, None] + half[:, None] * _GL_X[None, :]
        vals = self.integrand(pts.ravel()).reshape(pts.shape)
        return self.s_table[i] + half * (vals @ _GL_W)

    def s_of_r(self, r):
        r = np.atleast_1d(np.asarray(r, float))
        return self._s_from_node(r)

    def r_of_s(self, s, tol=1e-15, max_iter=60):
        """Invert s(r): bracket on the table, then safeguarded Newton steps."""
        s = np.atleast_1d(np.asarray(s, float))
        st, rt = self.s_table, self.r_table
        inc = st[-1] > st[0]
        key = st if inc else st[::-1]
        j = np.searchsorted(key, s)
        j = np.clip(j, 1, len(st) - 1)
        if not inc:
            j = len(st) - j
            lo_i, hi_i = j - 1, j
        else:
            lo_i, hi_i = j - 1, j
        lo, hi = rt[lo_i].copy(), rt[hi_i].copy()
        slo, shi = st[lo_i], st[hi_i]
        frac = np.where(shi != slo, (s - slo) / (shi - slo), 0.5)
        r = np.clip(lo + frac * (hi - lo), lo, hi)
        for _ in range(max_iter):
            f = self._s_from_node(r) - s
            d = self.integrand(r)
            step = f / d
            new = r - step
            # bisection fallback when Newton leaves the bracket
            f_lo = self._s_from_node(lo) - s
            same = np.sign(f) == np.sign(f_lo)
            lo = np.where(same, r, lo)
            hi = np.where(same, hi, r)
            out = (new <= np.minimum(lo, hi)) | (new >= np.maximum(lo, hi))
            new = np.where(out, 0.5 * (lo + hi), new)
            done = np.abs(new - r) <= tol * np.maximum(1.0, np.abs(r))
            r = new
            if np.all(done):
                break
        return r

    def profile(self, sin_tol=1e-12):
        """Implicit :class:`RadiusProfile` on the regular part of the table."""
        h = self.dr_ds(self.r_table)
        ok = (1.0 - h ** 2) >= sin_tol
        if not ok.any():
            from .errors import InvalidRadius
            raise InvalidRadius(f"{self.family}: |r'| >= 1 on the whole table")
        idx = np.flatnonzero(ok)
        breaks = np.flatnonzero(np.diff(idx) > 1)
        starts = np.concatenate(([0], breaks + 1))
        ends = np.concatenate((breaks, [len(idx) - 1]))
        k = np.argmax(ends - starts)
        i0, i1 = idx[starts[k]], idx[ends[k]]
        sa, sb = self.s_table[i0], self.s_table[i1]
        interval = (min(sa, sb), max(sa, sb))
        hr = 1e-5 * (self.r_range[1] - self.r_range[0])
        rlo, rhi = self.r_range

        def derivs(s):
            r = self.r_of_s(s)
            r1 = self.dr_ds(r)
            r2 = self.d2r(r)
            rc = np.clip(r, rlo + 2 * hr, rhi - 2 * hr)
            r3 = r1 * _fd_along(self.d2r, rc, hr)
            return r, r1, r2, r3

        return RadiusProfile(derivs, interval, "implicit",
                             {"family": self.family, "constants": dict(self.constants),
                              "branch": self.branch, "c2": self.c2})


def _check_domain(family, g, parts, r):
    vals = parts(r)
    for name, v in vals.items():
        v = np.asarray(v, float)
        bad = ~np.isfinite(v) | (v < 0)
        if bad.any():
            rb = float(r[np.argmax(bad)])
            raise IntegrandDomainError(f"{family}: {name} is negative or infinite at r = {rb:.10g}", rb)
    gv = g(r)
    bad = ~np.isfinite(gv) | (np.abs(np.imag(gv)) > 0)
    if bad.any():
        rb = float(r[np.argmax(bad)])
        raise IntegrandDomainError(f"{family}: integrand not finite and real at r = {rb:.10g}", rb)


def _tabulate(family, constants, branch, r_range, c2, n_table, epsabs):
    for key in FAMILY_CONSTANTS[family]:
        if key not in constants:
            raise ValueError(f"{family} needs constant {key!r}")
    branch = 1 if branch in (1, "+", "plus", +1.0) else -1 if branch in (-1, "-", "minus", -1.0) else None
    if branch is None:
        raise ValueError("branch must be +1 or -1")
    r0, r1 = (float(x) for x in r_range)
    if not r1 > r0:
        raise ValueError(f"empty r-range {r_range}")
    g, parts = _integrand(family, constants, branch)
    r = np.linspace(r0, r1, n_table)
    _check_domain(family, g, parts, r)

    def greal(x):
        return float(np.real(g(np.array([x]))[0]))

    pieces = np.array([integrate.quad(greal, a, b, epsabs=epsabs, epsrel=1e-13, limit=200)[0]
                       for a, b in zip(r[:-1], r[1:])])
    cum = np.concatenate(([0.0], np.cumsum(pieces)))
    d = np.diff(cum)
    if not (np.all(d > 0) or np.all(d < 0)):
        raise NonMonotone(f"{family}: s(r) is not strictly monotone on {r_range}")
    if c2 is None:
        c2 = -float(cum.min())
    return QuadratureSolution(family, dict(constants), branch, float(c2), r, cum + c2, g)


def quadrature_radius(family, constants, branch, r_range, c2=None, n_table=401, epsabs=1e-12):
    """Radius function of a rotational translator as s = c2 + integral(ds/dr) dr.

    family: ``alpha1`` (alpha = 1), ``alpha12-a`` or ``alpha12-b`` (alpha = -1/2).
    With ``c2=None`` the smallest tabulated s is placed at 0.
    """
    if family not in FAMILY_ALPHA:
        raise ValueError(f"unknown translator family {family!r}")
    return _tabulate(family, constants, branch, r_range, c2, n_table, epsabs)


def weingarten_radius(family, constants, branch, r_range, c2=None, n_table=401, epsabs=1e-12):
    """Radius of a linear Weingarten surface of revolution.

    ``WC1``: H = c K with constants (c, c1).  ``WC2``: a K + b H = 1 with
    constants (a, b, c1).  H is measured against the outward spine-sphere normal.
    """
    fam = family if family.startswith("weingarten-") else f"weingarten-{family}"
    if fam not in ("weingarten-WC1", "weingarten-WC2"):
        raise ValueError(f"unknown Weingarten family {family!r}")
    return _tabulate(fam, constants, branch, r_range, c2, n_table, epsabs)


# ---------------------------------------------------------------------------
# Closed forms of the two worked examples
# ---------------------------------------------------------------------------
def alpha1_example_s(r, c2=0.0):
    """s(r) = r - sqrt(2) artanh(r / sqrt(2)) + c2  (alpha = 1, c1 = -2)."""
    r = np.asarray(r, float)
    return r - SQRT2 * np.arctanh(r / SQRT2) + c2


def alpha1_example_surface(r, s):
    """Ring radius 2 sqrt(r^2 - 1) / r and height (2 - r^2) / r + s."""
    r = np.asarray(r, float)
    return 2.0 * np.sqrt(r * r - 1.0) / r, (2.0 - r * r) / r + s


def alpha_neg_half_example_s(r, c2=0.0, sign=-1):
    """s(r) = sign / sqrt(2) ln(r + sqrt(r^2 - 1/2)) + c2  (alpha = -1/2, c1 = 1)."""
    r = np.asarray(r, float)
    return sign / SQRT2 * np.log(r + np.sqrt(r * r - 0.5)) + c2


def alpha_neg_half_ring_radius(r):
    r = np.asarray(r, float)
    return r * np.sqrt(2.0 - 2.0 * r * r)


# ---------------------------------------------------------------------------
# Weingarten nonexistence
# ---------------------------------------------------------------------------
def weingarten_gauss_curvature(solution, r):
    """Closed-form K(r) and dK/dr for the two Weingarten families."""
    r = np.asarray(r, float)
    k = solution.constants
    if solution.family == "weingarten-WC1":
        c = k["c"]
        K = -1.0 / (r * (r + 2 * c))
        dK = (2 * r + 2 * c) / (r * (r + 2 * c)) ** 2
    elif solution.family == "weingarten-WC2":
        a, b = k["a"], k["b"]
        den = 2 * a * r - b * r * r
        K = (b + 2 * r) / den
        dK = (2 * den - (b + 2 * r) * (2 * a - 2 * b * r)) / den ** 2
    else:
        raise ValueError(f"{solution.family} is not a Weingarten family")
    return K, dK


def compatibility_residual(solution, alpha, r):
    """alpha K'/K - r''/r' along a Weingarten solution, as a function of r.

    With K' = K_r r' and r''/r' = dh/dr for h(r) = r', this is
    alpha h K_r / K - h'.  It vanishes identically iff K^alpha is a constant
    multiple of -r'.
    """
    r = np.asarray(r, float)
    K, dK = weingarten_gauss_curvature(solution, r)
    h = solution.dr_ds(r)
    hp = solution.d2r(r) / h
    return alpha * h * dK / K - hp


def compatibility_polynomial(solution, alpha):
    """Polynomial in r (numpy.polynomial.Polynomial) whose roots are the roots
    of the compatibility residual (cubic for H = cK, sextic for aK + bH = 1)."""
    P = np.polynomial.Polynomial
    k = solution.constants
    c1 = k["c1"]
    if solution.family == "weingarten-WC1":
        c = k["c"]
        rc = P([c, 1.0])
        return 4 * alpha * (rc + c1) * rc ** 2 - c1 * P([0, 1]) * P([2 * c, 1])
    a, b = k["a"], k["b"]
    u = P([-a, b, 1.0])
    return 4 * alpha * b * u ** 2 * (u - c1) - c1 * P([0, 1]) * P([b, 2.0]) ** 2 * P([2 * a, -b])


def sextic_coefficients(a, b, c1, alpha):
    """Coefficients (P0..P6) of the aK + bH = 1 compatibility sextic, explicit form."""
    al = alpha
    P6 = 4 * al * b
    P5 = 12 * al * b ** 2
    P4 = 4 * (al * b * (-3 * a + 3 * b ** 2 - c1) + b * c1)
    P3 = 4 * (al * b ** 2 * (b ** 2 - 6 * a - 2 * c1) - c1 * (2 * a - b ** 2))
    P2 = 4 * al * b * (3 * a ** 2 - 3 * a * b ** 2 + 2 * a * c1 - b ** 2 * c1) - c1 * (8 * a * b - b ** 3)
    P1 = 4 * al * b ** 2 * (3 * a ** 2 + 2 * a * c1) - 2 * a * b ** 2 * c1
    P0 = -4 * al * b * a ** 2 * (a + c1)
    return np.array([P0, P1, P2, P3, P4, P5, P6])


def cubic_coefficients(c, c1, alpha):
    """Coefficients (P0..P3) of the H = cK compatibility cubic, explicit form."""
    al = alpha
    return np.array([4 * al * c ** 2 * (c + c1), 4 * al * (3 * c ** 2 + 2 * c * c1) - 2 * c * c1,
                     4 * al * (3 * c + c1) - c1, 4 * al])


@dataclass
class NonexistenceVerdict:
    passed: bool
    min_abs: float
    roots: list
    excluded_fraction: float
    threshold: float
    alpha: float
    family: str

    def to_dict(self):
        return dict(self.__dict__)


def weingarten_nonexistence_witness(solution, alpha, threshold=1e-3, window=0.02, n=2001,
                                    r_range=None):
    """Confirm that a Weingarten surface of revolution is not a K^alpha-translator.

    Evaluates the compatibility residual on ``n`` radii, removes a window of
    relative width ``window`` around each isolated sign change, and passes
    when the remaining minimum |residual| is at least ``threshold``.
    """
    lo, hi = r_range if r_range is not None else solution.r_range
    # stay off the table ends, where r' may reach +-1
    pad = 1e-6 * (hi - lo)
    r = np.linspace(lo + pad, hi - pad, n)
    R = compatibility_residual(solution, alpha, r)
    finite = np.isfinite(R)
    sgn = np.sign(R)
    roots = []
    for i in np.flatnonzero(finite[:-1] & finite[1:] & (sgn[:-1] * sgn[1:] < 0)):
        roots.append(float(optimize.brentq(lambda x: float(compatibility_residual(solution, alpha, np.array([x]))[0]),
                                           r[i], r[i + 1])))
    keep = finite.copy()
    half = window * (hi - lo)
    for x in roots:
        keep &= np.abs(r - x) > half
    frac = 1.0 - keep.sum() / n
    mn = float(np.min(np.abs(R[keep]))) if keep.any() else 0.0
    passed = bool(keep.sum() >= n // 2 and mn >= threshold)
    return NonexistenceVerdict(passed, mn, roots, float(frac), threshold, float(alpha), solution.family)


@dataclass
class WeingartenFit:
    coeffs: tuple
    rms: float


def weingarten_fit(K, H):
    """Best unit-norm (a, b, c) for a K + 2 b H + c = 0 in least squares.

    ``rms`` is the root-mean-square of a K + 2 b H + c with |(a, b, c)| = 1.
    """
    K = np.ravel(np.asarray(K, float))
    H = np.ravel(np.asarray(H, float))
    A = np.column_stack((K, 2.0 * H, np.ones_like(K)))
    _, sv, vt = np.linalg.svd(A, full_matrices=False)
    return WeingartenFit(tuple(float(x) for x in vt[-1]), float(sv[-1] / np.sqrt(len(K))))
