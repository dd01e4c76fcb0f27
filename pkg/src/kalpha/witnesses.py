"""Numerical witnesses for the existence and nonexistence statements.

Each witness is a deterministic pipeline (given a seed) returning a
:class:`WitnessReport` with a verdict and the numeric margins behind it.
"""
from dataclasses import dataclass, field

import numpy as np

from . import offset as off
from . import translator as tr
from .canal import RadiusProfile, build_canal, make_spine, surface_of_revolution, torus
from .errors import UnknownWitness
from .geometry import GridSpec, curvature_field, grid_parameters, sphere


@dataclass
class WitnessReport:
    id: str
    passed: bool
    summary: str
    margins: dict = field(default_factory=dict)

    @property
    def verdict(self):
        return "pass" if self.passed else "fail"

    def to_dict(self):
        return {"id": self.id, "verdict": self.verdict, "summary": self.summary,
                "margins": _plain(self.margins)}


def _plain(x):
    """Convert numpy scalars/arrays inside nested containers to plain Python."""
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return [_plain(v) for v in x.tolist()]
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    return x


# ---------------------------------------------------------------------------
# Reference surfaces
# ---------------------------------------------------------------------------
def alpha1_translator(r_range=(1.0, 1.35), c2=None):
    """Revolution translator for alpha = 1 from the c1 = -2 quadrature family."""
    sol = tr.quadrature_radius("alpha1", {"c1": -2.0}, 1, r_range, c2=c2)
    return sol, surface_of_revolution(sol.profile())


def alpha_neg_half_translator(r_range=(0.72, 0.999), c2=None):
    """Revolution translator for alpha = -1/2 from the c1 = 1 quadrature family."""
    sol = tr.quadrature_radius("alpha12-a", {"c1": 1.0}, 1, r_range, c2=c2)
    return sol, surface_of_revolution(sol.profile())


def random_unit_vectors(rng, n):
    v = rng.normal(size=(n, 3))
    return v / np.linalg.norm(v, axis=1)[:, None]


def weingarten_samples(rng, family, count=5):
    """Random admissible Weingarten revolution profiles (|r'| < 1 on the range)."""
    out = []
    while len(out) < count:
        if family == "WC1":
            c = rng.uniform(-0.5, 1.0)
            c1 = -rng.uniform(0.1, 1.0)
            lo = max(0.2, -c - c1) + 0.1
            consts = {"c": c, "c1": c1}
        else:
            a = rng.uniform(-1.0, 1.0)
            b = rng.uniform(0.5, 2.0) * rng.choice([-1.0, 1.0])
            c1 = rng.uniform(0.1, 1.0)
            rr = np.linspace(0.05, 5.0, 2000)
            ok = (rr * rr + b * rr - a > c1 + 0.05) & (np.abs(2 * a * rr - b * rr * rr) > 1e-3)
            if not ok.any():
                continue
            lo = float(rr[ok][0])
            consts = {"a": a, "b": float(b), "c1": c1}
        try:
            out.append(tr.weingarten_radius(family, consts, 1, (lo, lo + 1.5)))
        except Exception:  # inadmissible draw, try again
            continue
    return out


# ---------------------------------------------------------------------------
# Witness pipelines
# ---------------------------------------------------------------------------
def _sphere_samples(r, grid=GridSpec(12, 12)):
    ch = sphere(r)
    S, T = grid_parameters(ch, grid)
    f = curvature_field(ch, S, T)
    return f.K.ravel(), f.H.ravel()


def w_same_speed_offset(seed=0, tol=1e-8):
    r = 1.5
    K, H = _sphere_samples(r)
    lam = 2.0 * r
    v = off.check_same_speed_conditions(K, H, lam, alpha=0.5, tol=tol)
    # any other lam fails
    other = off.check_same_speed_conditions(K, H, lam * 0.9, alpha=0.5, tol=tol)
    ok = v.case_i and v.dual_i_residual <= tol and not other.case_i
    return WitnessReport("same-speed-offset", ok,
                         "sphere and its offset at twice the radius share the same speed",
                         {"case_i_residual": v.case_i_residual, "dual_i_residual": v.dual_i_residual,
                          "off_lambda_residual": other.case_i_residual, "lam": lam})


def _synthetic_case_ii(rng, lam, n=200):
    K = rng.uniform(-2.0, 2.0, n)
    H = (lam * lam * K + 2.0) / (2.0 * lam)
    return K, H


def w_same_speed_offset_odd(seed=0, tol=1e-8):
    rng = np.random.default_rng(seed)
    lam = 0.7
    K, H = _synthetic_case_ii(rng, lam)
    v3 = off.check_same_speed_conditions(K, H, lam, alpha=3, tol=tol)
    vh = off.check_same_speed_conditions(K, H, lam, alpha=0.5, tol=tol)
    ok = v3.case_ii and v3.dual_ii_residual <= tol and not vh.case_ii
    return WitnessReport("same-speed-offset-odd", ok,
                         "second condition holds for odd alpha and is disabled otherwise",
                         {"case_ii_residual": v3.case_ii_residual, "dual_ii_residual": v3.dual_ii_residual,
                          "non_integer_alpha_disabled": not vh.case_ii_applicable})


def w_half_offset_minimal(seed=0, tol=1e-8):
    rng = np.random.default_rng(seed)
    lam = 1.3
    K = rng.uniform(-2.0, 2.0, 200)
    H = lam * K / 2.0
    v = off.half_offset_checks(K, H, lam, tol)
    return WitnessReport("half-offset-minimal", v.minimal_ok, "offset at lam/2 is minimal",
                         v.to_dict())


def w_half_offset_constant_K(seed=0, tol=1e-8):
    rng = np.random.default_rng(seed)
    lam = 0.7
    K, H = _synthetic_case_ii(rng, lam)
    v = off.half_offset_checks(K, H, lam, tol)
    return WitnessReport("half-offset-constant-K", v.constant_K_ok,
                         "offset at lam/2 has Gauss curvature -4/lam^2", v.to_dict())


def w_scaled_speed_offset(seed=0, tol=1e-8):
    ch = sphere(1.0)
    S, T = grid_parameters(ch, GridSpec(10, 10))
    f = curvature_field(ch, S, T)
    coeffs = off.WeingartenCoeffs(1.0, 1.0, -3.0)
    res = coeffs.residual(f.K, f.H)
    sc = off.scaled_speed_translator(coeffs, 1.0, f.K, f.H)
    par = off.build_parallel(ch, sc.lam)
    g = curvature_field(par.chart, S, T)
    direct = float(np.max(np.abs(g.K - sc.mu * f.K)))
    ok = float(np.max(np.abs(res))) <= tol and sc.max_dev <= tol and direct <= 1e-6
    return WitnessReport("scaled-speed-offset", ok, "offset at lam = -a/b rescales K by mu",
                         {"lam": sc.lam, "mu": sc.mu, "eps": sc.eps, "factor": sc.factor,
                          "formula_dev": sc.max_dev, "direct_dev": direct})


def w_weingarten_transfer(seed=0, tol=1e-10, n=1000):
    rng = np.random.default_rng(seed)
    worst = 0.0
    done = 0
    while done < n:
        a, b, c = rng.uniform(-2, 2, 3)
        lam = rng.uniform(-2, 2)
        K = rng.uniform(-2, 2)
        if abs(b) < 1e-3:
            continue
        H = -(a * K + c) / (2 * b)
        if abs(off._focal_factor(K, H, lam)) < 1e-3:
            continue
        Kb, Hb, _ = off.parallel_curvatures(K, H, lam)
        t = off.weingarten_transfer(off.WeingartenCoeffs(a, b, c), lam)
        worst = max(worst, abs(t.residual(Kb, Hb)) / max(1.0, abs(Kb), abs(Hb)))
        done += 1
    return WitnessReport("weingarten-transfer", worst <= tol, "offset of a Weingarten surface is Weingarten",
                         {"max_residual": worst, "n": n})


def w_canal_speed_alignment(seed=0, tol=1e-8):
    _, surf = alpha1_translator()
    grid = GridSpec(40, 16)
    good = tr.speed_alignment_check(surf, tr.TranslatorSpec(1.0, (0, 0, 1)), grid, tol)
    bad = tr.speed_alignment_check(surf, tr.TranslatorSpec(1.0, (1, 0, 0)), grid, tol)
    ok = good.passed and not bad.passed
    return WitnessReport("canal-speed-alignment", ok, "translating canal surfaces move along the spine",
                         {"aligned": good.to_dict(), "sideways": bad.to_dict()})


def w_tube_nonexistence(seed=0, tol=0.1, n_w=20):
    rng = np.random.default_rng(seed)
    ws = random_unit_vectors(rng, n_w)
    tubes = [torus(3.0, 1.0), build_canal(make_spine("helix", a=2.0, b=1.0, turns=1.0),
                                          RadiusProfile.constant(0.3))]
    worst = np.inf
    for surf in tubes:
        S, T = grid_parameters(surf.chart, GridSpec(24, 32))
        f = curvature_field(surf.chart, S, T)
        for alpha in (1, 2):
            Ka, _ = tr.real_power(f.K, alpha)
            for w in ws:
                proj = f.U @ w
                for sign in (1, -1):
                    ring_max = np.nanmax(np.abs(Ka - sign * proj), axis=1)
                    worst = min(worst, float(ring_max.min()))
    return WitnessReport("tube-nonexistence", worst >= tol,
                         "every ring of every tube violates the translator equation",
                         {"min_ring_max_residual": worst, "threshold": tol, "n_w": n_w})


def _weingarten_witness(family, seed, tol):
    rng = np.random.default_rng(seed)
    sols = weingarten_samples(rng, family)
    rows = []
    ok = True
    for sol in sols:
        for alpha in (1.0, 2.0, -0.5):
            v = tr.weingarten_nonexistence_witness(sol, alpha, threshold=tol)
            ok &= v.passed
            rows.append({"constants": sol.constants, "alpha": alpha, "min_abs": v.min_abs,
                         "roots": v.roots, "passed": v.passed})
    worst = min(r["min_abs"] for r in rows)
    return WitnessReport(f"weingarten-nonexistence-{family}", bool(ok),
                         "no Weingarten surface of revolution is a translator",
                         {"min_residual": worst, "threshold": tol, "cases": rows})


def w_weingarten_nonexistence_wc1(seed=0, tol=1e-3):
    return _weingarten_witness("WC1", seed, tol)


def w_weingarten_nonexistence_wc2(seed=0, tol=1e-3):
    return _weingarten_witness("WC2", seed, tol)


def w_parallel_nonexistence(seed=0, tol=1e-6):
    _, surf = alpha1_translator()
    S, T = grid_parameters(surf.chart, GridSpec(200, 4))
    f = curvature_field(surf.chart, S, T)
    scan = off.lambda_scan(f.K, f.H, 1.0, tol=tol)
    fit = tr.weingarten_fit(f.K[:, 0], f.H[:, 0])
    ok = len(scan.passing) == 0
    return WitnessReport("parallel-nonexistence", ok,
                         "no offset of the alpha = 1 translator shares its speed",
                         {"scan": scan.to_dict(), "weingarten_fit_rms": fit.rms})


def _translator_witness(wid, builder, alpha, tol):
    sol, surf = builder()
    rep = tr.translator_residual(surf.chart, tr.TranslatorSpec(alpha), GridSpec(200, 64), tol=tol)
    lo, hi = surf.radius.interval
    return WitnessReport(wid, rep.passed, f"revolution translator for alpha = {alpha:g}",
                         {"report": rep.to_dict(), "interval": [lo, hi], "length": hi - lo})


def w_translator_alpha1(seed=0, tol=1e-6):
    return _translator_witness("translator-alpha1", alpha1_translator, 1.0, tol)


def w_translator_alpha_neg_half(seed=0, tol=1e-6):
    return _translator_witness("translator-alpha-neg-half", alpha_neg_half_translator, -0.5, tol)


WITNESSES = {
    "same-speed-offset": w_same_speed_offset,
    "same-speed-offset-odd": w_same_speed_offset_odd,
    "half-offset-minimal": w_half_offset_minimal,
    "half-offset-constant-K": w_half_offset_constant_K,
    "scaled-speed-offset": w_scaled_speed_offset,
    "weingarten-transfer": w_weingarten_transfer,
    "canal-speed-alignment": w_canal_speed_alignment,
    "tube-nonexistence": w_tube_nonexistence,
    "weingarten-nonexistence-WC1": w_weingarten_nonexistence_wc1,
    "weingarten-nonexistence-WC2": w_weingarten_nonexistence_wc2,
    "parallel-nonexistence": w_parallel_nonexistence,
    "translator-alpha1": w_translator_alpha1,
    "translator-alpha-neg-half": w_translator_alpha_neg_half,
}


def run_witness(wid, seed=0, tol=None):
    try:
        fn = WITNESSES[wid]
    except KeyError:
        raise UnknownWitness(f"unknown witness {wid!r}; known: {', '.join(sorted(WITNESSES))}") from None
    return fn(seed=seed) if tol is None else fn(seed=seed, tol=tol)
