"""Command-line front end.

    kalpha <command> [--config run.json] [--out DIR] [--tolerance T] [--grid NxM] [--seed N]

Commands: curvature, translator, solve, flow, witness, export.
Exit codes: 0 pass, 2 verification failed, 1 usage or configuration error.
Logging verbosity comes from KALPHA_LOG (quiet, info, debug).
"""
import argparse
import json
import logging
import os
import sys
import tempfile

import numpy as np

from . import __version__
from . import flow as fl
from . import translator as tr
from .canal import RadiusProfile, build_canal, make_spine, surface_of_revolution, torus
from .errors import ConfigError, KalphaError, UnknownWitness
from .geometry import GridSpec, curvature_field, grid_parameters, plane, sphere
from .witnesses import WITNESSES, run_witness

SCHEMA = "kalpha/1"
EXIT_PASS, EXIT_ERROR, EXIT_FAIL = 0, 1, 2

log = logging.getLogger("kalpha")


# ---------------------------------------------------------------------------
# config access
# ---------------------------------------------------------------------------
class Config:
    """Dotted-path access into a JSON document with precise missing-field errors."""

    def __init__(self, data, path=""):
        self.data = data
        self.path = path

    def _name(self, key):
        return f"{self.path}.{key}" if self.path else key

    def has(self, key):
        return isinstance(self.data, dict) and key in self.data

    def get(self, key, default=None):
        return self.data.get(key, default) if isinstance(self.data, dict) else default

    def req(self, key):
        if not self.has(key):
            raise ConfigError(f"missing required field '{self._name(key)}'")
        return self.data[key]

    def sub(self, key, required=True):
        if not self.has(key):
            if required:
                raise ConfigError(f"missing required field '{self._name(key)}'")
            return Config({}, self._name(key))
        val = self.data[key]
        if not isinstance(val, dict):
            raise ConfigError(f"field '{self._name(key)}' must be an object")
        return Config(val, self._name(key))

    def num(self, key, default=None):
        val = self.req(key) if default is None and not self.has(key) else self.get(key, default)
        try:
            return float(val)
        except (TypeError, ValueError):
            raise ConfigError(f"field '{self._name(key)}' must be a number, got {val!r}") from None

    def pair(self, key, default=None):
        val = self.get(key, default) if default is not None else self.req(key)
        if not (isinstance(val, (list, tuple)) and len(val) == 2):
            raise ConfigError(f"field '{self._name(key)}' must be a two-element list")
        return float(val[0]), float(val[1])


def load_config(path):
    if path is None:
        return Config({"schema": SCHEMA})
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    schema = data.get("schema")
    if schema is None:
        raise ConfigError("missing required field 'schema'")
    if schema != SCHEMA:
        raise ConfigError(f"unsupported schema {schema!r}, expected {SCHEMA!r}")
    return Config(data)


# ---------------------------------------------------------------------------
# builders
# ---------------------------------------------------------------------------
def build_radius(rc):
    """RadiusProfile (and the quadrature solution, if any) from a radius spec."""
    if rc.has("constant"):
        r0 = rc.num("constant")
        return RadiusProfile.constant(r0, rc.pair("interval", (0.0, 1.0))), None
    if rc.has("ode"):
        oc = rc.sub("ode")
        res = tr.solve_radius_ode(oc.num("alpha"), oc.num("r0"), oc.num("dr0"), oc.pair("s_span"),
                                  branch=int(oc.get("branch", 1)))
        return res.profile, res
    family = rc.req("family")
    if family in tr.FAMILY_ALPHA:
        need, maker = tr.FAMILY_CONSTANTS[family], tr.quadrature_radius
    elif family in ("WC1", "WC2", "weingarten-WC1", "weingarten-WC2"):
        key = family if family.startswith("weingarten-") else f"weingarten-{family}"
        need, maker = tr.FAMILY_CONSTANTS[key], tr.weingarten_radius
    else:
        raise ConfigError(f"unknown radius family {family!r} at '{rc._name('family')}'")
    cc = rc.sub("constants")
    consts = {k: cc.num(k) for k in need}
    c2 = rc.get("c2")
    sol = maker(family, consts, int(rc.get("branch", 1)), rc.pair("r_range"),
                c2=None if c2 is None else float(c2))
    return sol.profile(), sol


def build_spine(sc):
    kind = sc.req("kind")
    if kind == "line":
        return make_spine("line")
    if kind == "circle":
        return make_spine("circle", radius=sc.num("radius"))
    if kind == "helix":
        return make_spine("helix", a=sc.num("a"), b=sc.num("b"), turns=sc.num("turns", 2.0))
    raise ConfigError(f"unknown spine kind {kind!r} at '{sc._name('kind')}'")


def build_surface(cfg):
    """Returns (chart, canal surface or None, quadrature solution or None)."""
    sc = cfg.sub("surface")
    kind = sc.req("kind")
    s_range = sc.pair("s_range") if sc.has("s_range") else None
    if kind == "sphere":
        return sphere(sc.num("radius", 1.0)), None, None
    if kind == "plane":
        return plane(sc.num("extent", 1.0)), None, None
    if kind == "torus":
        surf = torus(sc.num("R"), sc.num("r"))
        return surf.chart, surf, None
    if kind in ("revolution", "canal", "tube"):
        prof, sol = build_radius(sc.sub("radius"))
        if kind == "revolution":
            surf = surface_of_revolution(prof, s_range)
        else:
            surf = build_canal(build_spine(sc.sub("spine")), prof, s_range)
        return surf.chart, surf, sol
    raise ConfigError(f"unknown surface kind {kind!r} at 'surface.kind'")


def grid_from(cfg, args, default=(50, 32)):
    if args.grid:
        return GridSpec.parse(args.grid)
    sc = cfg.sub("surface", required=False)
    g = sc.get("grid", cfg.get("grid", list(default)))
    if isinstance(g, str):
        return GridSpec.parse(g)
    try:
        return GridSpec(int(g[0]), int(g[1]))
    except (TypeError, IndexError, ValueError):
        raise ConfigError(f"bad grid {g!r}") from None


def tolerance_from(cfg, args, default):
    if args.tolerance is not None:
        return args.tolerance
    return float(cfg.get("tolerance", default))


def translator_spec(cfg):
    tc = cfg.sub("translator", required=False)
    return tr.TranslatorSpec(tc.num("alpha", 1.0), tuple(tc.get("w", (0.0, 0.0, 1.0))))


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------
def _fmt(x):
    return "%.17g" % x


def atomic_write(path, text):
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def csv_text(header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) if isinstance(v, (float, np.floating)) else str(v) for v in row))
    return "\n".join(lines) + "\n"


def json_text(obj):
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=True) + "\n"


def mesh_from_chart(chart, grid):
    """Vertices, triangle faces (0-based) and the (s, t) arrays of the grid."""
    S, T = grid_parameters(chart, grid)
    V = chart(S, T).reshape(-1, 3)
    ns, nt = S.shape
    idx = np.arange(ns * nt).reshape(ns, nt)
    wrap = chart.periodic[1]
    cols = nt if wrap else nt - 1
    faces = []
    for i in range(ns - 1):
        for j in range(cols):
            j2 = (j + 1) % nt
            a, b, c, d = idx[i, j], idx[i + 1, j], idx[i + 1, j2], idx[i, j2]
            faces.append((a, b, c))
            faces.append((a, c, d))
    F = np.array(faces, dtype=np.int64)
    # drop slivers (e.g. at chart poles)
    bbox2 = float(np.sum((V.max(0) - V.min(0)) ** 2))
    area = 0.5 * np.linalg.norm(np.cross(V[F[:, 1]] - V[F[:, 0]], V[F[:, 2]] - V[F[:, 0]]), axis=1)
    F = F[area > 1e-14 * bbox2]
    return V, F, S.ravel(), T.ravel()


def obj_text(V, F):
    lines = ["v %s %s %s" % tuple(_fmt(x) for x in v) for v in V]
    lines += ["f %d %d %d" % tuple(int(i) + 1 for i in f) for f in F]
    return "\n".join(lines) + "\n"


def write_mesh(out_dir, stem, chart, grid, spec=None):
    V, F, s, t = mesh_from_chart(chart, grid)
    if not np.all(np.isfinite(V)):
        raise KalphaError("mesh has non-finite vertices")
    f = curvature_field(chart, s, t)
    header = ["vertex", "s", "theta", "K", "H"]
    cols = [np.arange(len(s)), s, t, f.K, f.H]
    if spec is not None:
        Ka, _ = tr.real_power(f.K, spec.alpha)
        proj = f.U @ np.asarray(spec.w)
        r1, r2 = Ka - proj, Ka + proj
        header.append("residual")
        cols.append(np.where(np.nanmax(np.abs(r1)) <= np.nanmax(np.abs(r2)), r1, r2))
    rows = [(int(c[0]),) + tuple(float(x) for x in c[1:]) for c in zip(*cols)]
    atomic_write(os.path.join(out_dir, f"{stem}.obj"), obj_text(V, F))
    atomic_write(os.path.join(out_dir, f"{stem}_scalars.csv"), csv_text(header, rows))
    return len(V), len(F)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------
def cmd_curvature(cfg, args):
    chart, surf, _ = build_surface(cfg)
    grid = grid_from(cfg, args)
    S, T = grid_parameters(chart, grid)
    f = curvature_field(chart, S, T)
    header = ["s", "theta", "K", "H", "k1", "k2"]
    cols = [S.ravel(), T.ravel(), f.K.ravel(), f.H.ravel(), f.k1.ravel(), f.k2.ravel()]
    if surf is not None:
        r, r1, *_ = surf.radius.derivs(S.ravel())
        header += ["r", "dr"]
        cols += [r, r1]
    rows = [tuple(float(x) for x in c) for c in zip(*cols)]
    path = os.path.join(args.out, "curvature.csv")
    atomic_write(path, csv_text(header, rows))
    print(f"wrote {len(rows)} rows to {path}")
    return EXIT_PASS


def cmd_translator(cfg, args):
    chart, _, _ = build_surface(cfg)
    spec = translator_spec(cfg)
    rep = tr.translator_residual(chart, spec, grid_from(cfg, args), tol=tolerance_from(cfg, args, 1e-6))
    d = rep.to_dict()
    d["alpha"], d["w"] = spec.alpha, list(spec.w)
    atomic_write(os.path.join(args.out, "translator_report.json"), json_text(d))
    print(f"verdict: {rep.verdict}")
    print(f"max_abs: {_fmt(rep.max_abs)}")
    print(f"mean_abs: {_fmt(rep.mean_abs)}")
    print(f"skipped_fraction: {_fmt(rep.skipped_fraction)}")
    return EXIT_PASS if rep.passed else EXIT_FAIL


def cmd_solve(cfg, args):
    sc = cfg.sub("surface", required=False)
    rc = sc.sub("radius") if sc.has("radius") else cfg.sub("radius")
    prof, sol = build_radius(rc)
    n = int(cfg.get("samples", 201))
    s = np.linspace(*prof.interval, n)
    r, r1, *_ = prof.derivs(s)
    rows = [(float(a), float(b), float(c)) for a, b, c in zip(s, r, r1)]
    atomic_write(os.path.join(args.out, "radius.csv"), csv_text(["s", "r", "dr"], rows))
    info = {"interval": list(prof.interval), "length": prof.interval[1] - prof.interval[0],
            "representation": prof.representation}
    if isinstance(sol, tr.QuadratureSolution):
        info.update(family=sol.family, constants=sol.constants, branch=sol.branch, c2=sol.c2)
    elif sol is not None:
        info.update(stop_reason=sol.reason)
    if cfg.get("mesh", False):
        surf = surface_of_revolution(prof)
        grid = grid_from(cfg, args, (80, 48))
        nv, nf = write_mesh(args.out, "surface", surf.chart, grid)
        info.update(mesh_vertices=nv, mesh_faces=nf)
    atomic_write(os.path.join(args.out, "solve_report.json"), json_text(info))
    print(f"validity interval: [{_fmt(prof.interval[0])}, {_fmt(prof.interval[1])}]")
    return EXIT_PASS


def cmd_flow(cfg, args):
    fc = cfg.sub("flow")
    init = fc.req("initial")
    n = int(fc.get("nodes", 400))
    alpha = fc.num("alpha", 1.0)
    if init == "sphere":
        state = fl.circle_arc(fc.num("radius", 1.0), n)
        boundary = fc.get("boundary", "free")
    elif init == "radius":
        prof, _ = build_radius(fc.sub("radius"))
        s_range = fc.pair("s_range") if fc.has("s_range") else None
        state = fl.profile_from_radius(prof, n, s_range)
        boundary = fc.get("boundary", "translate")
    else:
        raise ConfigError(f"unknown flow initial {init!r} at 'flow.initial'")
    horizon = fc.num("horizon")
    snaps = tuple(fc.get("snapshots", [horizon]))
    w = fc.get("w", [0.0, 0.0, 1.0])
    run = fl.FlowRun(state, alpha, fc.num("dt"), horizon, snaps, scheme=fc.get("scheme", "implicit"),
                     boundary=boundary, velocity=(0.0, -float(w[2])))
    res = fl.run(run)
    atomic_write(os.path.join(args.out, "flow_snapshots.csv"),
                 csv_text(["t", "u", "rho", "z"], [(float(a), int(b), float(c), float(d)) for a, b, c, d in res.rows()]))
    report = {"times": res.times, "deviations": res.deviations, "steps": res.steps, "boundary": boundary}
    expect = fc.get("expect")
    ok = True
    if expect == "translator":
        tol = tolerance_from(cfg, args, 5e-3)
        ok = max(res.deviations) <= tol
        report["tolerance"] = tol
    elif expect == "sphere":
        R3 = np.array([fl.fit_sphere_radius(s) for s in res.states]) ** 3
        slope = float(np.polyfit(res.times, R3, 1)[0]) if len(R3) > 1 else float("nan")
        report["R3_slope"] = slope
        ok = abs(slope + 3.0) <= 0.06
    report["verdict"] = "pass" if ok else "fail"
    atomic_write(os.path.join(args.out, "flow_report.json"), json_text(report))
    print(f"verdict: {report['verdict']}")
    for t, d in zip(res.times, res.deviations):
        print(f"t={_fmt(t)} deviation={_fmt(d)}")
    return EXIT_PASS if ok else EXIT_FAIL


def cmd_witness(cfg, args):
    wid = args.id or cfg.sub("witness", required=False).get("id")
    if wid is None:
        raise ConfigError("missing required field 'witness.id'")
    tol = args.tolerance if args.tolerance is not None else cfg.get("tolerance")
    rep = run_witness(wid, seed=args.seed, tol=tol)
    text = json_text(rep.to_dict())
    atomic_write(os.path.join(args.out, f"witness_{wid}.json"), text)
    sys.stdout.write(text)
    return EXIT_PASS if rep.passed else EXIT_FAIL


def cmd_export(cfg, args):
    chart, _, _ = build_surface(cfg)
    spec = translator_spec(cfg) if cfg.has("translator") else None
    nv, nf = write_mesh(args.out, cfg.get("name", "surface"), chart, grid_from(cfg, args), spec)
    print(f"wrote mesh with {nv} vertices and {nf} faces")
    return EXIT_PASS


COMMANDS = {
    "curvature": cmd_curvature,
    "translator": cmd_translator,
    "solve": cmd_solve,
    "flow": cmd_flow,
    "witness": cmd_witness,
    "export": cmd_export,
}


def make_parser():
    p = argparse.ArgumentParser(prog="kalpha", description="K^alpha-translators, canal and offset surfaces")
    p.add_argument("--version", action="version", version=f"kalpha {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="JSON run configuration")
        sp.add_argument("--out", default=".", help="output directory")
        sp.add_argument("--tolerance", type=float, default=None)
        sp.add_argument("--grid", default=None, help="grid as NxM")
        sp.add_argument("--seed", type=int, default=0)
        if name == "witness":
            sp.add_argument("id", nargs="?", default=None,
                            help="witness id: " + ", ".join(WITNESSES))
    return p


def _setup_logging():
    level = {"quiet": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}.get(
        os.environ.get("KALPHA_LOG", "quiet").lower(), logging.ERROR)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def main(argv=None):
    _setup_logging()
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ERROR if exc.code else EXIT_PASS
    try:
        cfg = load_config(args.config)
        if args.grid:
            GridSpec.parse(args.grid)
        return COMMANDS[args.command](cfg, args)
    except (ConfigError, UnknownWitness, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except KalphaError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
