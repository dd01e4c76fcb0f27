"""Hot numeric kernels with a numba path and a pure-numpy fallback.

The numba path is used when numba imports cleanly and the environment
variable ``KALPHA_NO_NUMBA`` is unset or ``0``.  Both implementations are
importable as ``<name>_numba`` / ``<name>_numpy`` so they can be compared
directly (see ``benchmarks/bench_kernels.py``).
"""
import os

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except Exception:  # pragma: no cover
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]

        def wrapper(func):
            return func

        return wrapper


USE_NUMBA = HAVE_NUMBA and os.environ.get("KALPHA_NO_NUMBA", "0") in ("", "0")


# ---------------------------------------------------------------------------
# Finite-difference weights (Fornberg's recursion)
# ---------------------------------------------------------------------------
def _fd_weights_core(x0, nodes, order):
    n = nodes.shape[0]
    c = np.zeros((order + 1, n))
    c1 = 1.0
    c4 = nodes[0] - x0
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, order)
        c2 = 1.0
        c5 = c4
        c4 = nodes[i] - x0
        for j in range(i):
            c3 = nodes[i] - nodes[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[k, i] = c1 * (k * c[k - 1, i - 1] - c5 * c[k, i - 1]) / c2
                c[0, i] = -c1 * c5 * c[0, i - 1] / c2
            for k in range(mn, 0, -1):
                c[k, j] = (c4 * c[k, j] - k * c[k - 1, j]) / c3
            c[0, j] = c4 * c[0, j] / c3
        c1 = c2
    return c


def fd_weights(x0, nodes, order):
    """Weights c[k, j] so that sum_j c[k, j] f(nodes[j]) ~ f^(k)(x0), k <= order."""
    return _fd_weights_core(float(x0), np.asarray(nodes, dtype=float), int(order))


_fd_weights_numba = njit(cache=True)(_fd_weights_core)


# ---------------------------------------------------------------------------
# Curvatures from first and second partials
# ---------------------------------------------------------------------------
def shape_from_partials_numpy(Xs, Xt, Xss, Xst, Xtt, threshold):
    """Vectorised fundamental forms and curvatures for (N, 3) partial arrays.

    Returns ``(U, forms, curv, cross_norm)`` with ``forms = (E, F, G, e, f, g)``
    stacked as an (N, 6) array and ``curv = (K, H, k1, k2)`` as (N, 4).
    Degenerate rows (cross norm below ``threshold``) hold NaN.
    """
    with np.errstate(invalid="ignore"):  # NaN partials mark singular rows
        cr = np.cross(Xs, Xt)
    nrm = np.sqrt(np.einsum("ij,ij->i", cr, cr))
    ok = nrm >= threshold
    safe = np.where(ok, nrm, 1.0)
    U = cr / safe[:, None]
    U[~ok] = np.nan
    E = np.einsum("ij,ij->i", Xs, Xs)
    F = np.einsum("ij,ij->i", Xs, Xt)
    G = np.einsum("ij,ij->i", Xt, Xt)
    e = np.einsum("ij,ij->i", Xss, U)
    f = np.einsum("ij,ij->i", Xst, U)
    g = np.einsum("ij,ij->i", Xtt, U)
    det = E * G - F * F
    K = (e * g - f * f) / det
    H = (e * G - 2.0 * f * F + g * E) / (2.0 * det)
    root = np.sqrt(np.maximum(H * H - K, 0.0))
    forms = np.column_stack((E, F, G, e, f, g))
    curv = np.column_stack((K, H, H + root, H - root))
    return U, forms, curv, nrm


def _shape_from_partials_loop(Xs, Xt, Xss, Xst, Xtt, threshold):
    n = Xs.shape[0]
    U = np.empty((n, 3))
    forms = np.empty((n, 6))
    curv = np.empty((n, 4))
    nrm = np.empty(n)
    for i in range(n):
        cx = Xs[i, 1] * Xt[i, 2] - Xs[i, 2] * Xt[i, 1]
        cy = Xs[i, 2] * Xt[i, 0] - Xs[i, 0] * Xt[i, 2]
        cz = Xs[i, 0] * Xt[i, 1] - Xs[i, 1] * Xt[i, 0]
        m = np.sqrt(cx * cx + cy * cy + cz * cz)
        nrm[i] = m
        if m < threshold:
            for k in range(3):
                U[i, k] = np.nan
            for k in range(6):
                forms[i, k] = np.nan
            for k in range(4):
                curv[i, k] = np.nan
            continue
        ux = cx / m
        uy = cy / m
        uz = cz / m
        U[i, 0] = ux
        U[i, 1] = uy
        U[i, 2] = uz
        E = Xs[i, 0] * Xs[i, 0] + Xs[i, 1] * Xs[i, 1] + Xs[i, 2] * Xs[i, 2]
        F = Xs[i, 0] * Xt[i, 0] + Xs[i, 1] * Xt[i, 1] + Xs[i, 2] * Xt[i, 2]
        G = Xt[i, 0] * Xt[i, 0] + Xt[i, 1] * Xt[i, 1] + Xt[i, 2] * Xt[i, 2]
        e = Xss[i, 0] * ux + Xss[i, 1] * uy + Xss[i, 2] * uz
        f = Xst[i, 0] * ux + Xst[i, 1] * uy + Xst[i, 2] * uz
        g = Xtt[i, 0] * ux + Xtt[i, 1] * uy + Xtt[i, 2] * uz
        det = E * G - F * F
        K = (e * g - f * f) / det
        H = (e * G - 2.0 * f * F + g * E) / (2.0 * det)
        disc = H * H - K
        root = np.sqrt(disc) if disc > 0.0 else 0.0
        forms[i, 0] = E
        forms[i, 1] = F
        forms[i, 2] = G
        forms[i, 3] = e
        forms[i, 4] = f
        forms[i, 5] = g
        curv[i, 0] = K
        curv[i, 1] = H
        curv[i, 2] = H + root
        curv[i, 3] = H - root
    return U, forms, curv, nrm


shape_from_partials_numba = njit(cache=True)(_shape_from_partials_loop)


# ---------------------------------------------------------------------------
# Point-to-polyline distance
# ---------------------------------------------------------------------------
def polyline_distance_numpy(points, poly):
    """Distance from each row of ``points`` to the polyline through ``poly``."""
    a = poly[:-1]
    b = poly[1:]
    ab = b - a
    L2 = np.einsum("ij,ij->i", ab, ab)
    L2 = np.where(L2 > 0.0, L2, 1.0)
    out = np.empty(len(points))
    # chunked to bound memory at (chunk, segments, dim)
    chunk = max(1, 2_000_000 // max(len(a), 1))
    for start in range(0, len(points), chunk):
        p = points[start:start + chunk, None, :]
        t = np.einsum("psd,sd->ps", p - a[None], ab) / L2[None]
        t = np.clip(t, 0.0, 1.0)
        proj = a[None] + t[..., None] * ab[None]
        d2 = np.sum((p - proj) ** 2, axis=-1)
        out[start:start + chunk] = np.sqrt(d2.min(axis=1))
    return out


def _polyline_distance_loop(points, poly):
    n = points.shape[0]
    m = poly.shape[0]
    dim = points.shape[1]
    out = np.empty(n)
    for i in range(n):
        best = np.inf
        for j in range(m - 1):
            L2 = 0.0
            dot = 0.0
            for k in range(dim):
                ab = poly[j + 1, k] - poly[j, k]
                L2 += ab * ab
                dot += (points[i, k] - poly[j, k]) * ab
            t = dot / L2 if L2 > 0.0 else 0.0
            if t < 0.0:
                t = 0.0
            elif t > 1.0:
                t = 1.0
            d2 = 0.0
            for k in range(dim):
                q = poly[j, k] + t * (poly[j + 1, k] - poly[j, k]) - points[i, k]
                d2 += q * q
            if d2 < best:
                best = d2
        out[i] = np.sqrt(best)
    return out


polyline_distance_numba = njit(cache=True)(_polyline_distance_loop)


# ---------------------------------------------------------------------------
# Arc-length derivative stencils on a polyline (used by the meridian flow)
# ---------------------------------------------------------------------------
def curve_stencils_numpy(sigma):
    """First/second derivative weights w.r.t. the nodal coordinate ``sigma``.

    Interior nodes use three-point nonuniform stencils; the two end nodes use
    four-point one-sided stencils.  Returns ``(cols, d1, d2)``, each (n, 4).
    """
    n = len(sigma)
    cols = np.zeros((n, 4), dtype=np.int64)
    d1 = np.zeros((n, 4))
    d2 = np.zeros((n, 4))
    hm = sigma[1:-1] - sigma[:-2]
    hp = sigma[2:] - sigma[1:-1]
    hs = hm + hp
    i = np.arange(1, n - 1)
    cols[1:-1, 0] = i - 1
    cols[1:-1, 1] = i
    cols[1:-1, 2] = i + 1
    cols[1:-1, 3] = i
    d1[1:-1, 0] = -hp / (hm * hs)
    d1[1:-1, 1] = (hp - hm) / (hm * hp)
    d1[1:-1, 2] = hm / (hp * hs)
    d2[1:-1, 0] = 2.0 / (hm * hs)
    d2[1:-1, 1] = -2.0 / (hm * hp)
    d2[1:-1, 2] = 2.0 / (hp * hs)
    for row, idx in ((0, np.arange(4)), (n - 1, np.arange(n - 4, n))):
        w = fd_weights(sigma[row], sigma[idx], 2)
        cols[row] = idx
        d1[row] = w[1]
        d2[row] = w[2]
    return cols, d1, d2


def _curve_stencils_loop(sigma):
    n = sigma.shape[0]
    cols = np.zeros((n, 4), dtype=np.int64)
    d1 = np.zeros((n, 4))
    d2 = np.zeros((n, 4))
    for i in range(1, n - 1):
        hm = sigma[i] - sigma[i - 1]
        hp = sigma[i + 1] - sigma[i]
        hs = hm + hp
        cols[i, 0] = i - 1
        cols[i, 1] = i
        cols[i, 2] = i + 1
        cols[i, 3] = i
        d1[i, 0] = -hp / (hm * hs)
        d1[i, 1] = (hp - hm) / (hm * hp)
        d1[i, 2] = hm / (hp * hs)
        d2[i, 0] = 2.0 / (hm * hs)
        d2[i, 1] = -2.0 / (hm * hp)
        d2[i, 2] = 2.0 / (hp * hs)
    for i, lo in ((0, 0), (n - 1, n - 4)):
        w = _fd_weights_numba(sigma[i], sigma[lo:lo + 4].copy(), 2)
        for j in range(4):
            cols[i, j] = lo + j
            d1[i, j] = w[1, j]
            d2[i, j] = w[2, j]
    return cols, d1, d2


curve_stencils_numba = njit(cache=True)(_curve_stencils_loop)


if USE_NUMBA:
    shape_from_partials = shape_from_partials_numba
    polyline_distance = polyline_distance_numba
    curve_stencils = curve_stencils_numba
else:
    shape_from_partials = shape_from_partials_numpy
    polyline_distance = polyline_distance_numpy
    curve_stencils = curve_stencils_numpy


def backend():
    """Name of the active kernel backend."""
    return "numba" if USE_NUMBA else "numpy"
