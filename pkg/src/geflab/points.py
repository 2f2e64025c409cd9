"""Locate, refine, deduplicate and classify zeros and critical points.

Targets
-------
* zeros of the analytic base field F,
* zeros of the Chern derivative F1 = dF - conj(z) F (the critical points of
  the weighted modulus; classified into local maxima and saddles),
* zeros of the plain derivative dF (all saddles of the weighted modulus),
* zeros of higher raisings (d/dz - conj(z))^r F,
* zeros of the bi-entire sum of two independent draws.

Pipeline: evaluate the target on a square grid over the search disk, seed
Newton candidates from cells with nonzero winding of the target values
around the cell (plus, for the non-analytic targets, cells whose corner
moduli are small: an adjacent max/saddle pair has cancelling indices and is
invisible to the winding test alone), refine with a damped 2-d Newton on the
Wirtinger pair, deduplicate, and keep points inside the reporting disk.

All residuals and thresholds apply to Gaussian-weighted quantities
(exp(-|z|^2/2)-scaled, normalized to unit field variance): the raw field
grows like exp(|z|^2/2), so unweighted tolerances are meaningless across
the disk.
"""

from dataclasses import dataclass
from math import factorial, pi, sqrt

import numpy as np

from .backend import poly_jets
from .fields import chern_arrays, raised_arrays, scaled_coefficients

GRID_STEP = 0.25
SEARCH_BUFFER = 2.0
MERGE_RADIUS = 1e-6
RESIDUAL_TOL = 1e-10
MAX_NEWTON_ITERS = 50
FALLBACK_MODULUS = 0.45
DEGENERACY_REL_TOL = 1e-12
_SINGULAR_REL_TOL = 1e-14
# fixed sub-cell offsets of the grid origin keep crafted rational zeros off
# cell corners, where the winding test is undefined
_GRID_SHIFT = (0.31830988618, 0.27182818284)


class OracleFailure(RuntimeError):
    """The independent count oracle did not converge."""


@dataclass(frozen=True)
class PointRecord:
    """A located zero or critical point with classification data.

    u and v are the Gaussian-weighted Hessian scalars at the point
    (u = -F e^{-|z|^2/2}, v = dF1 e^{-|z|^2/2}); the ordinate is the weighted
    field modulus |F| e^{-|z|^2/2} there, so ordinate == |u|.
    """

    location: complex
    kind: str
    classification: str
    ordinate: float
    u: complex
    v: complex
    residual: float
    newton_iters: int


@dataclass
class FinderDiagnostics:
    """Tally of the finder's candidate handling."""

    candidates: int = 0
    converged: int = 0
    dropped: int = 0
    merged: int = 0
    degenerate: int = 0
    outside: int = 0

    def merge(self, other):
        for name in ("candidates", "converged", "dropped", "merged",
                     "degenerate", "outside"):
            setattr(self, name, getattr(self, name) + getattr(other, name))


def classify(record):
    """Critical-point class from the Hessian scalars: local max iff
    |u|^2 > |v|^2, saddle iff |u|^2 < |v|^2, degenerate ties excluded."""
    return _classify_uv(record.u, record.v)


def _classify_uv(u, v):
    au2 = abs(u) ** 2
    av2 = abs(v) ** 2
    if abs(au2 - av2) <= DEGENERACY_REL_TOL * (au2 + av2):
        return "not_applicable"
    return "local_max" if au2 > av2 else "saddle"


# ---------------------------------------------------------------------------
# targets


class _Target:
    """A field whose zeros are sought: values plus Wirtinger gradient."""

    scale = 1.0          # sqrt of the weighted variance, for normalization
    analytic = False     # analytic targets skip the low-modulus fallback
    kind = "zero_of_F"

    def values(self, z):
        raise NotImplementedError

    def gradient(self, z):
        """(value, d/dz, d/dconj(z)) at the points z."""
        raise NotImplementedError

    def records(self, z, iters, residual):
        raise NotImplementedError


def _chern_scalars(draw, z):
    """Weighted record ingredients (ordinate, u, v) from the base-field jet."""
    f, _, _, df1 = chern_arrays(draw, z)
    w = np.exp(-0.5 * np.abs(z) ** 2)
    return np.abs(f) * w, -f * w, df1 * w


class _SeriesTarget(_Target):
    """Zeros of an analytic derivative series: deriv=0 is the base field,
    deriv=1 its complex derivative."""

    analytic = True

    def __init__(self, draw, deriv, kind, classification):
        self.draw = draw
        self.deriv = deriv
        self.kind = kind
        self.classification = classification
        self._coeffs = scaled_coefficients(draw)

    def values(self, z):
        return poly_jets(self._coeffs, z, self.deriv)[self.deriv]

    def gradient(self, z):
        s = poly_jets(self._coeffs, z, self.deriv + 1)
        return s[self.deriv], s[self.deriv + 1], np.zeros_like(z)

    def records(self, z, iters, residual):
        ordinate, u, v = _chern_scalars(self.draw, z)
        return [PointRecord(complex(z[i]), self.kind, self.classification,
                            float(ordinate[i]), complex(u[i]), complex(v[i]),
                            float(residual[i]), int(iters[i]))
                for i in range(z.size)]


class _ChernTarget(_Target):
    """Zeros of F1 = dF - conj(z) F: the critical points, classified."""

    kind = "critical"

    def __init__(self, draw):
        self.draw = draw
        self._coeffs = scaled_coefficients(draw)

    def values(self, z):
        s = poly_jets(self._coeffs, z, 1)
        return s[1] - np.conj(z) * s[0]

    def gradient(self, z):
        s = poly_jets(self._coeffs, z, 2)
        zbar = np.conj(z)
        f1 = s[1] - zbar * s[0]
        df1 = s[2] - zbar * s[1]
        return f1, df1, -s[0]

    def records(self, z, iters, residual):
        ordinate, u, v = _chern_scalars(self.draw, z)
        return [PointRecord(complex(z[i]), self.kind, _classify_uv(u[i], v[i]),
                            float(ordinate[i]), complex(u[i]), complex(v[i]),
                            float(residual[i]), int(iters[i]))
                for i in range(z.size)]


class _RaisedTarget(_Target):
    """Zeros of the r-fold raising of the base field (r >= 1)."""

    def __init__(self, draw, r):
        self.draw = draw
        self.r = r
        self.scale = sqrt(factorial(r))
        self.kind = "critical" if r == 1 else "raised_zero"

    def values(self, z):
        return raised_arrays(self.draw, z, self.r)

    def gradient(self, z):
        return raised_arrays(self.draw, z, self.r, with_gradient=True)

    def records(self, z, iters, residual):
        ordinate, u, v = _chern_scalars(self.draw, z)
        classify_r1 = self.r == 1
        return [PointRecord(complex(z[i]), self.kind,
                            _classify_uv(u[i], v[i]) if classify_r1 else "not_applicable",
                            float(ordinate[i]), complex(u[i]), complex(v[i]),
                            float(residual[i]), int(iters[i]))
                for i in range(z.size)]


class _BientireTarget(_Target):
    """Zeros of F(.; draw0) + F1(.; draw1), order-2 polyanalytic."""

    scale = sqrt(2.0)
    kind = "bientire_zero"

    def __init__(self, draw0, draw1):
        if (draw0.seed, draw0.realization_index) == (draw1.seed, draw1.realization_index):
            raise ValueError("bi-entire target needs two independent draws")
        self.c0 = scaled_coefficients(draw0)
        self.c1 = scaled_coefficients(draw1)

    def values(self, z):
        s0 = poly_jets(self.c0, z, 0)
        s1 = poly_jets(self.c1, z, 1)
        return s0[0] + s1[1] - np.conj(z) * s1[0]

    def gradient(self, z):
        s0 = poly_jets(self.c0, z, 1)
        s1 = poly_jets(self.c1, z, 2)
        zbar = np.conj(z)
        val = s0[0] + s1[1] - zbar * s1[0]
        dz = s0[1] + s1[2] - zbar * s1[1]
        return val, dz, -s1[0]

    def records(self, z, iters, residual):
        w = np.exp(-0.5 * np.abs(z) ** 2)
        res = self.values(z)
        return [PointRecord(complex(z[i]), self.kind, "not_applicable",
                            float(abs(res[i]) * w[i]), 0j, 0j,
                            float(residual[i]), int(iters[i]))
                for i in range(z.size)]


# ---------------------------------------------------------------------------
# seeding


def _grid(search_radius, h):
    half = search_radius + 2.0 * h
    x0 = -half + _GRID_SHIFT[0] * h
    y0 = -half + _GRID_SHIFT[1] * h
    nx = int(np.ceil(2.0 * half / h)) + 1
    xs = x0 + h * np.arange(nx)
    ys = y0 + h * np.arange(nx)
    return xs[None, :] + 1j * ys[:, None]


def _cell_winding(vals):
    """Winding of the field values around each grid cell (corner phases)."""
    a = vals[:-1, :-1]
    b = vals[:-1, 1:]
    c = vals[1:, 1:]
    d = vals[1:, :-1]
    total = (np.angle(b * np.conj(a)) + np.angle(c * np.conj(b))
             + np.angle(d * np.conj(c)) + np.angle(a * np.conj(d)))
    return np.rint(total / (2.0 * pi)).astype(int)


def _seed_starts(target, search_radius, h):
    grid = _grid(search_radius, h)
    vals = target.values(grid.ravel()).reshape(grid.shape)
    winding = _cell_winding(vals)
    centers = 0.25 * (grid[:-1, :-1] + grid[:-1, 1:] + grid[1:, 1:] + grid[1:, :-1])
    in_disk = np.abs(centers) <= search_radius + h
    candidate = (winding != 0) & in_disk
    if not target.analytic:
        weighted = np.abs(vals) * np.exp(-0.5 * np.abs(grid) ** 2) / target.scale
        corner_min = np.minimum(np.minimum(weighted[:-1, :-1], weighted[:-1, 1:]),
                                np.minimum(weighted[1:, 1:], weighted[1:, :-1]))
        candidate |= (corner_min < FALLBACK_MODULUS) & in_disk
    cells = centers[candidate]
    if cells.size == 0:
        return np.empty(0, dtype=complex)
    q = 0.25 * h
    offsets = np.array([0, q + 1j * q, q - 1j * q, -q + 1j * q, -q - 1j * q])
    return (cells[:, None] + offsets[None, :]).ravel()


# ---------------------------------------------------------------------------
# refinement


def _newton(target, starts, search_radius, residual_tol, max_iters, step_cap):
    """Damped 2-d Newton on the Wirtinger pair; returns converged points.

    Near-singular Jacobians (|grad_z|^2 close to |grad_zbar|^2, including the
    exactly singular degenerate-ring case) fall back to a Levenberg-damped
    least-squares step on the real 2x2 system.
    """
    z = starts.astype(complex).copy()
    iters = np.zeros(starts.shape, dtype=int)
    out_z, out_iters, out_res = [], [], []
    active = np.arange(z.size)
    dropped = 0
    for it in range(max_iters + 1):
        if active.size == 0:
            break
        za = z[active]
        val, dz, dzbar = target.gradient(za)
        res = np.abs(val) * np.exp(-0.5 * np.abs(za) ** 2) / target.scale
        good = res < residual_tol
        if np.any(good):
            out_z.append(za[good])
            out_iters.append(iters[active[good]])
            out_res.append(res[good])
        alive = ~good
        # quadratic convergence decides in a few steps; wandering seeds
        # (low-modulus fallback cells with no contained zero) are cut early
        if it >= 16:
            hopeless = alive & (res > 1e-4)
            dropped += int(np.count_nonzero(hopeless))
            alive &= ~hopeless
        if it == max_iters:
            dropped += int(np.count_nonzero(alive))
            break
        za, val, dz, dzbar = za[alive], val[alive], dz[alive], dzbar[alive]
        active = active[alive]
        a2 = np.abs(dz) ** 2
        b2 = np.abs(dzbar) ** 2
        det = a2 - b2
        singular = np.abs(det) <= _SINGULAR_REL_TOL * (a2 + b2)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = (dzbar * np.conj(val) - np.conj(dz) * val) / det
        if np.any(singular):
            step[singular] = _levenberg_step(val[singular], dz[singular],
                                             dzbar[singular])
        mag = np.abs(step)
        too_big = mag > step_cap
        step[too_big] *= step_cap / mag[too_big]
        za = za + step
        inside = np.abs(za) <= search_radius + 1.0
        dropped += int(np.count_nonzero(~inside))
        z[active] = za
        iters[active] += 1
        keep = inside
        active = active[keep]
    if out_z:
        return (np.concatenate(out_z), np.concatenate(out_iters),
                np.concatenate(out_res), dropped)
    return np.empty(0, dtype=complex), np.empty(0, dtype=int), np.empty(0), dropped


def _levenberg_step(val, dz, dzbar):
    """Damped least-squares step for (near-)singular Wirtinger Jacobians."""
    j11 = (dz + dzbar).real
    j12 = (dzbar - dz).imag
    j21 = (dz + dzbar).imag
    j22 = (dz - dzbar).real
    g1, g2 = val.real, val.imag
    lam = 1e-9 * (np.abs(dz) ** 2 + np.abs(dzbar) ** 2) + 1e-300
    a = j11 * j11 + j21 * j21 + lam
    b = j11 * j12 + j21 * j22
    c = j12 * j12 + j22 * j22 + lam
    r1 = -(j11 * g1 + j21 * g2)
    r2 = -(j12 * g1 + j22 * g2)
    det = a * c - b * b
    s1 = (c * r1 - b * r2) / det
    s2 = (a * r2 - b * r1) / det
    return s1 + 1j * s2


def _dedup(z, iters, res, merge_radius):
    """Merge points within merge_radius, keeping the best residual.

    Greedy sweep in lexicographic order: converged duplicates agree to far
    better than the merge radius while distinct roots are far apart, so a
    point joins the first open cluster within reach.
    """
    if z.size <= 1:
        return z, iters, res, 0
    order = np.lexsort((z.imag, z.real))
    reps = []          # representative index per cluster
    open_from = 0      # clusters before this can no longer match (re gap)
    assign = np.empty(z.size, dtype=int)
    for idx in order:
        p = z[idx]
        cluster = -1
        for c in range(len(reps) - 1, open_from - 1, -1):
            q = z[reps[c]]
            if p.real - q.real > merge_radius:
                open_from = c + 1
                break
            if abs(p - q) <= merge_radius:
                cluster = c
                break
        if cluster < 0:
            cluster = len(reps)
            reps.append(idx)
        assign[idx] = cluster
        if res[idx] < res[reps[cluster]]:
            reps[cluster] = idx
    keep = np.array(sorted(reps, key=lambda i: (z[i].real, z[i].imag)))
    merged = z.size - keep.size
    return z[keep], iters[keep], res[keep], merged


def _run_finder(target, region_radius, grid_step, buffer, merge_radius,
                residual_tol, max_iters, diagnostics):
    search_radius = region_radius + buffer
    starts = _seed_starts(target, search_radius, grid_step)
    zc, iters, res, dropped = _newton(target, starts, search_radius,
                                      residual_tol, max_iters, grid_step)
    zc, iters, res, merged = _dedup(zc, iters, res, merge_radius)
    inside = np.abs(zc) <= region_radius
    outside = int(np.count_nonzero(~inside))
    records = target.records(zc[inside], iters[inside], res[inside])
    if diagnostics is not None:
        diagnostics.candidates += starts.size
        diagnostics.converged += zc.size
        diagnostics.dropped += dropped
        diagnostics.merged += merged
        diagnostics.outside += outside
        diagnostics.degenerate += sum(
            1 for r in records
            if r.kind == "critical" and r.classification == "not_applicable")
    records.sort(key=lambda r: (r.location.real, r.location.imag))
    return records


def find_zeros(draw, region_radius, *, grid_step=GRID_STEP, buffer=SEARCH_BUFFER,
               merge_radius=MERGE_RADIUS, residual_tol=RESIDUAL_TOL,
               max_iters=MAX_NEWTON_ITERS, diagnostics=None):
    """Zeros of the base field inside |z| <= region_radius.

    The draw must be truncated adequately for region_radius + buffer; the
    search runs on the buffered disk and only interior points are reported.
    """
    target = _SeriesTarget(draw, 0, "zero_of_F", "not_applicable")
    return _run_finder(target, region_radius, grid_step, buffer, merge_radius,
                       residual_tol, max_iters, diagnostics)


def find_critical_points(draw, region_radius, *, grid_step=GRID_STEP,
                         buffer=SEARCH_BUFFER, merge_radius=MERGE_RADIUS,
                         residual_tol=RESIDUAL_TOL, max_iters=MAX_NEWTON_ITERS,
                         diagnostics=None):
    """Zeros of the Chern derivative (critical points of the weighted
    modulus), classified into local maxima and saddles."""
    target = _ChernTarget(draw)
    return _run_finder(target, region_radius, grid_step, buffer, merge_radius,
                       residual_tol, max_iters, diagnostics)


def find_holomorphic_critical(draw, region_radius, *, grid_step=GRID_STEP,
                              buffer=SEARCH_BUFFER, merge_radius=MERGE_RADIUS,
                              residual_tol=RESIDUAL_TOL,
                              max_iters=MAX_NEWTON_ITERS, diagnostics=None):
    """Zeros of the plain derivative dF; by the maximum-modulus principle
    these are all saddle points of the weighted modulus."""
    target = _SeriesTarget(draw, 1, "critical", "saddle")
    return _run_finder(target, region_radius, grid_step, buffer, merge_radius,
                       residual_tol, max_iters, diagnostics)


def find_raised_zeros(draw, region_radius, r, *, grid_step=GRID_STEP,
                      buffer=SEARCH_BUFFER, merge_radius=MERGE_RADIUS,
                      residual_tol=RESIDUAL_TOL, max_iters=MAX_NEWTON_ITERS,
                      diagnostics=None):
    """Zeros of the r-fold raising of the base field (r = 1 reproduces the
    critical points)."""
    if r < 1:
        raise ValueError("raised-zero finder needs r >= 1; use find_zeros for r=0")
    target = _RaisedTarget(draw, r)
    return _run_finder(target, region_radius, grid_step, buffer, merge_radius,
                       residual_tol, max_iters, diagnostics)


def find_bientire_zeros(draw0, draw1, region_radius, *, grid_step=GRID_STEP,
                        buffer=SEARCH_BUFFER, merge_radius=MERGE_RADIUS,
                        residual_tol=RESIDUAL_TOL, max_iters=MAX_NEWTON_ITERS,
                        diagnostics=None):
    """Zeros of the bi-entire sum of two independent draws."""
    target = _BientireTarget(draw0, draw1)
    return _run_finder(target, region_radius, grid_step, buffer, merge_radius,
                       residual_tol, max_iters, diagnostics)


# ---------------------------------------------------------------------------
# independent oracle


def argument_principle_count(draw, region_radius, *, start_nodes=1024,
                             max_nodes=2**20, integer_tol=1e-3,
                             contour_clearance=1e-7):
    """Zero count of the base field in |z| < region_radius by the contour
    integral of dF/F, with adaptive node doubling.

    A weighted field modulus below `contour_clearance` anywhere on the
    contour signals a zero too close to it; the radius is then perturbed
    outward by multiples of 1e-3.  Convergence requires two consecutive node
    counts agreeing on the same integer within integer_tol.
    """
    coeffs = scaled_coefficients(draw)
    for bump in (0.0, 1e-3, 2e-3, 3e-3):
        radius = region_radius + bump
        weight = np.exp(-0.5 * radius * radius)
        nodes = start_nodes
        previous = None
        clear = True
        while nodes <= max_nodes:
            theta = 2.0 * pi * np.arange(nodes) / nodes
            zs = radius * np.exp(1j * theta)
            s = poly_jets(coeffs, zs, 1)
            if np.min(np.abs(s[0])) * weight < contour_clearance:
                clear = False
                break
            w = np.mean(zs * s[1] / s[0])
            k = int(np.rint(w.real))
            if abs(w - k) < integer_tol:
                if previous == k:
                    return k
                previous = k
            else:
                previous = None
            nodes *= 2
        if clear:
            raise OracleFailure(
                f"contour count did not stabilize below {max_nodes} nodes")
    raise OracleFailure("zero too close to every perturbed contour")


def weighted_log_laplacian(draw, z, fd_step=1e-3):
    """5-point finite-difference Laplacian of log(|F| e^{-|z|^2/2}) at the
    points z; equals -2 wherever the field does not vanish."""
    z = np.asarray(z, dtype=complex)
    offsets = np.array([fd_step, -fd_step, 1j * fd_step, -1j * fd_step, 0.0])
    pts = (z[:, None] + offsets[None, :]).ravel()
    f = poly_jets(scaled_coefficients(draw), pts, 0)[0]
    u = (np.log(np.abs(f)) - 0.5 * np.abs(pts) ** 2).reshape(z.size, 5)
    return (u[:, 0] + u[:, 1] + u[:, 2] + u[:, 3] - 4.0 * u[:, 4]) / fd_step**2
