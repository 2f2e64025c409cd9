"""Monte-Carlo harness: intensity estimation, ordinate histograms, empirical
kernel checks, and radial profiles, tied to the closed-form targets.

Counting conventions: a disk of radius R has nu-area R^2 (Lebesgue area over
pi); every intensity below is points per nu-unit area, so the closed-form
targets (1 for zeros, 5/3, 1/3, 4/3 for the critical classes) apply verbatim.
Lebesgue-unit values are the nu values divided by pi.

Determinism: realization i of a run with master seed s uses the draw keyed
(s, i) (the bi-entire field uses (s, 2i) and (s, 2i+1)); aggregation is an
ordered merge over realization indices, so results are bit-identical for any
thread count.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from math import comb, pi
import os

import numpy as np
from scipy.integrate import quad
from scipy.special import gammaln

from . import points as pts
from .fields import (
    DEFAULT_BUFFER,
    DEFAULT_TRUNCATION_TOL,
    sample_coefficients,
    truncation_order,
)
from .kacrice import holomorphic_mean_intensity, ordinate_density
from .special import KernelId, kernel_eval

INTENSITY_KINDS = ("zeros", "critical", "max", "saddle", "holo_critical",
                   "hermite_r_zeros", "bientire_zeros")
_CLASS_OF_KIND = {"max": "local_max", "saddle": "saddle"}
MAX_EXCLUDED_FRACTION = 0.02


@dataclass(frozen=True)
class IntensityEstimate:
    """Count-per-area statistic of a point ensemble, in nu-units."""

    kind: str
    count_mean: float
    area_nu: float
    intensity: float
    std_error: float
    realizations: int
    region_radius: float

    @property
    def intensity_lebesgue(self):
        return self.intensity / pi

    @property
    def std_error_lebesgue(self):
        return self.std_error / pi


@dataclass(frozen=True)
class DensityHistogram:
    """Binned empirical ordinate density with the closed-form column.

    `empirical` and `theoretical` are densities per unit ordinate per nu-area
    (bin counts divided by nu-area and bin width), directly comparable.
    """

    bin_edges: np.ndarray
    empirical: np.ndarray
    std_errors: np.ndarray
    theoretical: np.ndarray
    classification: str

    def __post_init__(self):
        n = self.bin_edges.size - 1
        if not (self.empirical.size == self.std_errors.size
                == self.theoretical.size == n):
            raise ValueError("inconsistent histogram column lengths")
        if np.any(self.empirical < 0) or np.any(self.theoretical < 0):
            raise ValueError("densities must be nonnegative")


@dataclass(frozen=True)
class RealizationPoints:
    """Per-realization finder output kept by the ensemble runner."""

    index: int
    records: tuple
    oracle_count: int | None = None
    retried: bool = False


@dataclass(frozen=True)
class PointEnsemble:
    """Shared Monte-Carlo product: located points for every realization."""

    kind: str
    region_radius: float
    realizations: tuple
    excluded: tuple
    seed: int
    grid_step: float

    @property
    def area_nu(self):
        return self.region_radius**2

    def counts(self, classification=None):
        """Per-realization point counts, optionally restricted to one class."""
        if classification is None:
            return np.array([len(r.records) for r in self.realizations], dtype=float)
        return np.array(
            [sum(1 for p in r.records if p.classification == classification)
             for r in self.realizations], dtype=float)

    def ordinates(self, classification=None):
        """Per-realization ordinate arrays, optionally for one class."""
        out = []
        for r in self.realizations:
            sel = [p.ordinate for p in r.records
                   if classification is None or p.classification == classification]
            out.append(np.array(sel))
        return out


def _map_ordered(fn, n, threads):
    workers = threads if threads and threads > 0 else min(8, os.cpu_count() or 1)
    if workers <= 1 or n <= 1:
        return [fn(i) for i in range(n)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(n)))


def run_point_ensemble(kind, region_radius, realizations, seed, *, r=2,
                       grid_step=pts.GRID_STEP, buffer=DEFAULT_BUFFER,
                       truncation_tol=DEFAULT_TRUNCATION_TOL, threads=1):
    """Locate points for `realizations` independent draws.

    kinds: 'zeros' (cross-checked against the contour-count oracle, with one
    retry at half grid step on disagreement), 'critical', 'holo_critical',
    'hermite_r_zeros' (zeros of the r-fold raising), 'bientire_zeros'.
    Realizations whose oracle disagrees after retry are excluded; more than
    2% exclusions fails the run.
    """
    if kind in ("max", "saddle"):
        kind = "critical"
    if kind not in ("zeros", "critical", "holo_critical", "hermite_r_zeros",
                    "bientire_zeros"):
        raise ValueError(f"unknown ensemble kind {kind!r}")
    order = truncation_order(region_radius + buffer, truncation_tol)

    def one(i):
        if kind == "bientire_zeros":
            draw0 = sample_coefficients(order, seed, 2 * i)
            draw1 = sample_coefficients(order, seed, 2 * i + 1)
            recs = pts.find_bientire_zeros(draw0, draw1, region_radius,
                                           grid_step=grid_step, buffer=buffer)
            return RealizationPoints(i, tuple(recs))
        draw = sample_coefficients(order, seed, i)
        if kind == "critical":
            recs = pts.find_critical_points(draw, region_radius,
                                            grid_step=grid_step, buffer=buffer)
            return RealizationPoints(i, tuple(recs))
        if kind == "holo_critical":
            recs = pts.find_holomorphic_critical(draw, region_radius,
                                                 grid_step=grid_step, buffer=buffer)
            return RealizationPoints(i, tuple(recs))
        if kind == "hermite_r_zeros":
            recs = pts.find_raised_zeros(draw, region_radius, r,
                                         grid_step=grid_step, buffer=buffer)
            return RealizationPoints(i, tuple(recs))
        # zeros, with the independent count oracle
        recs = pts.find_zeros(draw, region_radius, grid_step=grid_step,
                              buffer=buffer)
        try:
            oracle = pts.argument_principle_count(draw, region_radius)
        except pts.OracleFailure:
            return None
        if oracle == len(recs):
            return RealizationPoints(i, tuple(recs), oracle)
        recs = pts.find_zeros(draw, region_radius, grid_step=grid_step / 2,
                              buffer=buffer)
        try:
            oracle = pts.argument_principle_count(draw, region_radius)
        except pts.OracleFailure:
            return None
        if oracle == len(recs):
            return RealizationPoints(i, tuple(recs), oracle, retried=True)
        return None

    outcomes = _map_ordered(one, realizations, threads)
    kept = tuple(o for o in outcomes if o is not None)
    excluded = tuple(i for i, o in enumerate(outcomes) if o is None)
    if len(excluded) > MAX_EXCLUDED_FRACTION * realizations:
        raise RuntimeError(
            f"{len(excluded)} of {realizations} realizations excluded "
            f"(> {MAX_EXCLUDED_FRACTION:.0%})")
    return PointEnsemble(kind, region_radius, kept, excluded, seed, grid_step)


def intensity_from_ensemble(ensemble, kind):
    """IntensityEstimate for a class of an already-computed ensemble."""
    classification = _CLASS_OF_KIND.get(kind)
    counts = ensemble.counts(classification)
    per_real = counts / ensemble.area_nu
    n = per_real.size
    se = float(per_real.std(ddof=1) / np.sqrt(n)) if n > 1 else float("nan")
    return IntensityEstimate(kind, float(counts.mean()), ensemble.area_nu,
                             float(per_real.mean()), se, n,
                             ensemble.region_radius)


def estimate_intensity(kind, region_radius, realizations, seed, *, r=2,
                       grid_step=pts.GRID_STEP, buffer=DEFAULT_BUFFER,
                       truncation_tol=DEFAULT_TRUNCATION_TOL, threads=1):
    """Monte-Carlo intensity of a point kind, with across-realization SE.

    Deterministic given (seed, configuration), independent of thread count.
    """
    if kind not in INTENSITY_KINDS:
        raise ValueError(f"kind must be one of {INTENSITY_KINDS}, got {kind!r}")
    ensemble = run_point_ensemble(kind, region_radius, realizations, seed, r=r,
                                  grid_step=grid_step, buffer=buffer,
                                  truncation_tol=truncation_tol, threads=threads)
    return intensity_from_ensemble(ensemble, kind)


def intensity_target(kind, region_radius, r=2):
    """Closed-form intensity target for a kind, or None when the artifact
    records the estimate without asserting a value."""
    if kind == "zeros":
        return 1.0
    if kind == "critical":
        return 5.0 / 3.0
    if kind == "max":
        return 1.0 / 3.0
    if kind == "saddle":
        return 4.0 / 3.0
    if kind == "holo_critical":
        return holomorphic_mean_intensity(0.0, region_radius)
    if kind == "hermite_r_zeros":
        return r + 0.5 + 1.0 / (4 * r + 2)
    return None


def ordinate_histogram(classification, region_radius, realizations, seed, *,
                       bins=40, x_max=4.0, grid_step=pts.GRID_STEP,
                       buffer=DEFAULT_BUFFER,
                       truncation_tol=DEFAULT_TRUNCATION_TOL, threads=1,
                       ensemble=None):
    """Empirical ordinate-value density of a critical-point class against
    the closed form, binned on [0, x_max].

    classification: 'max', 'sadd' or 'crit'.  x_max must cover [0, 4]; the
    density mass beyond 4 is negligible (< 1e-5).  A precomputed 'critical'
    ensemble may be passed to share the Monte-Carlo work.
    """
    if classification not in ("max", "sadd", "crit"):
        raise ValueError("classification must be 'max', 'sadd' or 'crit'")
    if x_max < 4.0:
        raise ValueError("bins must cover [0, 4]")
    if ensemble is None:
        ensemble = run_point_ensemble("critical", region_radius, realizations,
                                      seed, grid_step=grid_step, buffer=buffer,
                                      truncation_tol=truncation_tol,
                                      threads=threads)
    point_class = {"max": "local_max", "sadd": "saddle", "crit": None}[classification]
    edges = np.linspace(0.0, x_max, bins + 1)
    width = edges[1] - edges[0]
    area = ensemble.area_nu
    per_real = np.stack([
        np.histogram(o, bins=edges)[0] / (area * width)
        for o in ensemble.ordinates(point_class)
    ])
    n = per_real.shape[0]
    empirical = per_real.mean(axis=0)
    se = per_real.std(axis=0, ddof=1) / np.sqrt(n)
    theoretical = np.array([
        quad(lambda x: ordinate_density(classification, x), lo, hi,
             epsabs=1e-12, epsrel=1e-12)[0] / width
        for lo, hi in zip(edges[:-1], edges[1:])
    ])
    return DensityHistogram(edges, empirical, se, theoretical, classification)


# ---------------------------------------------------------------------------
# empirical kernel checks


def _coefficient_matrix(order, seed, indices):
    """Rows of coefficient draws (one per realization index)."""
    out = np.empty((len(indices), order + 1), dtype=complex)
    for row, i in enumerate(indices):
        out[row] = sample_coefficients(order, seed, i).coefficients
    return out


def raised_basis(order, z, r):
    """Vector psi with F_r(z) = a . psi for a coefficient row a.

    psi_k = sum_m C(r, m) (-conj(z))^(r-m) * k!/(k-m)! * z^(k-m) / sqrt(k!).
    """
    z = complex(z)
    k = np.arange(order + 1)
    inv_sqrt_fact = np.exp(-0.5 * gammaln(k + 1.0))
    psi = np.zeros(order + 1, dtype=complex)
    for m in range(r + 1):
        fall = np.where(k >= m, np.exp(gammaln(k + 1.0) - gammaln(k - m + 1.0)), 0.0)
        zz = np.zeros(order + 1, dtype=complex)
        zz[k >= m] = z ** (k[k >= m] - m)
        psi += comb(r, m) * (-np.conj(z)) ** (r - m) * fall * zz * inv_sqrt_fact
    return psi


@dataclass(frozen=True)
class KernelCheckResult:
    """Worst normalized deviation of an empirical kernel from the target."""

    max_deviation: float
    std_error: float
    deviations: np.ndarray
    std_errors: np.ndarray
    pairs: tuple


def empirical_kernel_check(kernel, pairs, draws, seed, *,
                           truncation_tol=DEFAULT_TRUNCATION_TOL):
    """Monte-Carlo covariance of the field with the given kernel at point
    pairs, against the Gaussian-weighted closed form.

    Supported families: 'landau' (field = r-fold raising of the base field)
    and 'bi_entire' (sum of two independent draws).  Returns the worst
    absolute deviation of E[G(z) conj(G(w))] e^{-(|z|^2+|w|^2)/2} from the
    weighted kernel, with its standard error.
    """
    if not isinstance(kernel, KernelId):
        raise TypeError("kernel must be a KernelId")
    if kernel.family == "weyl_heisenberg_hermite":
        raise ValueError("use the stft module for the time-frequency covariance")
    pairs = [(complex(z), complex(w)) for z, w in pairs]
    rmax = max(max(abs(z), abs(w)) for z, w in pairs)
    order = truncation_order(rmax + 1.0, truncation_tol)
    zs = np.array([z for z, _ in pairs])
    ws = np.array([w for _, w in pairs])
    if kernel.family == "landau":
        r = kernel.order
        basis_z = np.stack([raised_basis(order, z, r) for z in zs], axis=1)
        basis_w = np.stack([raised_basis(order, w, r) for w in ws], axis=1)
        a = _coefficient_matrix(order, seed, range(draws))
        gz = a @ basis_z
        gw = a @ basis_w
    else:  # bi_entire: independent draws for the two components
        basis0_z = np.stack([raised_basis(order, z, 0) for z in zs], axis=1)
        basis0_w = np.stack([raised_basis(order, w, 0) for w in ws], axis=1)
        basis1_z = np.stack([raised_basis(order, z, 1) for z in zs], axis=1)
        basis1_w = np.stack([raised_basis(order, w, 1) for w in ws], axis=1)
        a0 = _coefficient_matrix(order, seed, [2 * i for i in range(draws)])
        a1 = _coefficient_matrix(order, seed, [2 * i + 1 for i in range(draws)])
        gz = a0 @ basis0_z + a1 @ basis1_z
        gw = a0 @ basis0_w + a1 @ basis1_w
    weight = np.exp(-0.5 * (np.abs(zs) ** 2 + np.abs(ws) ** 2))
    prods = gz * np.conj(gw) * weight
    mean = prods.mean(axis=0)
    se = np.sqrt((prods.real.var(axis=0, ddof=1)
                  + prods.imag.var(axis=0, ddof=1)) / draws)
    target = np.array([kernel_eval(kernel, z, w) for z, w in pairs]) * weight
    dev = np.abs(mean - target)
    worst = int(np.argmax(dev))
    return KernelCheckResult(float(dev[worst]), float(se[worst]), dev, se,
                             tuple(pairs))


# ---------------------------------------------------------------------------
# radial profile of the holomorphic critical points


@dataclass(frozen=True)
class RadialProfile:
    """Annulus-binned intensity of a radial point process, in nu-units."""

    edges: np.ndarray
    empirical: np.ndarray
    std_errors: np.ndarray
    theoretical: np.ndarray


# ---------------------------------------------------------------------------
# basin ensemble (exploratory)


@dataclass(frozen=True)
class BasinEnsemble:
    """Ensemble means of the basin-graph statistics; rejected realizations
    (unresolved fraction above the gate) are counted, not fatal."""

    zero_neighbor_mean: float
    max_meeting_mean: float
    reports: tuple
    rejected: int
    realizations: int


def basin_ensemble(realizations, seed, *, region_radius=5.0, grid_step=0.15,
                   truncation_tol=DEFAULT_TRUNCATION_TOL, threads=1):
    """Gradient-flow basin statistics averaged over independent draws."""
    from .flow import ZERO_HALO, BasinResolutionError, basin_analysis

    order = truncation_order(region_radius + ZERO_HALO + DEFAULT_BUFFER,
                             truncation_tol)

    def one(i):
        draw = sample_coefficients(order, seed, i)
        try:
            return basin_analysis(draw, region_radius, grid_step)
        except BasinResolutionError:
            return None

    outcomes = _map_ordered(one, realizations, threads)
    reports = tuple(o for o in outcomes if o is not None)
    rejected = sum(1 for o in outcomes if o is None)
    if not reports:
        raise RuntimeError("every basin realization was rejected")
    return BasinEnsemble(
        float(np.mean([r.zero_neighbor_mean for r in reports])),
        float(np.mean([r.max_meeting_mean for r in reports])),
        reports, rejected, realizations)


def holo_radial_profile(edges, realizations, seed, *, grid_step=pts.GRID_STEP,
                        buffer=DEFAULT_BUFFER,
                        truncation_tol=DEFAULT_TRUNCATION_TOL, threads=1):
    """Annulus intensities of the derivative zeros against the radial law
    1 + (1 + rho^2)^(-2)."""
    edges = np.asarray(edges, dtype=float)
    region = float(edges[-1])
    ensemble = run_point_ensemble("holo_critical", region, realizations, seed,
                                  grid_step=grid_step, buffer=buffer,
                                  truncation_tol=truncation_tol, threads=threads)
    areas = edges[1:] ** 2 - edges[:-1] ** 2
    per_real = np.stack([
        np.histogram([abs(p.location) for p in r.records], bins=edges)[0] / areas
        for r in ensemble.realizations
    ])
    n = per_real.shape[0]
    theoretical = np.array([holomorphic_mean_intensity(lo, hi)
                            for lo, hi in zip(edges[:-1], edges[1:])])
    return RadialProfile(edges, per_real.mean(axis=0),
                         per_real.std(axis=0, ddof=1) / np.sqrt(n), theoretical)
