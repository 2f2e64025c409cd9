"""Numerical short-time Fourier transform and Bargmann transform.

This is the cross-validation track for the time-frequency representation:
the Gaussian-window STFT of truncated white noise (expanded over Hermite
functions) must reproduce, in modulus, the Gaussian-weighted base field of
the series representation with the same coefficients.

Conventions
-----------
* V_g f(x, xi) = integral f(t) conj(g(t - x)) exp(-2 pi i xi t) dt.
* The analytic-plane point z corresponds to the time-frequency point
  conj(z)/sqrt(pi), i.e. (x, xi) = (Re z / sqrt(pi), -Im z / sqrt(pi)).
* bargmann(f, z) = 2**(1/4) integral f(t) exp(2 pi t z - pi t^2 - (pi/2) z^2) dt.
* Identity checks compare moduli; phase conventions differ across sources.
  The one phase-sensitive check kept is the Bargmann <-> STFT pairing, which
  is internally consistent.
"""

import warnings
from dataclasses import dataclass
from math import pi, sqrt

import numpy as np
from scipy.interpolate import CubicSpline

from .fields import chern_arrays
from .special import hermite_matrix

DEFAULT_T_MAX = 8.0
DEFAULT_STEP = 1.0 / 128.0
BARGMANN_RADIUS_MAX = 6.0
_SUPPORT_EPS = 1e-13


class TruncationWarning(UserWarning):
    """Shifted window support leaves the sampled grid; result is truncated."""


@dataclass(frozen=True, eq=False)
class SampledSignal:
    """Complex signal sampled on a uniform grid [t_min, t_max] with `step`."""

    samples: np.ndarray
    t_min: float
    t_max: float
    step: float

    def __post_init__(self):
        if self.step <= 0:
            raise ValueError("step must be positive")
        n = int(round((self.t_max - self.t_min) / self.step)) + 1
        if self.samples.shape != (n,):
            raise ValueError(f"expected {n} samples for this grid, got {self.samples.shape}")

    @property
    def t(self):
        return self.t_min + self.step * np.arange(self.samples.shape[0])

    def l2_norm(self):
        return float(np.sqrt(np.trapz(np.abs(self.samples) ** 2, dx=self.step)))

    def same_grid(self, other):
        return (abs(self.t_min - other.t_min) < 1e-12
                and abs(self.t_max - other.t_max) < 1e-12
                and abs(self.step - other.step) < 1e-15)


def make_signal(fn, t_min=-DEFAULT_T_MAX, t_max=DEFAULT_T_MAX, step=DEFAULT_STEP):
    """Sample a callable on the default uniform grid."""
    n = int(round((t_max - t_min) / step)) + 1
    t = t_min + step * np.arange(n)
    return SampledSignal(np.asarray(fn(t), dtype=complex), t_min, t_max, step)


def hermite_signal(k, t_min=-DEFAULT_T_MAX, t_max=DEFAULT_T_MAX, step=DEFAULT_STEP):
    """Hermite function of order k as a sampled signal."""
    n = int(round((t_max - t_min) / step)) + 1
    t = t_min + step * np.arange(n)
    return SampledSignal(hermite_matrix(k, t)[k].astype(complex), t_min, t_max, step)


def white_noise_signal(draw, t_min=-DEFAULT_T_MAX, t_max=DEFAULT_T_MAX, step=DEFAULT_STEP):
    """Truncated white noise sum_k a_k h_k(t) built from a coefficient draw."""
    n = int(round((t_max - t_min) / step)) + 1
    t = t_min + step * np.arange(n)
    h = hermite_matrix(draw.truncation_order, t)
    return SampledSignal(draw.coefficients @ h, t_min, t_max, step)


def _trapezoid_weights(n, step):
    w = np.full(n, step)
    w[0] = w[-1] = 0.5 * step
    return w


def _shifted_window(g, x):
    """conj-ready window samples g(t - x) on g's grid by cubic interpolation.

    Emits TruncationWarning when the significant support of g, shifted by x,
    is no longer contained in the grid.
    """
    t = g.t
    mag = np.abs(g.samples)
    sig = np.nonzero(mag > _SUPPORT_EPS * mag.max())[0]
    if sig.size:
        lo, hi = t[sig[0]] + x, t[sig[-1]] + x
        if lo < g.t_min - 1e-12 or hi > g.t_max + 1e-12:
            warnings.warn(
                f"window support [{lo:.3f}, {hi:.3f}] exceeds grid after shift x={x:.3f}",
                TruncationWarning, stacklevel=3)
    spline = CubicSpline(t, g.samples)
    shifted = np.where((t - x >= g.t_min) & (t - x <= g.t_max),
                       spline(np.clip(t - x, g.t_min, g.t_max)), 0.0)
    return shifted


def stft(f, g, x, xi):
    """V_g f(x, xi) by composite quadrature on the common grid.

    Requires f and g on the same grid and g unit-norm (within 1e-10 in the
    quadrature norm).
    """
    if not f.same_grid(g):
        raise ValueError("signal and window must share the sampling grid")
    if abs(g.l2_norm() - 1.0) > 1e-10:
        raise ValueError(f"window must be unit norm, got {g.l2_norm()!r}")
    t = f.t
    gs = _shifted_window(g, x)
    integrand = f.samples * np.conj(gs) * np.exp(-2j * pi * xi * t)
    return complex(integrand @ _trapezoid_weights(t.size, f.step))


def plane_point(z):
    """Time-frequency coordinates of the analytic-plane point z."""
    z = complex(z)
    return z.real / sqrt(pi), -z.imag / sqrt(pi)


def stft_plane(f, g, z):
    """V_g f evaluated at the time-frequency point conj(z)/sqrt(pi)."""
    x, xi = plane_point(z)
    return stft(f, g, x, xi)


def bargmann(f, z, radius_max=BARGMANN_RADIUS_MAX):
    """Bargmann transform of a sampled signal at the point z (|z| <= 6 by
    default, so the Gaussian integrand stays resolvable on the grid)."""
    z = complex(z)
    if abs(z) > radius_max:
        raise ValueError(f"|z|={abs(z):.3f} beyond supported radius {radius_max}")
    t = f.t
    integrand = 2.0 ** 0.25 * f.samples * np.exp(2 * pi * t * z - pi * t * t - 0.5 * pi * z * z)
    return complex(integrand @ _trapezoid_weights(t.size, f.step))


@dataclass(frozen=True)
class IdentityCheckResult:
    """Outcome of the spectrogram cross-validation over a point grid."""

    max_rel_error: float
    errors: np.ndarray
    excluded: tuple

    def __float__(self):
        return self.max_rel_error


def spectrogram_identity_check(draw, grid, t_min=-DEFAULT_T_MAX,
                               t_max=DEFAULT_T_MAX, step=DEFAULT_STEP):
    """Max over the grid of the relative gap between the squared STFT modulus
    of truncated white noise and the squared weighted series field built from
    the same draw.

    Points whose quadrature is flagged as truncated are excluded and reported
    in the result.
    """
    grid = np.asarray(grid, dtype=complex)
    noise = white_noise_signal(draw, t_min, t_max, step)
    window = hermite_signal(0, t_min, t_max, step)
    f, _, _, _ = chern_arrays(draw, grid)
    weighted_sq = np.abs(np.exp(-0.5 * np.abs(grid) ** 2) * f) ** 2
    errors = np.full(grid.shape, np.nan)
    excluded = []
    for j, z in enumerate(grid):
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", TruncationWarning)
            value = stft_plane(noise, window, z)
        if any(issubclass(w.category, TruncationWarning) for w in caught):
            excluded.append(complex(z))
            continue
        spec_sq = abs(value) ** 2
        errors[j] = abs(spec_sq - weighted_sq[j]) / (1.0 + weighted_sq[j])
    valid = errors[~np.isnan(errors)]
    max_err = float(valid.max()) if valid.size else float("nan")
    return IdentityCheckResult(max_err, errors, tuple(excluded))


def hermite_basis_stft(n_max, points, t_min=-DEFAULT_T_MAX,
                       t_max=DEFAULT_T_MAX, step=DEFAULT_STEP):
    """V_g h_k at the plane points, for k = 0..n_max, g the Gaussian window.

    Returns an (n_max+1, len(points)) array; shares one quadrature kernel per
    point across all basis orders.
    """
    points = np.asarray(points, dtype=complex)
    window = hermite_signal(0, t_min, t_max, step)
    n = window.samples.shape[0]
    t = window.t
    h = hermite_matrix(n_max, t)
    weights = _trapezoid_weights(n, step)
    out = np.empty((n_max + 1, points.size), dtype=complex)
    for j, z in enumerate(points):
        x, xi = plane_point(z)
        gs = _shifted_window(window, x)
        kernel = np.conj(gs) * np.exp(-2j * pi * xi * t) * weights
        out[:, j] = h @ kernel
    return out


def empirical_stft_covariance(pairs, draws, seed, n_max=60):
    """Monte-Carlo covariance of the white-noise STFT at plane-point pairs.

    Returns (mean, std_error) arrays over the pairs, where mean estimates
    E[V(z) conj(V(w))] for V the Gaussian-window STFT of truncated noise.
    Uses linearity over the Hermite basis, so the quadrature is done once.
    """
    from .fields import sample_coefficients  # local import avoids cycle at init

    pairs = [(complex(z), complex(w)) for z, w in pairs]
    points = np.array([p for zw in pairs for p in zw], dtype=complex)
    basis = hermite_basis_stft(n_max, points)
    prods = np.empty((draws, len(pairs)), dtype=complex)
    for i in range(draws):
        a = sample_coefficients(n_max, seed, i).coefficients
        v = a @ basis
        vz, vw = v[0::2], v[1::2]
        prods[i] = vz * np.conj(vw)
    mean = prods.mean(axis=0)
    se = np.sqrt((prods.real.var(axis=0, ddof=1) + prods.imag.var(axis=0, ddof=1)) / draws)
    return mean, se
