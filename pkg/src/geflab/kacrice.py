"""Counting integrals and closed forms: jet covariance, Gaussian density,
intensity quadratures, and ordinate-value densities.

This module is the analytic track, fully independent of the Monte-Carlo
simulation.  All intensities are per unit of the measure dz/pi.

The jet covariance built here is the one entering the critical-point
counting integral: for a base field G with the given correlation kernel, it
is the covariance of (H, grad' H, grad'' H) where H = grad' G is the
translation-covariant derivative, grad' = d/dz - conj(z), grad'' = d/dconj(z).
After the exp(-|z|^2) normalization it is constant in z; for the analytic
base kernel it equals diag(1, 2, 1).
"""

from dataclasses import dataclass
from math import exp, factorial, pi

import numpy as np
from scipy.integrate import dblquad, quad

from .special import KernelId, kernel_eval

_FD_STEP = 0.06
# 6th-order central first-derivative stencil: (offset, weight/(60 h))
_STENCIL = ((-3, -1.0), (-2, 9.0), (-1, -45.0), (1, 45.0), (2, -9.0), (3, 1.0))


class CovarianceInconsistency(RuntimeError):
    """Closed-form and finite-difference covariance paths disagree."""


@dataclass(frozen=True)
class JetCovariance:
    """3x3 Hermitian covariance of (H, grad' H, grad'' H), exp(-|z|^2)-normalized."""

    matrix: np.ndarray
    normalized: bool = True


def _fd_partial(f, slot, axis, h=_FD_STEP):
    """d/d(axis) of f(z, w) in real coordinates of one complex slot."""
    def g(z, w):
        z = np.asarray(z, dtype=complex)
        w = np.asarray(w, dtype=complex)
        acc = 0.0
        for off, wgt in _STENCIL:
            d = off * h if axis == "x" else 1j * off * h
            if slot == 0:
                acc = acc + wgt * f(z + d, w)
            else:
                acc = acc + wgt * f(z, w + d)
        return acc / (60.0 * h)
    return g


def _fd_wirtinger(f, slot, conjugated, h=_FD_STEP):
    """d/dz (or d/dconj(z)) of one slot of f, by finite differences."""
    fx = _fd_partial(f, slot, "x", h)
    fy = _fd_partial(f, slot, "y", h)
    sign = 1.0 if conjugated else -1.0
    return lambda z, w: 0.5 * (fx(z, w) + sign * 1j * fy(z, w))


def _op_chern_prime(f, slot):
    """grad' on the z slot, or its conjugate counterpart on the w slot."""
    d = _fd_wirtinger(f, slot, conjugated=(slot == 1))
    if slot == 0:
        return lambda z, w: d(z, w) - np.conj(z) * f(z, w)
    return lambda z, w: d(z, w) - w * f(z, w)


def _op_chern_second(f, slot):
    """grad'' on the z slot, or its conjugate counterpart on the w slot."""
    return _fd_wirtinger(f, slot, conjugated=(slot == 0))


def _covariance_fd(kid, z):
    """Finite-difference jet covariance; touches only kernel_eval of the
    base kernel, so it is independent of the closed-form Landau algebra."""
    base = lambda zz, ww: kernel_eval(kid, zz, ww)
    jet_ops = (lambda f, slot: f, _op_chern_prime, _op_chern_second)
    m = np.empty((3, 3), dtype=complex)
    for i, a in enumerate(jet_ops):
        fz = a(_op_chern_prime(base, 0), 0)
        for j, b in enumerate(jet_ops):
            fzw = b(_op_chern_prime(fz, 1), 1)
            m[i, j] = complex(np.asarray(fzw(z, z)).reshape(())) * exp(-abs(z) ** 2)
    return m


def _covariance_closed(kid, z):
    del z  # constant after normalization (translation covariance)
    if kid.family == "landau":
        orders = (kid.order,)
    elif kid.family == "bi_entire":
        orders = (0, 1)
    else:
        raise ValueError(f"no closed-form covariance for kernel family {kid.family!r}")
    diag = np.zeros(3)
    for q in orders:
        # derived field H = grad' G has kernel of Landau order q+1
        r = q + 1
        diag += (factorial(r), factorial(r + 1), r * factorial(r))
    return np.diag(diag).astype(complex)


def build_covariance(kernel, z, method="closed", cross_check=False, tol=1e-6):
    """Jet covariance for the critical-point counting integral of the field
    with the given base kernel, normalized by exp(-|z|^2).

    method: 'closed' (Landau algebra) or 'fd' (nested Wirtinger stencils on
    kernel_eval).  With cross_check=True both are computed and compared;
    disagreement beyond `tol` raises CovarianceInconsistency.
    """
    if not isinstance(kernel, KernelId):
        raise TypeError("kernel must be a KernelId")
    if method not in ("closed", "fd"):
        raise ValueError(f"method must be 'closed' or 'fd', got {method!r}")
    z = complex(z)
    if cross_check:
        closed = _covariance_closed(kernel, z)
        fd = _covariance_fd(kernel, z)
        gap = float(np.max(np.abs(closed - fd)))
        if gap > tol:
            raise CovarianceInconsistency(
                f"closed-form vs finite-difference covariance differ by {gap:.3e}")
        return JetCovariance(closed if method == "closed" else fd)
    m = _covariance_closed(kernel, z) if method == "closed" else _covariance_fd(kernel, z)
    return JetCovariance(m)


def density_p(v, u):
    """Gaussian density of the conditioned jet pair at a critical point:
    p(0, v, u) = (1/2) exp(-|v|^2 / 2 - |u|^2)."""
    return 0.5 * np.exp(-0.5 * np.abs(v) ** 2 - np.abs(u) ** 2)


def density_normalization(measure="nu"):
    """Quadrature of the density over C^2, per the chosen area measure.

    'nu' uses dz/pi per complex variable (the counting convention) and the
    integral is 1; 'lebesgue' gives pi^2.  Computed, not assumed, so that a
    convention slip in the prefactor would surface here.
    """
    if measure == "nu":
        # radial substitution s=|v|^2, x=|u|^2 turns each dnu into ds, dx
        val, _ = dblquad(lambda x, s: density_p(np.sqrt(s), np.sqrt(x)),
                         0.0, np.inf, 0.0, np.inf, epsabs=1e-12, epsrel=1e-12)
        return val
    if measure == "lebesgue":
        val, _ = dblquad(
            lambda ur, vr: density_p(vr, ur) * (2 * pi * vr) * (2 * pi * ur),
            0.0, np.inf, 0.0, np.inf, epsabs=1e-12, epsrel=1e-12)
        return val
    raise ValueError(f"measure must be 'nu' or 'lebesgue', got {measure!r}")


def _quad_max():
    return dblquad(lambda t, x: (t - 2.0 * x) * np.exp(-t - x),
                   0.0, np.inf, lambda x: 2.0 * x, np.inf,
                   epsabs=1e-12, epsrel=1e-12)


def _quad_sadd():
    return dblquad(lambda t, x: (2.0 * x - t) * np.exp(-t - x),
                   0.0, np.inf, 0.0, lambda x: 2.0 * x,
                   epsabs=1e-12, epsrel=1e-12)


def intensity_quadrature(which):
    """Expected points per nu-unit area by quadrature of the reduced
    counting integrals: 'max', 'sadd', or their sum 'crit'."""
    value, _ = intensity_quadrature_report(which)
    return value


def intensity_quadrature_report(which):
    """(value, quadrature error estimate) for the counting integrals."""
    if which == "max":
        return _quad_max()
    if which == "sadd":
        return _quad_sadd()
    if which == "crit":
        vm, em = _quad_max()
        vs, es = _quad_sadd()
        return vm + vs, em + es
    raise ValueError(f"which must be 'max', 'sadd' or 'crit', got {which!r}")


def ordinate_density(which, x):
    """Closed-form density of ordinate values (weighted field modulus at the
    points) for local maxima, saddles, or all critical points."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("ordinate must be >= 0")
    if which == "max":
        out = 2.0 * x * (x**2 - 2.0 + 2.0 * np.exp(-0.5 * x**2)) * np.exp(-(x**2))
    elif which == "sadd":
        out = 4.0 * x * np.exp(-1.5 * x**2)
    elif which == "crit":
        out = 2.0 * x * (x**2 - 2.0 + 4.0 * np.exp(-0.5 * x**2)) * np.exp(-(x**2))
    else:
        raise ValueError(f"which must be 'max', 'sadd' or 'crit', got {which!r}")
    return out if out.ndim else float(out)


def ordinate_density_quadrature(x):
    """(max_part, sadd_part) of the ordinate density at x, by quadrature of
    the radial integral 2x e^{-x^2} int |2t - x^2| e^{-t} dt split at t = x^2/2.

    Independent route; must match the closed forms of ordinate_density.
    """
    x = float(x)
    if x < 0:
        raise ValueError("ordinate must be >= 0")
    split = 0.5 * x * x
    lo, _ = quad(lambda t: (x * x - 2.0 * t) * np.exp(-t), 0.0, split,
                 epsabs=1e-13, epsrel=1e-13)
    hi, _ = quad(lambda t: (2.0 * t - x * x) * np.exp(-t), split, np.inf,
                 epsabs=1e-13, epsrel=1e-13)
    pref = 2.0 * x * exp(-x * x)
    return pref * lo, pref * hi


def edelman_kostlan_profile(rho):
    """Radial intensity of the zeros of the derivative of the base field:
    1 + (1 + rho^2)^(-2)."""
    rho = np.asarray(rho, dtype=float)
    if np.any(rho < 0):
        raise ValueError("radius must be >= 0")
    out = 1.0 + (1.0 + rho**2) ** -2
    return out if out.ndim else float(out)


def holomorphic_mean_intensity(rho_lo, rho_hi):
    """Mean of edelman_kostlan_profile over an annulus, in nu-units."""
    if not 0 <= rho_lo < rho_hi:
        raise ValueError("need 0 <= rho_lo < rho_hi")
    area = rho_hi**2 - rho_lo**2
    extra = 1.0 / (1.0 + rho_lo**2) - 1.0 / (1.0 + rho_hi**2)
    return 1.0 + extra / area


def hermite_window_zero_intensity(r):
    """Zero intensity of the Hermite-window spectrogram of white noise:
    r + 1/2 + 1/(4r + 2)."""
    if r < 0 or int(r) != r:
        raise ValueError(f"window order must be a non-negative integer, got {r}")
    return r + 0.5 + 1.0 / (4 * r + 2)


def basin_neighbor_targets():
    """(2 * sadd / zeros, 2 * sadd / max) from the quadrature intensities;
    the heuristic neighbor counts of the gradient-flow basin graph."""
    sadd = intensity_quadrature("sadd")
    zeros = hermite_window_zero_intensity(0)
    return 2.0 * sadd / zeros, 2.0 * sadd / intensity_quadrature("max")
