"""Special functions: Hermite functions, Laguerre polynomials, and the
correlation kernels of the planar Gaussian fields studied here.

Conventions
-----------
* Hermite functions h_r are L2(R)-normalized with Gaussian h_0(t) =
  2**(1/4) * exp(-pi t**2); they are evaluated by the stable three-term
  recurrence  h_{r+1} = (2 sqrt(pi) t h_r - sqrt(r) h_{r-1}) / sqrt(r+1),
  which is anchored to the Rodrigues-type definition in the tests.
* laguerre(j, alpha, x) is the generalized Laguerre polynomial
  L_j^alpha(x) = sum_i (-1)^i C(j+alpha, j-i) x^i / i!.
* Kernels live on the complex plane of the analytic representation:
  the Landau-level kernel of order r is r! * L_r(|z-w|^2) * exp(z conj(w));
  the bi-entire kernel is L_1^(1)(|z-w|^2) * exp(z conj(w)), equal to the
  sum of the first two Landau kernels.
"""

from dataclasses import dataclass
from math import comb, factorial, pi

import numpy as np

R_MAX_HERMITE = 64
_EXP_ARG_MAX = 709.0  # exp overflows above this in double precision


class UnsupportedOrderError(ValueError):
    """Requested order is above the configured cap."""


def hermite_fn(r, t, r_max=R_MAX_HERMITE):
    """L2-normalized Hermite function h_r(t); t may be an array.

    Raises UnsupportedOrderError for r above `r_max` (cancellation-free
    evaluation is only guaranteed in the recurrence-stable range).
    """
    if r < 0 or int(r) != r:
        raise ValueError(f"order must be a non-negative integer, got {r}")
    if r > r_max:
        raise UnsupportedOrderError(f"Hermite order {r} above cap {r_max}")
    t = np.asarray(t, dtype=float)
    out = hermite_matrix(r, t)[r]
    return float(out[0]) if t.ndim == 0 else out


def hermite_matrix(r_max_inclusive, t):
    """Rows 0..r_max_inclusive of the Hermite functions on the grid t."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    n = int(r_max_inclusive)
    h = np.zeros((n + 1, t.size))
    h[0] = 2.0 ** 0.25 * np.exp(-pi * t * t)
    if n >= 1:
        h[1] = 2.0 * np.sqrt(pi) * t * h[0]
    for k in range(1, n):
        h[k + 1] = (2.0 * np.sqrt(pi) * t * h[k] - np.sqrt(k) * h[k - 1]) / np.sqrt(k + 1)
    return h


def laguerre(j, alpha, x):
    """Generalized Laguerre polynomial L_j^alpha(x), alpha integer >= -j.

    Evaluated by the stable three-term recurrence
    (n+1) L_{n+1} = (2n+1+alpha-x) L_n - (n+alpha) L_{n-1};
    the defining finite sum is kept as an independent oracle in the tests.
    """
    if j < 0 or int(j) != j:
        raise ValueError(f"degree must be a non-negative integer, got {j}")
    if int(alpha) != alpha or alpha < -j:
        raise ValueError(f"alpha must be an integer >= -{j}, got {alpha}")
    x = np.asarray(x, dtype=float)
    prev = np.ones_like(x)
    if j == 0:
        return prev if prev.ndim else float(prev)
    cur = 1.0 + alpha - x
    for n in range(1, j):
        prev, cur = cur, ((2 * n + 1 + alpha - x) * cur - (n + alpha) * prev) / (n + 1)
    return cur if cur.ndim else float(cur)


@dataclass(frozen=True)
class KernelId:
    """Identifier of a correlation kernel: family plus Landau order."""

    family: str
    order: int = 0

    _FAMILIES = ("landau", "bi_entire", "weyl_heisenberg_hermite")

    def __post_init__(self):
        if self.family not in self._FAMILIES:
            raise ValueError(f"unknown kernel family {self.family!r}")
        if self.order < 0 or int(self.order) != self.order:
            raise ValueError(f"kernel order must be a non-negative integer, got {self.order}")
        if self.family == "bi_entire" and self.order != 0:
            raise ValueError("bi_entire kernel takes no order")


def landau(r):
    """Kernel of the Landau-level eigenspace of order r (r=0: analytic Fock)."""
    return KernelId("landau", r)


def bi_entire():
    """Kernel of the order-2 polyanalytic Fock space (sum of levels 0 and 1)."""
    return KernelId("bi_entire")


def weyl_heisenberg_hermite(r):
    """Phase-and-Gaussian-weighted kernel of the Hermite-window STFT field.

    Expressed in the analytic-plane coordinate z (the time-frequency point is
    conj(z)/sqrt(pi)):
    exp(i (x xi - x' xi')) * exp(-(|z|^2+|w|^2)/2) * exp(z conj(w)) * L_r(|z-w|^2)
    with (x, xi) = (Re z, Im z) and (x', xi') = (Re w, Im w).
    """
    return KernelId("weyl_heisenberg_hermite", r)


def _kernel_parts(kid, z, w):
    """(polynomial factor, exponent of the modulus, phase) of the kernel."""
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    rho = np.abs(z - w) ** 2
    zwbar = z * np.conj(w)
    if kid.family == "landau":
        poly = factorial(kid.order) * laguerre(kid.order, 0, rho)
        log_mod_exp = zwbar.real
        phase = zwbar.imag
    elif kid.family == "bi_entire":
        poly = laguerre(1, 1, rho)
        log_mod_exp = zwbar.real
        phase = zwbar.imag
    else:  # weyl_heisenberg_hermite
        poly = laguerre(kid.order, 0, rho)
        log_mod_exp = zwbar.real - 0.5 * (np.abs(z) ** 2 + np.abs(w) ** 2)
        phase = zwbar.imag + z.real * z.imag - w.real * w.imag
    return poly, log_mod_exp, phase


def kernel_eval(kid, z, w):
    """Correlation kernel value K(z, w); raises OverflowError when the
    modulus exceeds double-precision range (use kernel_eval_log then)."""
    poly, log_mod_exp, phase = _kernel_parts(kid, z, w)
    if np.any(log_mod_exp > _EXP_ARG_MAX):
        raise OverflowError(
            "kernel modulus exceeds double-precision range; use kernel_eval_log")
    out = poly * np.exp(log_mod_exp) * np.exp(1j * phase)
    return out if np.ndim(out) else complex(out)


def kernel_eval_log(kid, z, w):
    """Log-scaled kernel: (log-modulus, phase in (-pi, pi]).

    The polynomial factor may vanish; log-modulus is -inf there.
    """
    poly, log_mod_exp, phase = _kernel_parts(kid, z, w)
    with np.errstate(divide="ignore"):
        log_mod = np.log(np.abs(poly)) + log_mod_exp
    phase = phase + np.where(np.asarray(poly) < 0, pi, 0.0)
    phase = np.angle(np.exp(1j * phase))
    if np.ndim(log_mod):
        return log_mod, phase
    return float(log_mod), float(phase)
