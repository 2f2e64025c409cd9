"""Random coefficient draws and evaluation of the derived planar fields.

The base field is the random power series F(z) = sum_k a_k z^k / sqrt(k!)
with i.i.d. complex Gaussian coefficients normalized so E|a_k|^2 = 1
(real and imaginary parts independent with variance 1/2 each).  Derived
fields evaluated here:

* the complex derivative dF and higher derivatives,
* the translation-covariant (Chern) derivative F1 = dF - conj(z) F and its
  z-derivative,
* higher raisings F_r = (d/dz - conj(z))^r F,
* the bi-entire sum F(.; draw0) + F1(.; draw1) of two independent draws.

Coefficients come from a counter-based generator (Philox) keyed on
(seed, realization_index): realizations are reproducible independently of
evaluation order or thread count, and coefficient k always comes from the
same stream position, so enlarging the truncation order keeps the earlier
coefficients bit-for-bit identical.
"""

from dataclasses import dataclass
from math import comb

import numpy as np
from scipy.special import gammaln, ndtri

from .backend import poly_jets
from .special import UnsupportedOrderError

DEFAULT_TRUNCATION_TOL = 1e-12
DEFAULT_BUFFER = 2.0
RAISED_ORDER_CAP = 4

# maps [0, 1) uniforms into (0, 1) so the normal inverse CDF stays finite
_U_SCALE = 1.0 - 2.0**-52
_U_SHIFT = 2.0**-53


@dataclass(frozen=True, eq=False)
class CoefficientDraw:
    """One realization of the truncated i.i.d. coefficient sequence.

    `coefficients` has length truncation_order + 1 and is read-only;
    regenerating with the same (seed, realization_index, truncation_order)
    yields bit-identical values.
    """

    coefficients: np.ndarray
    truncation_order: int
    seed: int
    realization_index: int

    def __post_init__(self):
        if self.coefficients.shape != (self.truncation_order + 1,):
            raise ValueError("coefficient count must be truncation_order + 1")
        if not np.all(np.isfinite(self.coefficients.view(float))):
            raise ValueError("coefficients must be finite")


def sample_coefficients(n, seed, realization_index):
    """Draw a_0..a_n with a_k = (g1 + i g2)/sqrt(2), g1, g2 std normal.

    The stream is Philox keyed on (seed, realization_index); normals are
    produced by inverse CDF from uniform doubles so that coefficient k
    always consumes stream positions 2k and 2k+1.
    """
    if n < 0:
        raise ValueError(f"truncation order must be >= 0, got {n}")
    key = np.array([np.uint64(seed & (2**64 - 1)),
                    np.uint64(realization_index & (2**64 - 1))], dtype=np.uint64)
    gen = np.random.Generator(np.random.Philox(key=key))
    u = gen.random(2 * (n + 1)) * _U_SCALE + _U_SHIFT
    g = ndtri(u)
    a = (g[0::2] + 1j * g[1::2]) / np.sqrt(2.0)
    a.setflags(write=False)
    return CoefficientDraw(a, n, seed, realization_index)


def zero_draw(n, nonzero=()):
    """Deterministic draw with chosen coefficients; useful for crafted tests.

    `nonzero` is an iterable of (k, value) pairs; everything else is 0.
    """
    a = np.zeros(n + 1, dtype=complex)
    for k, value in nonzero:
        a[k] = value
    a.setflags(write=False)
    return CoefficientDraw(a, n, seed=0, realization_index=-1)


def truncation_order(radius, tol=DEFAULT_TRUNCATION_TOL):
    """Smallest N with (sum_{k>N} R^{2k}/k!) / e^{R^2} < tol.

    Bounds the relative pointwise variance lost to truncation on the closed
    disk of the given radius.
    """
    if radius <= 0:
        raise ValueError(f"radius must be positive, got {radius}")
    if not 0 < tol < 1:
        raise ValueError(f"tol must be in (0, 1), got {tol}")
    lam = float(radius) ** 2
    k_max = int(np.ceil(lam + 20.0 * np.sqrt(lam) + 60.0))
    k = np.arange(k_max + 1)
    # terms of the Poisson(lam) pmf, computed in log space to avoid overflow
    log_terms = k * np.log(lam) - gammaln(k + 1.0) - lam
    terms = np.exp(log_terms)
    # suffix sums of positive terms: tail(N) = sum_{k > N} term_k
    tail = np.concatenate([np.cumsum(terms[::-1])[::-1][1:], [0.0]])
    below = np.nonzero(tail < tol)[0]
    if below.size == 0:
        raise RuntimeError("internal: truncation scan range too small")
    return int(below[0])


def scaled_coefficients(draw):
    """Series coefficients c_k = a_k / sqrt(k!) of the base field."""
    k = np.arange(draw.truncation_order + 1)
    return draw.coefficients * np.exp(-0.5 * gammaln(k + 1.0))


def derivative_coefficients(scaled, m):
    """Coefficients of the m-th derivative of sum_k c_k z^k."""
    if m == 0:
        return scaled
    n = scaled.shape[0]
    if n <= m:
        return np.zeros(1, dtype=complex)
    k = np.arange(m, n, dtype=float)
    fall = np.ones(n - m)
    for i in range(m):
        fall *= k - i
    return scaled[m:] * fall


@dataclass(frozen=True)
class FieldJet:
    """Values of the field and its first derived quantities at one point:
    f, df = d/dz f, f1 = df - conj(z) f, df1 = d/dz f1."""

    z: complex
    f: complex
    df: complex
    f1: complex
    df1: complex


def jet_arrays(draw, z, order=2):
    """Derivatives S^(0..order) of the base series at the points z."""
    return poly_jets(scaled_coefficients(draw), np.asarray(z, dtype=complex), order)


def chern_arrays(draw, z):
    """(f, df, f1, df1) of the base field at the points z (vectorized)."""
    z = np.asarray(z, dtype=complex)
    s = jet_arrays(draw, z, order=2)
    f, df, ddf = s[0], s[1], s[2]
    zbar = np.conj(z)
    f1 = df - zbar * f
    df1 = ddf - zbar * df
    return f, df, f1, df1


def eval_jet(draw, z):
    """Field jet at a single point: one series pass yields all four values."""
    f, df, f1, df1 = chern_arrays(draw, np.array([z], dtype=complex))
    return FieldJet(complex(z), complex(f[0]), complex(df[0]),
                    complex(f1[0]), complex(df1[0]))


def raised_arrays(draw, z, r, with_gradient=False):
    """(d/dz - conj(z))^r applied to the base field, at the points z.

    Uses the closed representation
    F_r = sum_m C(r, m) (-conj(z))^(r-m) F^(m)(z),
    obtained by iterating g -> dg/dz - conj(z) g on the analytic series.
    With `with_gradient`, also returns the Wirtinger pair
    (d/dz F_r, d/dconj(z) F_r = -r F_{r-1}).
    """
    z = np.asarray(z, dtype=complex)
    need = r + 1 if with_gradient else r
    s = jet_arrays(draw, z, order=need)
    zbar = np.conj(z)
    val = np.zeros_like(z)
    val_lower = np.zeros_like(z)
    dz = np.zeros_like(z)
    for m in range(r + 1):
        w = comb(r, m) * (-zbar) ** (r - m)
        val = val + w * s[m]
        if with_gradient:
            dz = dz + w * s[m + 1]
    if with_gradient and r >= 1:
        for m in range(r):
            val_lower = val_lower + comb(r - 1, m) * (-zbar) ** (r - 1 - m) * s[m]
    if with_gradient:
        dzbar = -r * val_lower
        return val, dz, dzbar
    return val


def eval_raised(draw, z, r, max_order=RAISED_ORDER_CAP):
    """r-fold raising of the base field at one point (r=0 is the field
    itself, r=1 equals the Chern derivative of the jet)."""
    if r < 0 or int(r) != r:
        raise ValueError(f"raising order must be a non-negative integer, got {r}")
    if r > max_order:
        raise UnsupportedOrderError(f"raising order {r} above cap {max_order}")
    return complex(raised_arrays(draw, np.array([z], dtype=complex), r)[0])


def bientire_arrays(draw0, draw1, z):
    """Order-2 polyanalytic sum F(.; draw0) + F1(.; draw1) at the points z."""
    if (draw0.seed, draw0.realization_index) == (draw1.seed, draw1.realization_index):
        raise ValueError("bi-entire field needs two independent draws")
    z = np.asarray(z, dtype=complex)
    f0 = jet_arrays(draw0, z, order=0)[0]
    _, _, f1, _ = chern_arrays(draw1, z)
    return f0 + f1


def eval_bientire(draw0, draw1, z):
    """Bi-entire field at one point."""
    return complex(bientire_arrays(draw0, draw1, np.array([z], dtype=complex))[0])
