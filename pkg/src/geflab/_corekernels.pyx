# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled hot kernel: batched evaluation of a power series and its derivatives.

Everything expensive in the package funnels through :func:`poly_jets`, so this
is the single routine worth compiling.  The pure-Python twin lives in
``_corekernels_py`` and must stay numerically equivalent.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

DEF MAX_ORDER = 5


def poly_jets(coeffs, z, int order):
    """Evaluate S(z) = sum_k c_k z^k and its first `order` derivatives.

    Parameters
    ----------
    coeffs : complex128 array, shape (n,)
        Series coefficients c_0..c_{n-1}.
    z : complex128 array, shape (m,)
        Evaluation points.
    order : int
        Highest derivative order, 0 <= order <= 5.

    Returns
    -------
    out : complex128 array, shape (order+1, m)
        out[d, j] = S^(d)(z_j) (true derivatives, factorial included).

    Uses repeated synthetic division (Horner with derivative accumulators);
    coefficient-major sweeps over the point array so the inner loops stay
    vectorizable.
    """
    if order < 0 or order > MAX_ORDER:
        raise ValueError(f"order must be in [0, {MAX_ORDER}], got {order}")
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] c = np.ascontiguousarray(
        coeffs, dtype=np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] zz = np.ascontiguousarray(
        np.atleast_1d(z), dtype=np.complex128)
    cdef Py_ssize_t n = c.shape[0]
    cdef Py_ssize_t m = zz.shape[0]
    if n == 0:
        raise ValueError("empty coefficient array")
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] out = np.zeros(
        (order + 1, m), dtype=np.complex128)
    cdef double complex ck, zj
    cdef Py_ssize_t j, k, d
    cdef double fact
    with nogil:
        for j in range(m):
            out[0, j] = c[n - 1]
        for k in range(n - 2, -1, -1):
            ck = c[k]
            for d in range(order, 0, -1):
                for j in range(m):
                    out[d, j] = out[d, j] * zz[j] + out[d - 1, j]
            for j in range(m):
                out[0, j] = out[0, j] * zz[j] + ck
        fact = 1.0
        for d in range(1, order + 1):
            fact *= d
            if fact != 1.0:
                for j in range(m):
                    out[d, j] = out[d, j] * fact
    return out
