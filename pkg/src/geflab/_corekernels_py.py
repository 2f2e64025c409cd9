"""Pure-numpy fallback for the compiled core (`_corekernels`).

Must stay numerically equivalent to the Cython twin; the backend equivalence
tests compare them on random inputs.
"""

import numpy as np

_MAX_ORDER = 5


def poly_jets(coeffs, z, order):
    """Evaluate S(z) = sum_k c_k z^k and its first `order` derivatives.

    Same contract as the compiled version: returns a (order+1, m) complex
    array with out[d, j] = S^(d)(z_j).  Vectorized Horner with derivative
    accumulators (synthetic division), one numpy pass per coefficient.
    """
    if order < 0 or order > _MAX_ORDER:
        raise ValueError(f"order must be in [0, {_MAX_ORDER}], got {order}")
    c = np.ascontiguousarray(coeffs, dtype=np.complex128)
    zz = np.ascontiguousarray(np.atleast_1d(z), dtype=np.complex128)
    if c.shape[0] == 0:
        raise ValueError("empty coefficient array")
    m = zz.shape[0]
    q = np.zeros((order + 1, m), dtype=np.complex128)
    q[0] = c[-1]
    for k in range(c.shape[0] - 2, -1, -1):
        for d in range(order, 0, -1):
            q[d] = q[d] * zz + q[d - 1]
        q[0] = q[0] * zz + c[k]
    fact = 1.0
    for d in range(1, order + 1):
        fact *= d
        q[d] *= fact
    return q
