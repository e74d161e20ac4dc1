"""Scalar special functions for the hot kernels.

Self-contained so the compiled kernels need nothing beyond numpy/math:
a Chebyshev evaluation of the exponentially scaled Bessel I0, and a
bit-manipulation log2 used inside the per-slot quadrature loops.

The Chebyshev coefficients were fitted against scipy.special.i0e on
[0, 8] (argument t = x/4 - 1) and on [8, inf) for i0e(x)*sqrt(x)
(argument t = 16/x - 1); both fits agree with scipy to < 2e-14 relative
(see tests/test_special.py).
"""
from __future__ import annotations

import math

import numpy as np

from ._backend import maybe_jit

# i0e(x) for x in [0, 8], Chebyshev in t = x/4 - 1
_I0E_LOW = np.array([
    0.3383976372047381, -0.30468267234319824, 0.17162090152220924,
    -0.09490109704804786, 0.04930528423967051, -0.02373741480589947,
    0.0105464603945949, -0.004324309995050714, 0.0016394756169411122,
    -0.0005763755745386476, 0.00018850288509599062, -5.7541950100889826e-05,
    1.64484480708047e-05, -4.416738358439556e-06, 1.1173875391354805e-06,
    -2.6707938540976746e-07, 6.046995030272869e-08, -1.3000250032871753e-08,
    2.659823890604946e-09, -5.18979514322873e-10, 9.675838939818049e-11,
    -1.7268235025943025e-11, 2.9553462399750457e-12, -4.856041686271125e-13,
    7.688200543945976e-14, -1.1689584948189433e-14, 2.262172080603767e-15,
    -2.4921755211855305e-16, -5.4529527329079246e-17,
])

# i0e(x)*sqrt(x) for x in [8, inf), Chebyshev in t = 16/x - 1
_I0E_HIGH = np.array([
    0.40224520550705456, 0.0033691164782562134, 6.889758346897248e-05,
    2.891370520912018e-06, 2.0489185900935958e-07, 2.2666690167370247e-08,
    3.3962319981439306e-09, 4.940604329185311e-10, 1.1889247793494251e-11,
    -3.1498925604534457e-11, -1.3215900424894604e-11, -1.793901098604926e-12,
    7.181166849179671e-13, 3.858104761328385e-13, 1.5353705577481203e-14,
    -4.12037164706033e-14, -9.497963629093679e-15, 3.968245844141397e-15,
    1.8608406620586023e-15, 7.664074227293122e-19, -2.422761628411568e-16,
    1.864508197852682e-16, 8.144721304389619e-17, 3.444139146161588e-16,
    -2.0396332219132628e-16,
])

_INV_LN2 = 1.0 / math.log(2.0)
_SQRT2 = math.sqrt(2.0)
_MANT_MASK = np.int64(0x000FFFFFFFFFFFFF)
_ONE_BITS = np.int64(0x3FF0000000000000)


@maybe_jit(fastmath=False)
def _chebval(t, coeffs):
    b0 = 0.0
    b1 = 0.0
    for i in range(len(coeffs) - 1, -1, -1):
        b0, b1 = coeffs[i] + 2.0 * t * b0 - b1, b0
    return b0 - t * b1


@maybe_jit(fastmath=False)
def i0e(x):
    """exp(-|x|) * I0(x), the exponentially scaled modified Bessel function."""
    if x < 0.0:
        x = -x
    if x <= 8.0:
        return _chebval(x / 4.0 - 1.0, _I0E_LOW)
    return _chebval(16.0 / x - 1.0, _I0E_HIGH) / math.sqrt(x)


@maybe_jit(fastmath=True)
def log2_array(xf, xi, n):
    """In-place log2 of xf[:n] (all entries must be >= 1).

    xi must be the int64 view of the same buffer as xf; the exponent is
    pulled from the IEEE-754 bits and the mantissa log comes from an
    atanh series, accurate to ~5e-11 relative.
    """
    for j in range(n):
        b = xi[j]
        e = float((b >> 52) - 1023)
        xi[j] = (b & _MANT_MASK) | _ONE_BITS
        m = xf[j]
        if m > _SQRT2:
            m *= 0.5
            e += 1.0
        t = (m - 1.0) / (m + 1.0)
        t2 = t * t
        s = t * (2.0 + t2 * (0.6666666666666666 + t2 * (0.4 + t2 * (
            0.2857142857142857 + t2 * (0.2222222222222222 + t2 * 0.18181818181818182)))))
        xf[j] = e + s * _INV_LN2
