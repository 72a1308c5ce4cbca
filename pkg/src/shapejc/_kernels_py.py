"""Pure-Python/numpy fallback for the truncated double-series kernel.

Mirrors ``_kernels.pyx`` term for term so both backends agree to rounding.
"""
import numpy as np


def _coefficients(z, parity, order):
    # a_m = (-1)^m z^(2m+p) / (2m+p)!  by recurrence
    a = np.empty(order + 1)
    a[0] = z if parity else 1.0
    z2 = z * z
    for m in range(1, order + 1):
        k = 2 * m + parity
        a[m] = -a[m - 1] * z2 / ((k - 1) * k)
    return a


def f_series(px, pw, x, w, t, order):
    """t * sum_{k<=order} conv(a, b)[k] / (2k + 1 + px + pw)."""
    if t == 0.0:
        return 0.0
    a = _coefficients(x * t, px, order)
    b = _coefficients(w * t, pw, order)
    conv = np.convolve(a, b)[: order + 1]
    denom = 2.0 * np.arange(order + 1) + 1.0 + px + pw
    # sum the small tail first
    return float(t * np.sum((conv / denom)[::-1]))


def f_series_many(px, pw, x, w, t, order):
    x = np.asarray(x, dtype=float)
    w = np.asarray(w, dtype=float)
    out = np.empty(x.shape[0])
    for i in range(x.shape[0]):
        out[i] = f_series(px, pw, float(x[i]), float(w[i]), t, order)
    return out
