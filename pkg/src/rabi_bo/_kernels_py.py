"""Pure-numpy twins of the compiled kernels in ``_kernels.pyx``."""

import numpy as np

POISSON, GUE, GOE = 0, 1, 2

_BIG = 1e150
_LOG_BIG = np.log(_BIG)
_LOG_H0 = -0.25 * np.log(np.pi)


def hermite_table(n_max, x):
    """Return ``T[q, n] = h_n(x[q])`` for ``n < n_max``.

    The three-term recurrence runs on a rescaled value with a per-point log
    scale, so neither ``n!`` nor ``exp(-x**2/2)`` is ever formed directly.
    """
    xs = np.ascontiguousarray(x, dtype=np.float64).ravel()
    out = np.zeros((xs.size, n_max))
    logscale = _LOG_H0 - 0.5 * xs * xs
    prev = np.zeros_like(xs)
    cur = np.ones_like(xs)
    with np.errstate(divide="ignore", under="ignore"):
        for n in range(n_max):
            a = np.log(np.abs(cur)) + logscale
            mag = np.where(a > -745.0, np.exp(np.maximum(a, -745.0)), 0.0)
            out[:, n] = np.copysign(mag, cur) * (cur != 0.0)
            if n + 1 == n_max:
                break
            nxt = np.sqrt(2.0 / (n + 1)) * xs * cur - np.sqrt(n / (n + 1)) * prev
            prev, cur = cur, nxt
            big = np.abs(cur) > _BIG
            if big.any():
                cur = np.where(big, cur / _BIG, cur)
                prev = np.where(big, prev / _BIG, prev)
                logscale = np.where(big, logscale + _LOG_BIG, logscale)
    return out


def shape_values(family, s):
    s = np.asarray(s, dtype=np.float64).ravel()
    t = np.clip(s, 0.0, None)
    if family == POISSON:
        v = np.exp(-t)
    elif family == GUE:
        v = 32.0 / np.pi**2 * t * t * np.exp(-4.0 * t * t / np.pi)
    else:
        v = 0.5 * np.pi * t * np.exp(-0.25 * np.pi * t * t)
    return np.where(s < 0.0, 0.0, v)


def family_rss(family, n, p, amplitude, scale, shift):
    if scale <= 0.0:
        return float("inf")
    r = p - amplitude * shape_values(family, (n - shift) / scale)
    return float(r @ r)
