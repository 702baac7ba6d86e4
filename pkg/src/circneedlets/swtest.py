"""Shapiro-Wilk normality test, Royston's 1995 approximation (AS R94).

Valid for sample sizes 3 through 5000.  The weights come from Blom normal
scores with polynomial corrections to the two extreme coefficients; the null
distribution of the transformed statistic is approximated by a normal whose
moments are polynomial in ``n`` (4 <= n <= 11) or ``log n`` (n >= 12), with
an exact expression at n = 3.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import special

from .errors import DegenerateSampleError

_C1 = np.array([0.0, 0.221157, -0.147981, -2.071190, 4.434685, -2.706056])
_C2 = np.array([0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633])
# log(1 - W) moments for n >= 12, polynomial in log(n)
_C3 = np.array([-1.5861, -0.31082, -0.083751, 0.0038915])
_C4 = np.array([-0.4803, -0.082676, 0.0030302])
# -log(gamma - log(1 - W)) moments for 4 <= n <= 11
_C5 = np.array([0.5440, -0.39978, 0.025054, -0.0006714])
_C6 = np.array([1.3822, -0.77857, 0.062767, -0.0020322])


@dataclass(frozen=True)
class NormalityResult:
    """Shapiro-Wilk statistic and p-value for one sample."""

    W: float
    p_value: float
    n: int
    cell: Optional[tuple] = None


def _poly(coefs: np.ndarray, x: float) -> float:
    return float(np.polyval(coefs[::-1], x))


def shapiro_wilk(values, cell: Optional[tuple] = None) -> NormalityResult:
    """Shapiro-Wilk test of composite normality.

    Parameters
    ----------
    values : array_like
        Sample of size 3 <= n <= 5000, not all equal.
    cell : tuple, optional
        Grid coordinates attached to the result for reporting.
    """
    x = np.sort(np.asarray(values, dtype=float))
    n = x.size
    if n < 3 or n > 5000:
        raise ValueError(f"Shapiro-Wilk requires 3 <= n <= 5000, got {n}")
    ssq = float(np.sum((x - x.mean()) ** 2))
    span = x[-1] - x[0]
    if span <= 0 or ssq <= 0 or span < 1e-12 * max(1.0, abs(float(x[0]))):
        raise DegenerateSampleError("sample is (numerically) constant")

    m = special.ndtri((np.arange(1, n + 1) - 0.375) / (n + 0.25))
    msq = float(np.sum(m * m))
    c = m / np.sqrt(msq)
    u = 1.0 / np.sqrt(n)
    a = np.empty(n)
    if n > 5:
        a_n = c[-1] + _poly(_C1, u)
        a_n1 = c[-2] + _poly(_C2, u)
        phi = (msq - 2.0 * m[-1] ** 2 - 2.0 * m[-2] ** 2) / (1.0 - 2.0 * a_n ** 2 - 2.0 * a_n1 ** 2)
        a[2:-2] = m[2:-2] / np.sqrt(phi)
        a[-1], a[-2] = a_n, a_n1
        a[0], a[1] = -a_n, -a_n1
    elif n >= 4:
        a_n = c[-1] + _poly(_C1, u)
        phi = (msq - 2.0 * m[-1] ** 2) / (1.0 - 2.0 * a_n ** 2)
        a[1:-1] = m[1:-1] / np.sqrt(phi)
        a[-1] = a_n
        a[0] = -a_n
    else:  # n == 3, exact weights
        r = np.sqrt(0.5)
        a[:] = (-r, 0.0, r)

    w_stat = float(np.dot(a, x)) ** 2 / ssq
    w_stat = min(w_stat, 1.0)

    if n == 3:
        p = 6.0 / np.pi * (np.arcsin(np.sqrt(w_stat)) - np.arcsin(np.sqrt(0.75)))
        p = min(max(p, 0.0), 1.0)
        return NormalityResult(W=w_stat, p_value=float(p), n=n, cell=cell)

    if n <= 11:
        gamma = -2.273 + 0.459 * n
        arg = gamma - np.log(max(1.0 - w_stat, 1e-300))
        y = -np.log(max(arg, 1e-300))
        mu = _poly(_C5, float(n))
        sigma = np.exp(_poly(_C6, float(n)))
    else:
        ln_n = np.log(n)
        y = np.log(max(1.0 - w_stat, 1e-300))
        mu = _poly(_C3, ln_n)
        sigma = np.exp(_poly(_C4, ln_n))
    z = (y - mu) / sigma
    p = float(special.ndtr(-z))
    return NormalityResult(W=w_stat, p_value=p, n=n, cell=cell)
