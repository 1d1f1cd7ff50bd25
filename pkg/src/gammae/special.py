"""Special functions for Gamma-distribution arithmetic.

Self-contained implementations of ``ln Gamma``, digamma and trigamma so the
core library has no external numerical dependency and produces bit-identical
results across builds:

* ``log_gamma`` uses a Lanczos-type rational approximation (Godfrey's 15-term
  coefficient set, g = 607/128), valid for all positive arguments and
  accurate to ~1e-14 relative in double precision.
* ``digamma`` / ``trigamma`` use the ascending recurrence to push the
  argument above 12, then the asymptotic (de Moivre) series.

All three accept scalars or numpy arrays of positive values.  The recurrence
loops are vectorised with masks; the shift count is bounded (<= 12 steps)
regardless of input, so array evaluation stays O(n).
"""

from __future__ import annotations

import numpy as np

from .errors import DomainError

__all__ = ["log_gamma", "digamma", "trigamma", "EULER_MASCHERONI"]

EULER_MASCHERONI = 0.5772156649015328606

_HALF_LOG_2PI = 0.9189385332046727418  # ln(2*pi)/2

# Lanczos coefficients, g = 607/128 (Godfrey).
_LANCZOS_G = 4.7421875
_LANCZOS_C = np.array(
    [
        0.99999999999999709182,
        57.156235665862923517,
        -59.597960355475491248,
        14.136097974741747174,
        -0.49191381609762019978,
        0.33994649984811888699e-4,
        0.46523628927048575665e-4,
        -0.98374475304879564677e-4,
        0.15808870322491248884e-3,
        -0.21026444172410488319e-3,
        0.21743961811521264320e-3,
        -0.16431810653676389022e-3,
        0.84418223983852743293e-4,
        -0.26190838401581408670e-4,
        0.36899182659531622704e-5,
    ]
)

# Asymptotic series x >= _ASYMPTOTIC_CUTOFF: even Bernoulli terms B_2n/(2n).
_ASYMPTOTIC_CUTOFF = 12.0
_PSI_SERIES = np.array(
    [
        1.0 / 12.0,
        -1.0 / 120.0,
        1.0 / 252.0,
        -1.0 / 240.0,
        1.0 / 132.0,
        -691.0 / 32760.0,
        1.0 / 12.0,
    ]
)
# trigamma asymptotic: 1/x + 1/(2x^2) + sum B_2n / x^(2n+1)
_PSI1_SERIES = np.array(
    [
        1.0 / 6.0,
        -1.0 / 30.0,
        1.0 / 42.0,
        -1.0 / 30.0,
        5.0 / 66.0,
        -691.0 / 2730.0,
        7.0 / 6.0,
    ]
)


def _as_positive_array(x, name: str) -> tuple[np.ndarray, bool]:
    arr = np.asarray(x, dtype=np.float64)
    scalar = arr.ndim == 0
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0.0):
        raise DomainError(f"{name} requires finite positive input")
    return np.atleast_1d(arr), scalar


def log_gamma(x):
    """Natural log of the Gamma function for x > 0.

    Relative accuracy ~1e-14 on [1e-3, 1e4] (checked against a
    high-precision reference in the test corpus).
    """
    arr, scalar = _as_positive_array(x, "log_gamma")
    series = np.full(arr.shape, _LANCZOS_C[0])
    for k in range(1, len(_LANCZOS_C)):
        series += _LANCZOS_C[k] / (arr + (k - 1))
    t = arr + _LANCZOS_G - 0.5
    out = _HALF_LOG_2PI + (arr - 0.5) * np.log(t) - t + np.log(series)
    return float(out[0]) if scalar else out


def _shift_count(arr: np.ndarray) -> np.ndarray:
    # Smallest integer n with arr + n >= cutoff.
    return np.maximum(np.ceil(_ASYMPTOTIC_CUTOFF - arr), 0.0).astype(np.int64)


def digamma(x):
    """Digamma function psi(x) = d/dx ln Gamma(x) for x > 0.

    Recurrence psi(x) = psi(x+1) - 1/x lifts the argument above 12, then the
    asymptotic series in 1/x^2 is applied.  Relative accuracy ~1e-13.
    """
    arr, scalar = _as_positive_array(x, "digamma")
    shifts = _shift_count(arr)
    acc = np.zeros_like(arr)
    work = arr.copy()
    for step in range(int(shifts.max()) if shifts.size else 0):
        mask = shifts > step
        acc[mask] -= 1.0 / work[mask]
        work[mask] += 1.0
    inv2 = 1.0 / (work * work)
    tail = np.zeros_like(work)
    for coeff in _PSI_SERIES[::-1]:
        tail = (tail + coeff) * inv2
    out = acc + np.log(work) - 0.5 / work - tail
    return float(out[0]) if scalar else out


def trigamma(x):
    """Trigamma function psi'(x) for x > 0 (derivative of digamma).

    Same recurrence-plus-asymptotic construction as :func:`digamma`;
    needed for gradients of the closed-form KL divergence.
    """
    arr, scalar = _as_positive_array(x, "trigamma")
    shifts = _shift_count(arr)
    acc = np.zeros_like(arr)
    work = arr.copy()
    for step in range(int(shifts.max()) if shifts.size else 0):
        mask = shifts > step
        acc[mask] += 1.0 / (work[mask] * work[mask])
        work[mask] += 1.0
    inv = 1.0 / work
    inv2 = inv * inv
    tail = np.zeros_like(work)
    for coeff in _PSI1_SERIES[::-1]:
        tail = (tail + coeff) * inv2
    out = acc + inv + 0.5 * inv2 + tail * inv
    return float(out[0]) if scalar else out
