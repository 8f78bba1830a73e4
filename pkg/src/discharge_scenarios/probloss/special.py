"""
Inverse error function and the standard normal quantile built on it.

The starting point is Giles' single-precision polynomial approximation
("Approximating the erfinv function", GPU Computing Gems, 2011). Three
Halley steps on ``erf(y) = x`` bring it to double precision. For
``|x| > 0.5`` the residual is taken as ``(1 - |x|) - erfc(y)`` instead of
``erf(y) - |x|``; ``1 - |x|`` is exact there, so the tails keep their
accuracy.
"""

import numpy as np
from scipy import special

from discharge_scenarios.exceptions import DomainError

_CENTRAL = (
    2.81022636e-08,
    3.43273939e-07,
    -3.5233877e-06,
    -4.39150654e-06,
    0.00021858087,
    -0.00125372503,
    -0.00417768164,
    0.246640727,
    1.50140941,
)
_TAIL = (
    -0.000200214257,
    0.000100950558,
    0.00134934322,
    -0.00367342844,
    0.00573950773,
    -0.0076224613,
    0.00943887047,
    1.00167406,
    2.83297682,
)
_TWO_OVER_SQRT_PI = 2.0 / np.sqrt(np.pi)


def _initial_guess(a):
    w = -np.log((1.0 - a) * (1.0 + a))
    central = w < 5.0
    wc = np.where(central, w - 2.5, np.sqrt(w) - 3.0)
    p = np.where(central, _CENTRAL[0], _TAIL[0])
    for c, t in zip(_CENTRAL[1:], _TAIL[1:]):
        p = np.where(central, c, t) + p * wc
    return p * a


def erfinv(x):
    """Return ``y`` with ``erf(y) = x`` for ``-1 < x < 1``."""
    arr = np.asarray(x, dtype=float)
    if np.any(~(np.abs(arr) < 1.0)):
        raise DomainError(f"erfinv is defined on the open interval (-1, 1), got {x!r}")

    a = np.abs(arr)
    y = _initial_guess(a)
    tail = a > 0.5
    complement = 1.0 - a
    for _ in range(3):
        residual = np.where(tail, complement - special.erfc(y), special.erf(y) - a)
        slope = _TWO_OVER_SQRT_PI * np.exp(-y * y)
        y = y - residual / (slope + y * residual)
    y = np.copysign(y, arr)
    if np.ndim(x) == 0:
        return float(y)
    return y


def std_normal_quantile(q):
    """Standard normal quantile ``sqrt(2) * erfinv(2q - 1)``."""
    arr = np.asarray(q, dtype=float)
    if np.any(~((arr > 0.0) & (arr < 1.0))):
        raise DomainError(f"quantile level must lie in (0, 1), got {q!r}")
    z = np.sqrt(2.0) * erfinv(2.0 * arr - 1.0)
    if np.ndim(q) == 0:
        return float(z)
    return z
