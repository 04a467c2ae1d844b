"""Complex Gamma and Gauss hypergeometric functions.

Gamma uses a 15-term Lanczos sum (g = 607/128).  Everything here is
self-contained so the resonance code does not depend on which special
function library happens to be installed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "GammaPoleError",
    "HypergeometricConvergenceError",
    "GammaPoleReport",
    "ln_gamma",
    "gamma",
    "rgamma",
    "gamma_pole_report",
    "hyp2f1",
    "gauss_value",
]

POLE_TOL = 1e-12
SERIES_CAP = 100_000
INTEGER_GAP_TOL = 1e-8
PERTURBATION = 1e-6

_LANCZOS_G = 607.0 / 128.0
_LANCZOS_COEF = np.array([
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
])
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


class GammaPoleError(ValueError):
    """Raised when a Gamma argument sits on (or within tolerance of) a pole."""

    def __init__(self, argument, message=None):
        self.argument = argument
        super().__init__(message or f"Gamma pole at argument {argument!r}")


class HypergeometricConvergenceError(ArithmeticError):
    """Series did not reach machine precision within the iteration cap."""


@dataclass(frozen=True)
class GammaPoleReport:
    is_pole: bool
    nearest_nonpositive_integer: int | None
    distance: float


def _nearest_pole(z: complex) -> tuple[int, float]:
    k = min(0, int(round(z.real)))
    return k, abs(z - k)


def gamma_pole_report(z, tol: float = 1e-9) -> GammaPoleReport:
    """Report whether ``z`` lies within ``tol`` of a pole of Gamma."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    k, dist = _nearest_pole(complex(z))
    if dist <= tol:
        return GammaPoleReport(True, k, dist)
    return GammaPoleReport(False, None, dist)


def _check_poles(z: np.ndarray, tol: float = POLE_TOL) -> None:
    k = np.minimum(0.0, np.round(z.real))
    dist = np.abs(z - k)
    bad = dist < tol
    if np.any(bad):
        raise GammaPoleError(complex(z[bad].flat[0]))


def _lanczos_log(z: np.ndarray) -> np.ndarray:
    # valid for Re z >= 1/2
    zz = z - 1.0
    acc = np.full(zz.shape, _LANCZOS_COEF[0], dtype=complex)
    for k in range(1, len(_LANCZOS_COEF)):
        acc = acc + _LANCZOS_COEF[k] / (zz + k)
    t = zz + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (zz + 0.5) * np.log(t) - t + np.log(acc)


def _sinpi(z: np.ndarray) -> np.ndarray:
    n = np.round(z.real)
    w = z - n
    sign = np.where(np.mod(n, 2.0) == 0.0, 1.0, -1.0)
    return sign * np.sin(np.pi * w)


def _prepare(z):
    arr = np.asarray(z, dtype=complex)
    return arr, arr.ndim == 0


def _finish(out: np.ndarray, scalar: bool):
    return complex(out) if scalar else out


def _ln_gamma_array(z: np.ndarray) -> np.ndarray:
    z = np.atleast_1d(z)
    out = np.empty(z.shape, dtype=complex)
    right = z.real >= 0.5
    out[right] = _lanczos_log(z[right])
    if np.any(~right):
        # shift up with log Gamma(z) = log Gamma(z+m) - sum log(z+k); this
        # keeps the principal (continuous) branch
        zl = z[~right]
        m = np.ceil(0.5 - zl.real).astype(int)
        acc = _lanczos_log(zl + m)
        for k in range(int(m.max())):
            active = k < m
            acc[active] -= np.log(zl[active] + k)
        out[~right] = acc
    return out


def ln_gamma(z):
    """Principal branch of log Gamma for complex ``z`` (scalar or array)."""
    arr, scalar = _prepare(z)
    _check_poles(np.atleast_1d(arr))
    return _finish(_ln_gamma_array(arr).reshape(arr.shape), scalar)


def gamma(z):
    """Gamma function; reflection formula for Re z < 1/2."""
    arr, scalar = _prepare(z)
    flat = np.atleast_1d(arr)
    _check_poles(flat)
    out = np.empty(flat.shape, dtype=complex)
    right = flat.real >= 0.5
    out[right] = np.exp(_ln_gamma_array(flat[right]))
    if np.any(~right):
        zl = flat[~right]
        out[~right] = np.pi / (_sinpi(zl) * np.exp(_ln_gamma_array(1.0 - zl)))
    return _finish(out.reshape(arr.shape), scalar)


def rgamma(z):
    """Reciprocal Gamma, an entire function (exactly zero at the poles)."""
    arr, scalar = _prepare(z)
    flat = np.atleast_1d(arr)
    out = np.empty(flat.shape, dtype=complex)
    right = flat.real >= 0.5
    out[right] = np.exp(-_ln_gamma_array(flat[right]))
    if np.any(~right):
        zl = flat[~right]
        out[~right] = _sinpi(zl) * np.exp(_ln_gamma_array(1.0 - zl)) / np.pi
    return _finish(out.reshape(arr.shape), scalar)


def _series(a: complex, b: complex, c: complex, x: float) -> complex:
    term = 1.0 + 0.0j
    total = 1.0 + 0.0j
    quiet = 0
    for k in range(SERIES_CAP):
        term *= (a + k) * (b + k) / ((c + k) * (k + 1)) * x
        total += term
        if term == 0:
            return total
        if abs(term) <= 1e-17 * abs(total):
            quiet += 1
            if quiet >= 3:
                return total
        else:
            quiet = 0
    raise HypergeometricConvergenceError(
        f"2F1({a}, {b}; {c}; {x}) not converged after {SERIES_CAP} terms")


def _one_minus_x(a: complex, b: complex, c: complex, x: float) -> complex:
    d = c - a - b
    y = 1.0 - x
    g_c = gamma(c)
    t1 = g_c * gamma(d) * rgamma(c - a) * rgamma(c - b) * _series(a, b, 1.0 - d, y)
    t2 = (y ** d) * g_c * gamma(-d) * rgamma(a) * rgamma(b) * _series(c - a, c - b, 1.0 + d, y)
    return t1 + t2


def hyp2f1(a, b, c, x: float) -> complex:
    """Gauss hypergeometric function F(a, b; c; x) for real ``x`` in [0, 1).

    Direct series for x <= 1/2, the 1 - x connection formula above that.
    When c - a - b is within 1e-8 of an integer the connection formula is
    singular; ``c`` is then shifted by +/-1e-6 and the two results averaged.
    """
    a, b, c = complex(a), complex(b), complex(c)
    x = float(x)
    if not 0.0 <= x < 1.0:
        raise ValueError(f"x must lie in [0, 1), got {x}")
    if gamma_pole_report(c, POLE_TOL).is_pole:
        raise GammaPoleError(c, f"c = {c} is a nonpositive integer")
    if x == 0.0:
        return 1.0 + 0.0j
    if x <= 0.5:
        return _series(a, b, c, x)
    d = c - a - b
    if abs(d - round(d.real)) < INTEGER_GAP_TOL:
        hi = _one_minus_x(a, b, c + PERTURBATION, x)
        lo = _one_minus_x(a, b, c - PERTURBATION, x)
        return 0.5 * (hi + lo)
    return _one_minus_x(a, b, c, x)


def gauss_value(a, b, c) -> complex:
    """F(a, b; c; 1) = Gamma(c) Gamma(c-a-b) / (Gamma(c-a) Gamma(c-b))."""
    a, b, c = complex(a), complex(b), complex(c)
    if (c - a - b).real <= 0:
        raise ValueError("Gauss summation needs Re(c - a - b) > 0")
    return gamma(c) * gamma(c - a - b) * rgamma(c - a) * rgamma(c - b)
