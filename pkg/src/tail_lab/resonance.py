"""Resonances of the reduced normal operator for the inverse-square wave.

In the coordinates rho = 1/(t+r), x = 2r/(t+r) each angular mode of the
normal operator reduces to a hypergeometric equation.  Resonances are the
sigma at which the solution regular at C_+ (y4) has no y2 component, i.e.
the zeros of the Kummer connection coefficient

    Gamma(c-1) Gamma(c-a-b+1) / (Gamma(c-a) Gamma(c-b)).
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .specfun import GammaPoleError, gamma, hyp2f1, rgamma
from .spectrum import ModeClass, ModeSpec, Problem, wave_mode_exceptional

__all__ = [
    "HypergeomParams",
    "ResonanceFamily",
    "DegenerateParameterError",
    "AccuracyWarning",
    "hypergeom_params",
    "connection_coeff_y2",
    "closed_form_resonances",
    "locate_resonances_numeric",
    "normal_operator_residual",
    "verify_resonant_state",
]


class DegenerateParameterError(ValueError):
    """A Gamma factor in the numerator of the connection coefficient is singular."""

    def __init__(self, argument, message=None):
        self.argument = argument
        super().__init__(message or f"degenerate parameter: Gamma({argument!r}) is singular")


class AccuracyWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class HypergeomParams:
    a: complex
    b: complex
    c: complex
    s: float
    alpha: float


@dataclass(frozen=True)
class ResonanceFamily:
    spec: ModeSpec
    resonances: tuple[complex, ...]
    leading_exponent: float
    mode_class: ModeClass


def _require_wave(spec: ModeSpec) -> None:
    if spec.problem is not Problem.WAVE:
        raise ValueError("resonance calculus is implemented for the wave problem only")


def hypergeom_params(spec: ModeSpec, sigma: complex) -> HypergeomParams:
    _require_wave(spec)
    s = spec.exponent
    isig = 1j * complex(sigma)
    return HypergeomParams(
        a=complex(0.5 + s),
        b=0.5 + isig + s,
        c=complex(1.0 + 2.0 * s),
        s=s,
        alpha=-(spec.n - 2) / 2.0 + s,
    )


def _coeff_array(s: float, sigma: np.ndarray) -> np.ndarray:
    isig = 1j * sigma
    num_arg = 1.0 - isig                    # c - a - b + 1
    c_minus_b = 0.5 + s - isig
    return gamma(2.0 * s) * gamma(num_arg) * rgamma(0.5 + s) * rgamma(c_minus_b)


def connection_coeff_y2(spec: ModeSpec, sigma: complex) -> complex:
    """Coefficient of y2 when y4 is expanded in the basis (y1, y2)."""
    p = hypergeom_params(spec, sigma)
    for arg in (p.c - 1.0, p.c - p.a - p.b + 1.0):
        try:
            g = gamma(arg)
        except GammaPoleError:
            raise DegenerateParameterError(arg) from None
        if not np.isfinite(g):
            raise DegenerateParameterError(arg)
    return complex(_coeff_array(p.s, np.asarray(complex(sigma))))


def closed_form_resonances(spec: ModeSpec, kmax: int) -> ResonanceFamily:
    """sigma_{j,k} = -i (1/2 + s + k), k = 0..kmax."""
    _require_wave(spec)
    if kmax < 0:
        raise ValueError("kmax must be >= 0")
    s = spec.exponent
    res = tuple(complex(0.0, -(0.5 + s + k)) for k in range(kmax + 1))
    return ResonanceFamily(spec, res, -(spec.n - 2) / 2.0 + s, wave_mode_exceptional(spec))


def _safe_abs_coeff(s: float, sig: np.ndarray) -> np.ndarray:
    num_arg = 1.0 - 1j * sig
    k = np.minimum(0.0, np.round(num_arg.real))
    near_pole = np.abs(num_arg - k) < 1e-9
    out = np.full(sig.shape, np.inf)
    ok = ~near_pole
    if np.any(ok):
        out[ok] = np.abs(_coeff_array(s, sig[ok]))
    return out


def _newton(s: float, z0: complex, tol: float, maxit: int = 60):
    """Damped Newton on the (analytic) connection coefficient."""
    f = lambda z: complex(_coeff_array(s, np.asarray(z)))
    z = z0
    fz = f(z)
    for _ in range(maxit):
        dz_h = 1e-6 * max(1.0, abs(z))
        deriv = (f(z + dz_h) - f(z - dz_h)) / (2 * dz_h)
        if deriv == 0 or not np.isfinite(deriv):
            return z, fz, False
        step = fz / deriv
        lam = 1.0
        while lam > 1e-6:
            cand = z - lam * step
            fc = f(cand) if np.isfinite(cand) else np.inf
            if np.isfinite(fc) and abs(fc) < abs(fz):
                break
            lam *= 0.5
        else:
            return z, fz, abs(fz) < tol
        z, fz = cand, fc
        if abs(lam * step) < 1e-14 * max(1.0, abs(z)):
            break
    return z, fz, abs(fz) < tol or abs(step) < 1e-12


def locate_resonances_numeric(spec: ModeSpec, box: tuple[float, float, float, float],
                              grid: int = 64, tol: float = 1e-10) -> list[complex]:
    """Zeros of the connection coefficient inside ``box`` = (re_lo, re_hi, im_lo, im_hi).

    Local minima of |coefficient| on a grid x grid lattice are refined by
    damped Newton.  Grid points on poles of the numerator are skipped.
    """
    _require_wave(spec)
    if grid < 16:
        raise ValueError("grid must be >= 16")
    if wave_mode_exceptional(spec) is ModeClass.RESOLVENT_REGULAR:
        raise DegenerateParameterError(
            0.5 + spec.exponent,
            "1/2 + s is an integer: resonance zeros cancel against numerator poles")
    re_lo, re_hi, im_lo, im_hi = box
    s = spec.exponent
    xs = np.linspace(re_lo, re_hi, grid)
    ys = np.linspace(im_lo, im_hi, grid)
    Z = xs[None, :] + 1j * ys[:, None]
    with np.errstate(all="ignore"):
        A = _safe_abs_coeff(s, Z.ravel()).reshape(Z.shape)
    A[~np.isfinite(A)] = np.inf

    padded = np.pad(A, 1, constant_values=np.inf)
    is_min = np.isfinite(A)
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di == 0 and dj == 0:
                continue
            nb = padded[1 + di:1 + di + grid, 1 + dj:1 + dj + grid]
            is_min &= A <= nb

    dx = (re_hi - re_lo) / (grid - 1)
    dy = (im_hi - im_lo) / (grid - 1)
    pad = 1e-9
    found: list[complex] = []
    for i, j in zip(*np.nonzero(is_min)):
        with np.errstate(all="ignore"):
            z, fz, ok = _newton(s, complex(Z[i, j]), tol)
        inside = (re_lo - pad <= z.real <= re_hi + pad) and (im_lo - pad <= z.imag <= im_hi + pad)
        near_start = abs(z - Z[i, j]) <= 4 * max(dx, dy)
        if not inside:
            continue
        if not ok:
            if near_start and abs(fz) < 1e-6:
                warnings.warn(f"refinement stagnated at {z} (|coeff| = {abs(fz):.2e})",
                              AccuracyWarning, stacklevel=2)
            continue
        if all(abs(z - w) > 1e-7 for w in found):
            found.append(z)
    found.sort(key=lambda z: (-z.imag, z.real))
    return found


def _state(spec: ModeSpec, sigma: complex, x: float) -> complex:
    p = hypergeom_params(spec, sigma)
    return x ** p.alpha * hyp2f1(p.a, p.b, p.c, x)


def normal_operator_residual(spec: ModeSpec, sigma: complex, w, x: float, h: float) -> complex:
    """(1/4) x P_{sigma,j} applied to callable ``w`` at ``x`` by centered differences."""
    n = spec.n
    isig = 1j * complex(sigma)
    wm, w0, wp = w(x - h), w(x), w(x + h)
    d1 = (wp - wm) / (2 * h)
    d2 = (wp - 2 * w0 + wm) / (h * h)
    return (x * (1 - x) * d2 + (n - 1 - x * (n + isig)) * d1
            - (spec.coupling + spec.eigenvalue) / x * w0
            - 0.5 * (n - 1) * (isig + 0.5 * (n - 1)) * w0)


def verify_resonant_state(spec: ModeSpec, k: int, grid_x, h: float = 1e-4,
                          sigma: complex | None = None) -> float:
    """Max |P w| over ``grid_x`` for the candidate state w = x^alpha F(a, b; c; x).

    ``sigma`` defaults to the resonance sigma_{j,k}; any other value also
    gives a solution of the ODE (resonance is a statement about y2 content).
    """
    _require_wave(spec)
    if h > 1e-3 or h <= 0:
        raise ValueError("finite-difference step must satisfy 0 < h <= 1e-3")
    xs = np.asarray(grid_x, dtype=float)
    if np.any(xs - h <= 0) or np.any(xs + h >= 1):
        raise ValueError("grid points must stay inside (0, 1) with margin h")
    if sigma is None:
        sigma = closed_form_resonances(spec, k).resonances[k]
    w = lambda x: _state(spec, sigma, x)
    return max(abs(normal_operator_residual(spec, sigma, w, float(x), h)) for x in xs)
