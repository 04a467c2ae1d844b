"""1-D radial evolution for a single separated sector.

Wave: the regularized field w = r^{(n-2)/2 - nu} u satisfies

    w_tt = w_rr + ((1 + 2 nu)/r) w_r,

a radial wave equation in effective dimension 2 + 2 nu.  It is discretized
in flux form on the staggered grid r_i = (i + 1/2) h,

    V_i w_i'' = [W_{i+1/2}(w_{i+1} - w_i) - W_{i-1/2}(w_i - w_{i-1})] / h^2,

with W = r^p at faces, V_i the cell average of r^p (p = 1 + 2 nu) and
W_0 = 0 at the origin face, then stepped with leapfrog.  The scheme
conserves a discrete energy exactly.

Dirac: i d/dt (f, g) = [[-Z/r, -d/dr + kappa/r], [d/dr + kappa/r, -Z/r]] (f, g).
Strang splitting: exact 2x2 exponential of the potential, and for the
derivative part an exact characteristic shift of p = f + i g (inward) and
q = f - i g (outward) at dt = h.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np
from numba import njit

from .geometry import FixedR, NullOffset, Ray, Trajectory, trajectory_radius
from .spectrum import ModeSpec, Problem

__all__ = [
    "Grid",
    "GaussianBump",
    "CInfBump",
    "InitialData",
    "RadialState",
    "TimeSeries",
    "EvolutionResult",
    "EvolutionError",
    "CFLError",
    "CleanWindowError",
    "NumericalInstabilityError",
    "wave_evolve",
    "dirac_evolve",
    "evolve",
    "energy",
    "l2_norm",
    "required_radius",
    "final_profile",
    "self_convergence",
]

WAVE_CFL = 0.4
DEFAULT_H = 0.02
DEFAULT_SAMPLE_DT = 0.2


class EvolutionError(RuntimeError):
    pass


class CFLError(EvolutionError, ValueError):
    pass


class CleanWindowError(EvolutionError, ValueError):
    pass


class NumericalInstabilityError(EvolutionError):
    def __init__(self, t: float, message: str | None = None):
        self.t = t
        super().__init__(message or f"non-finite field at t = {t:.6g}")


# ---------------------------------------------------------------- data


@dataclass(frozen=True)
class GaussianBump:
    center: float = 6.0
    width: float = 1.0
    amplitude: float = 1.0

    def __post_init__(self):
        if self.width <= 0:
            raise ValueError("width must be positive")
        if self.center <= 0:
            raise ValueError("Gaussian center must be positive")

    @property
    def extent(self) -> float:
        return self.center + 8.0 * self.width

    def __call__(self, r: np.ndarray) -> np.ndarray:
        return self.amplitude * np.exp(-(((r - self.center) / self.width) ** 2))


@dataclass(frozen=True)
class CInfBump:
    r1: float
    r2: float
    amplitude: float = 1.0

    def __post_init__(self):
        if not 0 < self.r1 < self.r2:
            raise ValueError("CInfBump needs 0 < r1 < r2")

    @property
    def extent(self) -> float:
        return self.r2

    def __call__(self, r: np.ndarray) -> np.ndarray:
        r = np.asarray(r, float)
        x = (2.0 * r - self.r1 - self.r2) / (self.r2 - self.r1)
        out = np.zeros_like(r)
        inside = np.abs(x) < 1.0
        out[inside] = self.amplitude * np.exp(1.0 - 1.0 / (1.0 - x[inside] ** 2))
        return out


Profile = Union[GaussianBump, CInfBump]

_WAVE_SEEDS = ("velocity", "displacement", "both")
_DIRAC_SEEDS = ("both", "f", "g")


@dataclass(frozen=True)
class InitialData:
    """Sum of profiles, applied at u level (wave) or to (f, g) (Dirac).

    wave_seed: "velocity" puts the profile in u_t, "displacement" in u,
    "both" in u and u_t.  dirac_seed: which of f, g carry the profile.
    """

    profiles: tuple[Profile, ...] = (GaussianBump(),)
    wave_seed: str = "velocity"
    dirac_seed: str = "both"

    def __post_init__(self):
        object.__setattr__(self, "profiles", tuple(self.profiles))
        if self.wave_seed not in _WAVE_SEEDS:
            raise ValueError(f"wave_seed must be one of {_WAVE_SEEDS}")
        if self.dirac_seed not in _DIRAC_SEEDS:
            raise ValueError(f"dirac_seed must be one of {_DIRAC_SEEDS}")

    @classmethod
    def zero(cls) -> "InitialData":
        return cls((GaussianBump(amplitude=0.0),))

    @property
    def extent(self) -> float:
        return max((p.extent for p in self.profiles), default=0.0)

    def profile(self, r: np.ndarray) -> np.ndarray:
        out = np.zeros_like(np.asarray(r, float))
        for p in self.profiles:
            out = out + p(r)
        return out


def required_radius(t_max: float, trajectories: Sequence[Trajectory], extent: float,
                    h: float) -> float:
    """Smallest R for which no reflection off r = R reaches a sampler by t_max.

    A signal leaving the data support at r <= extent reflects at R and is back
    at radius r at time 2R - extent - r; we need that later than t.
    """
    t = np.linspace(0.0, t_max, 2001)
    reach = t_max
    for tr in trajectories:
        reach = max(reach, float(np.max(t + trajectory_radius(tr, t))))
    return (reach + extent) / 2.0 + 10.0 * h


@dataclass(frozen=True)
class Grid:
    """Staggered grid r_i = (i + 1/2) h, i = 0..N-1, outer radius R = (N - 1/2) h."""

    h: float = DEFAULT_H
    t_max: float = 400.0
    N: int = 0
    dt: float | None = None

    def __post_init__(self):
        if self.h <= 0 or self.t_max <= 0:
            raise ValueError("h and t_max must be positive")
        if self.N < 0:
            raise ValueError("N must be >= 0")

    @classmethod
    def for_run(cls, t_max: float, trajectories: Sequence[Trajectory], data: InitialData,
                h: float = DEFAULT_H, dt: float | None = None) -> "Grid":
        R = required_radius(t_max, trajectories, data.extent, h)
        return cls(h=h, t_max=t_max, N=int(math.ceil(R / h + 0.5)) + 1, dt=dt)

    @property
    def R(self) -> float:
        return (self.N - 0.5) * self.h

    @property
    def r(self) -> np.ndarray:
        return (np.arange(self.N) + 0.5) * self.h

    def with_N(self, N: int) -> "Grid":
        return Grid(self.h, self.t_max, N, self.dt)


@dataclass
class RadialState:
    problem: Problem
    t: float
    r: np.ndarray
    fields: tuple[np.ndarray, ...]   # wave: (w_prev, w); dirac: (f, g)
    dt: float
    weights: tuple[np.ndarray, ...] = ()  # wave: (V, W)


@dataclass
class TimeSeries:
    trajectory: Trajectory
    t: np.ndarray
    r: np.ndarray
    values: np.ndarray          # u (wave) or f (Dirac), complex
    aux: np.ndarray | None = None  # g for Dirac

    @property
    def label(self) -> str:
        return self.trajectory.label

    def psi(self) -> np.ndarray:
        """f / r for Dirac sectors (the 3-D spinor amplitude)."""
        return self.values / self.r


@dataclass
class EvolutionResult:
    spec: ModeSpec
    grid: Grid
    series: list[TimeSeries]
    diag_t: np.ndarray
    diagnostic: np.ndarray      # energy (wave) or L2 norm (Dirac)
    final_state: RadialState
    peak: float = field(default=0.0)

    @property
    def drift(self) -> float:
        d0 = self.diagnostic[0]
        if d0 == 0:
            return 0.0
        return float(np.max(np.abs(self.diagnostic - d0)) / abs(d0))


# ---------------------------------------------------------------- kernels


@njit(cache=True, nogil=True)
def _wave_steps(w_prev, w, ap, am, dt2, nsteps):
    n = w.shape[0]
    tmp = np.empty(n)
    for _ in range(nsteps):
        tmp[0] = 2.0 * w[0] - w_prev[0] + dt2 * ap[0] * (w[1] - w[0])
        for i in range(1, n - 1):
            tmp[i] = (2.0 * w[i] - w_prev[i]
                      + dt2 * (ap[i] * (w[i + 1] - w[i]) - am[i] * (w[i] - w[i - 1])))
        tmp[n - 1] = 0.0
        for i in range(n):
            w_prev[i] = w[i]
            w[i] = tmp[i]


@njit(cache=True, nogil=True)
def _dirac_steps(f, g, ep, em, origin_sign, nsteps):
    n = f.shape[0]
    p = np.empty(n, np.complex128)
    q = np.empty(n, np.complex128)
    for _ in range(nsteps):
        for i in range(n):
            s = 0.5 * (f[i] + g[i]) * ep[i]
            d = 0.5 * (f[i] - g[i]) * em[i]
            p[i] = (s + d) + 1j * (s - d)
            q[i] = (s + d) - 1j * (s - d)
        p0 = p[0]
        qn = q[n - 1]
        for i in range(n - 1):
            p[i] = p[i + 1]
        p[n - 1] = -qn
        for i in range(n - 1, 0, -1):
            q[i] = q[i - 1]
        q[0] = origin_sign * p0
        for i in range(n):
            ff = 0.5 * (p[i] + q[i])
            gg = -0.5j * (p[i] - q[i])
            s = 0.5 * (ff + gg) * ep[i]
            d = 0.5 * (ff - gg) * em[i]
            f[i] = s + d
            g[i] = s - d


# ---------------------------------------------------------------- sampling


def _lagrange4(field_vals: np.ndarray, h: float, r: np.ndarray, parity: float) -> np.ndarray:
    """Cubic Lagrange interpolation on the staggered grid with mirror ghosts.

    Ghost cells at negative r take parity * (mirror value).
    """
    N = field_vals.shape[0]
    x = r / h - 0.5
    i1 = np.floor(x).astype(int)
    i1 = np.clip(i1, -1, N - 3)
    frac = x - i1
    idx = i1[:, None] + np.arange(-1, 3)[None, :]
    vals = np.empty(idx.shape, dtype=field_vals.dtype)
    neg = idx < 0
    safe = np.where(neg, -1 - idx, idx)
    safe = np.minimum(safe, N - 1)
    vals[:] = field_vals[safe]
    vals[neg] *= parity
    s = frac
    c0 = -s * (s - 1) * (s - 2) / 6.0
    c1 = (s + 1) * (s - 1) * (s - 2) / 2.0
    c2 = -(s + 1) * s * (s - 2) / 2.0
    c3 = (s + 1) * s * (s - 1) / 6.0
    return c0 * vals[:, 0] + c1 * vals[:, 1] + c2 * vals[:, 2] + c3 * vals[:, 3]


def _sample_radii(trajectories, t: float, h: float) -> np.ndarray:
    r = np.array([float(trajectory_radius(tr, t)) for tr in trajectories])
    return np.maximum(r, 0.5 * h)


def _check_trajectories(grid: Grid, trajectories, extent: float) -> None:
    for tr in trajectories:
        if not isinstance(tr, (FixedR, Ray, NullOffset)):
            raise TypeError(f"unsupported trajectory {tr!r}")
    need = required_radius(grid.t_max, trajectories, extent, grid.h)
    if grid.R < need:
        raise CleanWindowError(
            f"outer radius {grid.R:.4g} too small: samplers need R >= {need:.4g} "
            f"for a reflection-free window up to t = {grid.t_max}")


def _sample_stride(sample_dt: float, dt: float) -> int:
    return max(1, int(round(sample_dt / dt)))


# ---------------------------------------------------------------- wave


def _wave_weights(r: np.ndarray, h: float, nu_: float):
    p = 1.0 + 2.0 * nu_
    faces = (np.arange(r.size + 1)) * h          # r_{i-1/2}, i = 0..N
    V = (faces[1:] ** (p + 1) - faces[:-1] ** (p + 1)) / ((p + 1) * h)
    W = faces ** p                                 # W[0] = 0 at the origin face
    return V, W


def energy(state: RadialState) -> float:
    """Conserved leapfrog energy of the w-equation at t - dt/2.

    sum V ((w - w_prev)/dt)^2 h + sum W (D w)(D w_prev)/h, a discretization
    of the integral of (w_t^2 + w_r^2) r^{1+2 nu} dr.
    """
    if state.problem is not Problem.WAVE:
        raise ValueError("energy is defined for wave states; use l2_norm")
    w_prev, w = state.fields
    V, W = state.weights
    h = state.r[1] - state.r[0]
    vel = (w - w_prev) / state.dt
    kin = float(np.sum(V * vel * vel) * h)
    pot = float(np.sum(W[1:-1] * np.diff(w) * np.diff(w_prev)) / h)
    pot += float(W[-1] * w[-1] * w_prev[-1] / h)
    return kin + pot


def l2_norm(state: RadialState) -> float:
    """sum (|f|^2 + |g|^2) h."""
    if state.problem is not Problem.DIRAC:
        raise ValueError("l2_norm is defined for Dirac states; use energy")
    f, g = state.fields
    h = state.r[1] - state.r[0]
    return float(np.sum(np.abs(f) ** 2 + np.abs(g) ** 2) * h)


def _require_finite(arrs, t):
    for a in arrs:
        if not np.all(np.isfinite(a)):
            raise NumericalInstabilityError(t)


def wave_evolve(spec: ModeSpec, grid: Grid, data: InitialData,
                samplers: Sequence[Trajectory], sample_dt: float = DEFAULT_SAMPLE_DT
                ) -> EvolutionResult:
    if spec.problem is not Problem.WAVE:
        raise ValueError("wave_evolve needs a wave ModeSpec")
    h = grid.h
    dt = WAVE_CFL * h if grid.dt is None else grid.dt
    if dt <= 0 or dt > WAVE_CFL * h * (1 + 1e-12):
        raise CFLError(f"dt = {dt} violates dt <= {WAVE_CFL} h = {WAVE_CFL * h}")
    _check_trajectories(grid, samplers, data.extent)
    nu_ = spec.exponent
    shift = (spec.n - 2) / 2.0 - nu_
    r = grid.r
    V, W = _wave_weights(r, h, nu_)
    ap = W[1:] / (V * h * h)
    am = W[:-1] / (V * h * h)
    dt2 = dt * dt

    prof = data.profile(r) * r ** shift
    w0 = prof if data.wave_seed in ("displacement", "both") else np.zeros_like(r)
    v0 = prof if data.wave_seed in ("velocity", "both") else np.zeros_like(r)
    w0 = w0.copy()
    w0[-1] = 0.0
    lw0 = np.zeros_like(r)
    lw0[:-1] = (ap * np.append(np.diff(w0), 0.0) - am * np.insert(np.diff(w0), 0, 0.0))[:-1]
    w1 = w0 + dt * v0 + 0.5 * dt2 * lw0
    w1[-1] = 0.0
    w_prev, w = w0, w1

    nsteps = int(round(grid.t_max / dt))
    stride = _sample_stride(sample_dt, dt)
    state = RadialState(Problem.WAVE, dt, r, (w_prev, w), dt, (V, W))

    times, vals, radii, diag = [], [], [], []
    step = 1
    while True:
        t = step * dt
        rs = _sample_radii(samplers, t, h)
        if len(samplers):
            wv = _lagrange4(w, h, rs, 1.0)
            vals.append(wv * rs ** (-shift))
            radii.append(rs)
        times.append(t)
        diag.append(energy(state))
        if step >= nsteps:
            break
        k = min(stride, nsteps - step)
        _wave_steps(w_prev, w, ap, am, dt2, k)
        step += k
        state.t = step * dt
        if not (np.isfinite(w[0]) and np.isfinite(np.max(np.abs(w)))):
            raise NumericalInstabilityError(state.t)

    return _package(spec, grid, samplers, times, vals, radii, None, diag, state)


# ---------------------------------------------------------------- dirac


def _dirac_origin_sign(kappa: int) -> float:
    # reflection of the incoming characteristic p = f + i g at r = 0 selecting
    # the regular r^{|kappa|}-type branch
    return 1.0 if kappa < 0 else -1.0


def dirac_evolve(spec: ModeSpec, grid: Grid, data: InitialData,
                 samplers: Sequence[Trajectory], sample_dt: float = DEFAULT_SAMPLE_DT
                 ) -> EvolutionResult:
    if spec.problem is not Problem.DIRAC:
        raise ValueError("dirac_evolve needs a Dirac ModeSpec")
    h = grid.h
    dt = h if grid.dt is None else grid.dt
    if abs(dt - h) > 1e-12 * h:
        raise CFLError(f"Dirac transport is an exact shift and needs dt = h; got dt = {dt}")
    _check_trajectories(grid, samplers, data.extent)
    Z, kappa = spec.coupling, spec.mode
    r = grid.r
    lp = (kappa - Z) / r
    lm = (-kappa - Z) / r
    ep = np.exp(-0.5j * lp * dt)
    em = np.exp(-0.5j * lm * dt)

    prof = data.profile(r).astype(complex)
    f = prof.copy() if data.dirac_seed in ("both", "f") else np.zeros_like(prof)
    g = prof.copy() if data.dirac_seed in ("both", "g") else np.zeros_like(prof)
    f[-1] = g[-1] = 0.0
    sign = _dirac_origin_sign(kappa)

    nsteps = int(round(grid.t_max / dt))
    stride = _sample_stride(sample_dt, dt)
    state = RadialState(Problem.DIRAC, 0.0, r, (f, g), dt)

    times, vals, auxs, radii, diag = [], [], [], [], []
    step = 0
    while True:
        t = step * dt
        rs = _sample_radii(samplers, t, h)
        if len(samplers):
            vals.append(_lagrange4(f, h, rs, -1.0))
            auxs.append(_lagrange4(g, h, rs, -1.0))
            radii.append(rs)
        times.append(t)
        diag.append(l2_norm(state))
        if step >= nsteps:
            break
        k = min(stride, nsteps - step)
        _dirac_steps(f, g, ep, em, sign, k)
        step += k
        state.t = step * dt
        if not np.isfinite(np.max(np.abs(f))):
            raise NumericalInstabilityError(state.t)

    return _package(spec, grid, samplers, times, vals, radii, auxs, diag, state)


def _package(spec, grid, samplers, times, vals, radii, auxs, diag, state) -> EvolutionResult:
    t = np.asarray(times)
    series = []
    if len(samplers):
        V = np.asarray(vals, dtype=complex)
        Rr = np.asarray(radii)
        A = np.asarray(auxs, dtype=complex) if auxs is not None else None
        for k, tr in enumerate(samplers):
            series.append(TimeSeries(tr, t.copy(), Rr[:, k].copy(), V[:, k].copy(),
                                     None if A is None else A[:, k].copy()))
    peak = max((float(np.max(np.abs(s.values))) for s in series), default=0.0)
    return EvolutionResult(spec, grid, series, t, np.asarray(diag), state, peak)


def evolve(spec: ModeSpec, grid: Grid, data: InitialData, samplers: Sequence[Trajectory],
           sample_dt: float = DEFAULT_SAMPLE_DT) -> EvolutionResult:
    if spec.problem is Problem.WAVE:
        return wave_evolve(spec, grid, data, samplers, sample_dt)
    return dirac_evolve(spec, grid, data, samplers, sample_dt)


def final_profile(result: EvolutionResult, xs) -> np.ndarray:
    """u (wave) or f (Dirac) of the final state, interpolated at radii ``xs``."""
    st = result.final_state
    xs = np.asarray(xs, float)
    h = st.r[1] - st.r[0]
    if st.problem is Problem.WAVE:
        spec = result.spec
        shift = (spec.n - 2) / 2.0 - spec.exponent
        return _lagrange4(st.fields[1], h, xs, 1.0) * xs ** (-shift)
    return _lagrange4(st.fields[0], h, xs, -1.0)


def self_convergence(spec: ModeSpec, data: InitialData, t_end: float = 20.0,
                     R: float = 40.0, h0: float = 0.04, levels: int = 4,
                     xs=None) -> tuple[list[float], list[float]]:
    """Successive differences max|F_h - F_{h/2}| at t_end and the implied orders.

    Returns (differences, orders) with orders[k] = log2(d_k / d_{k+1}).
    """
    if xs is None:
        xs = np.linspace(0.5, R / 2, 200)
    profiles = []
    for lev in range(levels):
        h = h0 / 2 ** lev
        grid = Grid(h=h, t_max=t_end, N=int(round(R / h + 0.5)))
        res = evolve(spec, grid, data, [], sample_dt=t_end)
        profiles.append(final_profile(res, xs))
    diffs = [float(np.max(np.abs(profiles[k] - profiles[k + 1]))) for k in range(levels - 1)]
    orders = [math.log2(diffs[k] / diffs[k + 1]) for k in range(len(diffs) - 1)]
    return diffs, orders
