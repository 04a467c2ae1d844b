"""Compactification charts and trajectory classification.

All charts are theta-independent and future-oriented.  Near null infinity we
use v = (t - r)/(t + r), so the fiber coordinate s = v/rho is t - r.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Sequence, Union

import numpy as np

from .indexsets import IndexSet

__all__ = [
    "Face",
    "FaceLabel",
    "FixedR",
    "Ray",
    "NullOffset",
    "Trajectory",
    "GeometryError",
    "quarter_sphere",
    "half_disk",
    "appendix_coords",
    "appendix_inverse",
    "tf_coords",
    "scri_coords",
    "classify_trajectory",
    "trajectory_radius",
    "synthetic_phg",
    "fit_blowup_exponents",
]


class GeometryError(ValueError):
    pass


class Face(str, Enum):
    C_PLUS = "C_plus"
    TF_PLUS = "tf_plus"
    CF = "cf"
    SCRI_PLUS = "ScriPlus"
    CORNER_C_TF = "Corner_C_tf"
    CORNER_TF_CF = "Corner_tf_cf"
    CORNER_C_SCRI = "Corner_C_Scri"


_INTERIOR = {Face.C_PLUS, Face.TF_PLUS, Face.SCRI_PLUS}


@dataclass(frozen=True)
class FaceLabel:
    face: Face
    interior_coordinate: float | None = None

    def __post_init__(self):
        has = self.interior_coordinate is not None
        if has != (self.face in _INTERIOR):
            raise GeometryError(f"interior coordinate inconsistent with face {self.face.value}")
        c = self.interior_coordinate
        if self.face is Face.C_PLUS and not 0 < c < 1:
            raise GeometryError(f"C_plus needs x in (0, 1), got {c}")
        if self.face is Face.TF_PLUS and not -1 < c < 1:
            raise GeometryError(f"tf_plus needs y in (-1, 1), got {c}")
        if self.face is Face.SCRI_PLUS and not math.isfinite(c):
            raise GeometryError("ScriPlus needs finite s")

    def __str__(self):
        if self.interior_coordinate is None:
            return self.face.value
        return f"{self.face.value}({self.interior_coordinate:.6g})"


@dataclass(frozen=True)
class FixedR:
    r0: float

    def __post_init__(self):
        if not self.r0 > 0:
            raise GeometryError(f"FixedR needs r0 > 0, got {self.r0}")

    @property
    def label(self) -> str:
        return f"r={self.r0:g}"


@dataclass(frozen=True)
class Ray:
    gamma: float

    def __post_init__(self):
        if not 0.0 < self.gamma < 1.0:
            raise GeometryError(f"Ray needs 0 < gamma < 1, got {self.gamma}")

    @property
    def label(self) -> str:
        return f"gamma={self.gamma:g}"


@dataclass(frozen=True)
class NullOffset:
    c: float

    def __post_init__(self):
        if not math.isfinite(self.c):
            raise GeometryError("NullOffset needs finite c")

    @property
    def label(self) -> str:
        return f"t-r={self.c:g}"


Trajectory = Union[FixedR, Ray, NullOffset]


def quarter_sphere(t, r):
    t, r = np.asarray(t, float), np.asarray(r, float)
    if np.any(r <= 0):
        raise GeometryError("r must be positive")
    norm = np.sqrt(1.0 + t * t + r * r)
    return t / norm, r / norm, 1.0 / norm


def half_disk(t, r):
    t, r = np.asarray(t, float), np.asarray(r, float)
    if np.any(r <= 0):
        raise GeometryError("r must be positive")
    d = 1.0 + np.sqrt(1.0 + t * t + r * r)
    return t / d, r / d


def appendix_coords(t, r):
    """(rho, x) = (1/(t+r), 2r/(t+r))."""
    t, r = np.asarray(t, float), np.asarray(r, float)
    sm = t + r
    if np.any(sm <= 0):
        raise GeometryError("need t + r > 0")
    return 1.0 / sm, 2.0 * r / sm


def appendix_inverse(rho, x):
    """(t, r) from (rho, x)."""
    rho, x = np.asarray(rho, float), np.asarray(x, float)
    if np.any(rho <= 0):
        raise GeometryError("need rho > 0")
    return (2.0 - x) / (2.0 * rho), x / (2.0 * rho)


def tf_coords(x, rho):
    """(rho_tf, y) = (x + rho, (x - rho)/(x + rho))."""
    x, rho = np.asarray(x, float), np.asarray(rho, float)
    sm = x + rho
    if np.any(sm == 0):
        raise GeometryError("need x + rho != 0")
    return sm, (x - rho) / sm


def scri_coords(t, r):
    t, r = np.asarray(t, float), np.asarray(r, float)
    if np.any(t + r <= 0):
        raise GeometryError("need t + r > 0")
    return t - r


def classify_trajectory(traj: Trajectory) -> FaceLabel:
    if isinstance(traj, FixedR):
        return FaceLabel(Face.TF_PLUS, (2 * traj.r0 - 1) / (2 * traj.r0 + 1))
    if isinstance(traj, Ray):
        return FaceLabel(Face.C_PLUS, 2 * traj.gamma / (1 + traj.gamma))
    if isinstance(traj, NullOffset):
        return FaceLabel(Face.SCRI_PLUS, float(traj.c))
    raise GeometryError(f"unknown trajectory {traj!r}")


def trajectory_radius(traj: Trajectory, t):
    """r(t) along the trajectory."""
    t = np.asarray(t, float)
    if isinstance(traj, FixedR):
        return np.full_like(t, traj.r0)
    if isinstance(traj, Ray):
        return traj.gamma * t
    if isinstance(traj, NullOffset):
        return t - traj.c
    raise GeometryError(f"unknown trajectory {traj!r}")


def synthetic_phg(E: IndexSet, F: IndexSet, coeffs) -> Callable:
    """u(z, w) = sum_{a in E, b in F} c_ab z^a w^b.

    ``coeffs`` is a len(E) x len(F) array (or a scalar broadcast to it).
    """
    a = np.asarray(E.exponents, float)
    b = np.asarray(F.exponents, float)
    c = np.broadcast_to(np.asarray(coeffs, float), (len(a), len(b))).copy()

    def u(z, w):
        z = np.asarray(z, float)
        w = np.asarray(w, float)
        zp = np.power.outer(z, a) if a.size else np.zeros(z.shape + (0,))
        wp = np.power.outer(w, b) if b.size else np.zeros(w.shape + (0,))
        return np.einsum("...i,ij,...j->...", zp, c, wp)

    return u


def _loglog_slope(x: np.ndarray, y: np.ndarray) -> float:
    return float(np.polyfit(np.log(x), np.log(np.abs(y)), 1)[0])


def fit_blowup_exponents(u: Callable, window: Sequence[float] = (1e-6, 1e-4),
                         s: float = 1.0, npts: int = 41) -> dict[str, float]:
    """Leading exponents of ``u`` at the three faces of the blown-up corner.

    h1: z = S w with S -> 0 at fixed w = s;  ff: (S w, w) with w -> 0 at fixed
    S = s;  h2: (z, W z) with W -> 0 at fixed z = s.
    """
    lo, hi = window
    eps = np.geomspace(lo, hi, npts)
    return {
        "h1": _loglog_slope(eps, u(eps * s, np.full_like(eps, s))),
        "ff": _loglog_slope(eps, u(s * eps, eps)),
        "h2": _loglog_slope(eps, u(np.full_like(eps, s), eps * s)),
    }
