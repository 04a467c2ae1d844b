"""Separated-sector spectral data for the two model problems."""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

__all__ = [
    "Problem",
    "ModeClass",
    "ModeSpec",
    "CouplingError",
    "sphere_eigenvalue",
    "nu",
    "dirac_indicial",
    "wave_mode_exceptional",
    "is_near_integer",
    "INTEGER_TOL",
]

INTEGER_TOL = 1e-10


class Problem(str, Enum):
    WAVE = "wave"
    DIRAC = "dirac"


class ModeClass(str, Enum):
    GENERIC = "generic"
    RESOLVENT_REGULAR = "resolvent_regular"  # 1/2 + nu is an integer
    INTEGER_NU = "integer_nu"


class CouplingError(ValueError):
    """Parameters outside the admissible range."""


def is_near_integer(x: float, tol: float = INTEGER_TOL) -> bool:
    return abs(x - round(x)) <= tol


def sphere_eigenvalue(j: int, n: int) -> float:
    """Eigenvalue j(j + n - 2) of the Laplacian on S^{n-1}."""
    if j < 0 or n < 3:
        raise ValueError(f"need j >= 0 and n >= 3, got j={j}, n={n}")
    return float(j * (j + n - 2))


def coupling_threshold(n: int) -> float:
    return -((n - 2) / 2.0) ** 2


def nu(j: int, n: int, coupling: float) -> float:
    """sqrt(((n-2)/2)^2 + lambda_j + coupling)."""
    if coupling <= coupling_threshold(n):
        raise CouplingError(
            f"coupling {coupling} must exceed {coupling_threshold(n)} for n={n}")
    return math.sqrt(((n - 2) / 2.0) ** 2 + sphere_eigenvalue(j, n) + coupling)


def dirac_indicial(kappa: int, Z: float) -> float:
    """Indicial exponent sqrt(kappa^2 - Z^2) of a Dirac-Coulomb sector."""
    if kappa == 0 or int(kappa) != kappa:
        raise CouplingError(f"kappa must be a nonzero integer, got {kappa}")
    if abs(Z) >= 0.5:
        raise CouplingError(f"|Z| must be < 1/2, got {Z}")
    return math.sqrt(kappa * kappa - Z * Z)


@dataclass(frozen=True)
class ModeSpec:
    """One separated sector.

    For the wave problem ``coupling`` is the inverse-square strength and
    ``mode`` the spherical-harmonic degree j; for Dirac-Coulomb ``coupling``
    is the charge Z, ``mode`` is kappa and n is fixed to 3.
    """

    problem: Problem
    n: int
    coupling: float
    mode: int

    def __post_init__(self):
        object.__setattr__(self, "problem", Problem(self.problem))
        if self.problem is Problem.WAVE:
            if self.n < 3:
                raise CouplingError(f"n must be >= 3, got {self.n}")
            if self.mode < 0:
                raise CouplingError(f"j must be >= 0, got {self.mode}")
            nu(self.mode, self.n, self.coupling)
        else:
            if self.n != 3:
                raise CouplingError("Dirac-Coulomb is posed in n = 3 only")
            dirac_indicial(self.mode, self.coupling)

    @classmethod
    def wave(cls, n: int, coupling: float, j: int = 0) -> "ModeSpec":
        return cls(Problem.WAVE, n, float(coupling), j)

    @classmethod
    def dirac(cls, Z: float, kappa: int = 1) -> "ModeSpec":
        return cls(Problem.DIRAC, 3, float(Z), kappa)

    @property
    def exponent(self) -> float:
        """nu_j for the wave problem, sqrt(kappa^2 - Z^2) for Dirac."""
        if self.problem is Problem.WAVE:
            return nu(self.mode, self.n, self.coupling)
        return dirac_indicial(self.mode, self.coupling)

    @property
    def eigenvalue(self) -> float:
        return sphere_eigenvalue(self.mode, self.n)


def wave_mode_exceptional(spec: ModeSpec) -> ModeClass:
    if spec.problem is not Problem.WAVE:
        raise ValueError("only defined for the wave problem")
    v = spec.exponent
    if is_near_integer(0.5 + v):
        return ModeClass.RESOLVENT_REGULAR
    if is_near_integer(v):
        return ModeClass.INTEGER_NU
    return ModeClass.GENERIC
