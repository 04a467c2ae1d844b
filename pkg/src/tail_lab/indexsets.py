"""Index sets of polyhomogeneous expansions and the decay-rate table.

Exponents are stored as real decay exponents a, i.e. a term rho^a (log rho)^k.
All index sets arising for these two problems have purely imaginary
resonances and no logarithms, so generators emit log power 0.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

from .spectrum import (
    ModeClass,
    ModeSpec,
    Problem,
    dirac_indicial,
    is_near_integer,
    nu,
    wave_mode_exceptional,
)

__all__ = [
    "IndexSet",
    "BlowupSets",
    "ModeRate",
    "RateTable",
    "UnsupportedParameterError",
    "EmptyIndexSetError",
    "generate_E_IS",
    "generate_F_IS",
    "generate_E_DC",
    "generate_F_DC",
    "minkowski_sum",
    "pullback_blowup",
    "min_exponent",
    "predicted_rates",
    "closed_form_rates",
]

_DEDUP_TOL = 1e-12
_MODE_SEARCH_CAP = 64


class UnsupportedParameterError(ValueError):
    """Rate prediction is not available for these parameters."""


class EmptyIndexSetError(ValueError):
    pass


@dataclass(frozen=True)
class IndexSet:
    """Finite truncation of an index set.

    Every element with exponent below ``truncation`` is present and none at
    or above it is stored.
    """

    elements: tuple[tuple[float, int], ...]
    truncation: float

    def __post_init__(self):
        items = sorted((float(a), int(k)) for a, k in self.elements)
        kept: list[tuple[float, int]] = []
        for a, k in items:
            if a >= self.truncation:
                raise ValueError(f"element {a} not below truncation {self.truncation}")
            if k < 0:
                raise ValueError("log powers must be >= 0")
            if any(abs(a - b) <= _DEDUP_TOL and k == l for b, l in kept):
                continue
            kept.append((a, k))
        object.__setattr__(self, "elements", tuple(kept))
        object.__setattr__(self, "truncation", float(self.truncation))

    @classmethod
    def from_exponents(cls, exponents: Iterable[float], truncation: float) -> "IndexSet":
        return cls(tuple((a, 0) for a in exponents if a < truncation), truncation)

    @property
    def exponents(self) -> list[float]:
        return [a for a, _ in self.elements]

    def lower_bound(self) -> float:
        """Smallest exponent, or the truncation when nothing is stored."""
        return self.elements[0][0] if self.elements else self.truncation

    def restrict(self, bound: float) -> "IndexSet":
        bound = min(bound, self.truncation)
        return IndexSet(tuple(e for e in self.elements if e[0] < bound), bound)

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __add__(self, other: "IndexSet") -> "IndexSet":
        return minkowski_sum(self, other)

    def matches(self, other: "IndexSet", tol: float = 1e-12) -> bool:
        if len(self) != len(other):
            return False
        return all(abs(a - b) <= tol and k == l
                   for (a, k), (b, l) in zip(self.elements, other.elements))


class BlowupSets(NamedTuple):
    h1: IndexSet
    ff: IndexSet
    h2: IndexSet


def minkowski_sum(A: IndexSet, B: IndexSet) -> IndexSet:
    """{(a + b, k + l)} truncated where completeness is still guaranteed."""
    trunc = min(A.truncation + B.lower_bound(), B.truncation + A.lower_bound())
    elems = [(a + b, k + l) for a, k in A for b, l in B if a + b < trunc]
    return IndexSet(tuple(elems), trunc)


def pullback_blowup(E_at_H1: IndexSet, F_at_H2: IndexSet) -> BlowupSets:
    """Index sets after blowing up the corner H1 ∩ H2: (E, E + F, F)."""
    return BlowupSets(E_at_H1, minkowski_sum(E_at_H1, F_at_H2), F_at_H2)


def min_exponent(A: IndexSet) -> tuple[float, int]:
    """Leading term; on an exponent tie the larger log power wins."""
    if not A.elements:
        raise EmptyIndexSetError("index set has no elements below its truncation")
    a0 = A.elements[0][0]
    k0 = max(k for a, k in A.elements if a - a0 <= _DEDUP_TOL)
    return a0, k0


def _wave_modes(n: int, coupling: float, offset: float, L: float, modes):
    """Yield (j, nu_j) with offset + nu_j < L, nu_j increasing in j."""
    if modes is not None:
        for j in modes:
            v = nu(j, n, coupling)
            if offset + v < L:
                yield j, v
        return
    j = 0
    while True:
        v = nu(j, n, coupling)
        if offset + v >= L:
            return
        yield j, v
        j += 1


def generate_E_IS(n: int, coupling: float, L: float,
                  modes: Sequence[int] | None = None) -> IndexSet:
    """n/2 + k + nu_j below L, dropping modes with 1/2 + nu_j an integer."""
    out = []
    for j, v in _wave_modes(n, coupling, n / 2.0, L, modes):
        if is_near_integer(0.5 + v):
            continue
        k = 0
        while n / 2.0 + k + v < L:
            out.append((n / 2.0 + k + v, 0))
            k += 1
    return IndexSet(tuple(out), L)


def generate_F_IS(n: int, coupling: float, L: float,
                  modes: Sequence[int] | None = None,
                  exclude_integer_nu: bool = True) -> IndexSet:
    """-(n-2)/2 + l + nu_j below L, dropping modes with nu_j an integer."""
    base = -(n - 2) / 2.0
    out = []
    for j, v in _wave_modes(n, coupling, base, L, modes):
        if exclude_integer_nu and is_near_integer(v):
            continue
        l = 0
        while base + l + v < L:
            out.append((base + l + v, 0))
            l += 1
    return IndexSet(tuple(out), L)


def _dirac_kappas(Z: float, offset: float, L: float, kappas):
    if kappas is not None:
        for kap in kappas:
            s = dirac_indicial(kap, Z)
            if offset + s < L:
                yield kap, s
        return
    m = 1
    while True:
        s = dirac_indicial(m, Z)
        if offset + s >= L:
            return
        yield m, s
        yield -m, s
        m += 1


def _dirac_set(Z: float, offset: float, L: float, kappas) -> IndexSet:
    out = []
    for _, s in _dirac_kappas(Z, offset, L, kappas):
        k = 0
        while offset + k + s < L:
            out.append((offset + k + s, 0))
            k += 1
    return IndexSet(tuple(out), L)


def generate_E_DC(Z: float, L: float, kappas: Sequence[int] | None = None) -> IndexSet:
    """2 + l + sqrt(kappa^2 - Z^2) below L."""
    return _dirac_set(Z, 2.0, L, kappas)


def generate_F_DC(Z: float, L: float, kappas: Sequence[int] | None = None) -> IndexSet:
    """-1 + j + sqrt(kappa^2 - Z^2) below L."""
    return _dirac_set(Z, -1.0, L, kappas)


@dataclass(frozen=True)
class ModeRate:
    mode: int
    rate_C_plus: float
    rate_tf_plus: float
    mode_class: ModeClass = ModeClass.GENERIC

    @property
    def vanishing(self) -> bool:
        return self.mode_class is ModeClass.RESOLVENT_REGULAR


@dataclass
class RateTable:
    """Leading decay exponents t^{-rate} along rays (C_+) and at fixed r (tf_+)."""

    problem: Problem
    n: int
    coupling: float
    rate_C_plus: float
    rate_tf_plus: float
    per_mode: list[ModeRate] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)
    leading_mode: int | None = None

    def mode_row(self, mode: int) -> ModeRate:
        for row in self.per_mode:
            if row.mode == mode:
                return row
        raise KeyError(f"mode {mode} not tabulated")

    def to_text(self) -> str:
        label = "Z" if self.problem is Problem.DIRAC else "coupling"
        mode_label = "kappa" if self.problem is Problem.DIRAC else "j"
        lines = [
            f"problem={self.problem.value} n={self.n} {label}={self.coupling:g}",
            f"  C_+  (rays r = gamma t) rate : {self.rate_C_plus:.6f}",
            f"  tf_+ (fixed r)          rate : {self.rate_tf_plus:.6f}",
            f"  {mode_label:>6} {'rate_C_plus':>12} {'rate_tf_plus':>13}  class",
        ]
        for row in self.per_mode:
            lines.append(f"  {row.mode:>6d} {row.rate_C_plus:>12.6f} "
                         f"{row.rate_tf_plus:>13.6f}  {row.mode_class.value}")
        lines += [f"  note: {msg}" for msg in self.notes]
        return "\n".join(lines)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["mode", "rate_C_plus", "rate_tf_plus", "class"])
        writer.writerow(["all", repr(self.rate_C_plus), repr(self.rate_tf_plus), ""])
        for row in self.per_mode:
            writer.writerow([row.mode, repr(row.rate_C_plus), repr(row.rate_tf_plus),
                             row.mode_class.value])
        return buf.getvalue()


def _wave_rates(n: int, coupling: float, jmax: int) -> RateTable:
    notes = []
    per_mode = []
    for j in range(jmax + 1):
        spec = ModeSpec.wave(n, coupling, j)
        v = spec.exponent
        per_mode.append(ModeRate(j, n / 2.0 + v, 1.0 + 2.0 * v, wave_mode_exceptional(spec)))

    lead = None
    for j in range(_MODE_SEARCH_CAP):
        cls = wave_mode_exceptional(ModeSpec.wave(n, coupling, j))
        if cls is ModeClass.INTEGER_NU:
            raise UnsupportedParameterError(
                f"nu_{j} is an integer for n={n}, coupling={coupling}; the cone-face "
                "index set is not available for this mode")
        if cls is ModeClass.GENERIC:
            lead = j
            break
    if coupling == 0:
        notes.append("coupling = 0: sharpness of the rates is not asserted")
    if lead is None:
        notes.append("every mode is resolvent-regular: no tail at timelike infinity")
        return RateTable(Problem.WAVE, n, coupling, math.inf, math.inf, per_mode, notes)
    if lead > 0:
        notes.append(f"modes j < {lead} are resolvent-regular (1/2 + nu_j integer); "
                     f"leading term comes from j = {lead}")

    v = nu(lead, n, coupling)
    L = n / 2.0 + v + 2.0
    rate_C = min_exponent(generate_E_IS(n, coupling, L))[0]
    # each angular mode carries its own cone-face expansion, so the tf_+ set
    # is the union over j of E_j + F_j
    tf = []
    for j in range(lead, max(lead, jmax) + 1):
        L_j = n / 2.0 + nu(j, n, coupling) + 2.0
        E_j = generate_E_IS(n, coupling, L_j, modes=[j])
        F_j = generate_F_IS(n, coupling, L_j, modes=[j])
        if not len(E_j):
            continue
        if not len(F_j):
            raise UnsupportedParameterError(f"nu_{j} is an integer; tf_+ set undefined")
        tf.append(min_exponent(minkowski_sum(E_j, F_j))[0])
    return RateTable(Problem.WAVE, n, coupling, rate_C, min(tf), per_mode, notes, lead)


def _dirac_rates(Z: float, kmax: int) -> RateTable:
    notes = []
    if Z == 0:
        notes.append("Z = 0: sharpness of the rates is not asserted")
    per_mode = []
    for m in range(1, max(kmax, 1) + 1):
        for kap in (-m, m):
            s = dirac_indicial(kap, Z)
            per_mode.append(ModeRate(kap, 2.0 + s, 1.0 + 2.0 * s))
    s1 = dirac_indicial(1, Z)
    L = 2.0 + s1 + 2.0
    rate_C = min_exponent(generate_E_DC(Z, L))[0]
    tf = []
    for kap in (-1, 1, -2, 2):
        L_k = 2.0 + dirac_indicial(kap, Z) + 2.0
        E_k = generate_E_DC(Z, L_k, kappas=[kap])
        F_k = generate_F_DC(Z, L_k, kappas=[kap])
        tf.append(min_exponent(minkowski_sum(E_k, F_k))[0])
    return RateTable(Problem.DIRAC, 3, Z, rate_C, min(tf), per_mode, notes, 1)


def predicted_rates(problem, n: int = 3, coupling: float = 0.0, jmax: int = 3) -> RateTable:
    """Leading exponents at C_+ and tf_+ from the generated index sets."""
    problem = Problem(problem)
    if problem is Problem.WAVE:
        return _wave_rates(n, coupling, jmax)
    if n != 3:
        raise UnsupportedParameterError("Dirac-Coulomb rates are for n = 3")
    return _dirac_rates(coupling, jmax)


def closed_form_rates(problem, coupling: float) -> tuple[float, float]:
    """Closed-form n = 3 exponents (rays, fixed r) as functions of the coupling."""
    problem = Problem(problem)
    if problem is Problem.DIRAC:
        alpha = 2.0 * math.sqrt(1.0 - coupling ** 2) - 2.0
        return 3.0 + alpha / 2.0, 3.0 + alpha
    root = math.sqrt(1.0 + 4.0 * coupling)
    if is_near_integer(root) and round(root) % 2 == 1:
        beta = math.sqrt(9.0 + 4.0 * coupling) - 1.0
    else:
        beta = root - 1.0
    return 2.0 + beta / 2.0, 2.0 + beta
