"""Late-time decay exponents from sampled series, and comparison with predictions.

Slopes are d ln|u| / d ln t, so a decay t^{-p} has slope -p.  The
extrapolated slope fits the local slope as p(t) = p_inf + c1/t + c2/t^2
(order 2 by default) on a log-uniform resampling of the window.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from .geometry import Face, FaceLabel, FixedR, NullOffset, Ray, Trajectory, classify_trajectory
from .indexsets import RateTable
from .spectrum import ModeSpec, Problem

__all__ = [
    "WindowPolicy",
    "FitResult",
    "FitError",
    "LabeledFit",
    "Verdict",
    "ReportRow",
    "DecayReport",
    "fit_rate",
    "amplitude_check",
    "floor_from_control",
    "pulse_passage_time",
    "expected_slope",
    "compare",
    "HUYGENS_RELATIVE_FLOOR",
]

HUYGENS_RELATIVE_FLOOR = 1e-10
SHARPNESS_FACTOR = 1e3
_RESAMPLE = 200


class FitError(ValueError):
    pass


@dataclass(frozen=True)
class WindowPolicy:
    """Which part of a series to fit.

    Unset bounds default to the last ``decades`` of the series.  ``t_pass``
    (pulse passage at the sampler) pushes t_lo to at least t_pass + exclusion.
    """

    t_lo: float | None = None
    t_hi: float | None = None
    decades: float = 1.0
    min_decades: float = 1.0
    min_samples: int = 50
    t_pass: float = 0.0
    exclusion: float = 0.1
    extrapolation_order: int = 2

    def __post_init__(self):
        if self.extrapolation_order not in (1, 2):
            raise ValueError("extrapolation_order must be 1 or 2")
        if self.decades <= 0 or self.min_decades < 0:
            raise ValueError("decades must be positive")

    def resolve(self, t: np.ndarray) -> tuple[float, float]:
        t_hi = float(t[-1]) if self.t_hi is None else float(self.t_hi)
        t_lo = t_hi / 10 ** self.decades if self.t_lo is None else float(self.t_lo)
        t_lo = max(t_lo, self.t_pass + self.exclusion, float(t[t > 0][0]))
        return t_lo, t_hi


@dataclass(frozen=True)
class FitResult:
    slope_raw: float
    slope_extrapolated: float
    window: tuple[float, float]
    residual: float
    sign_changes_in_window: int
    n_samples: int
    amplitude: float
    tail_max: float
    floor: float
    below_floor: bool = False
    extrapolation_order: int = 2

    def __post_init__(self):
        if not self.window[0] < self.window[1]:
            raise ValueError("window must satisfy t_lo < t_hi")
        if self.residual < 0:
            raise ValueError("residual must be >= 0")

    @property
    def rate(self) -> float:
        return -self.slope_extrapolated


def _local_slope_fit(lt: np.ndarray, lu: np.ndarray, order: int):
    g = np.linspace(lt[0], lt[-1], _RESAMPLE)
    lug = np.interp(g, lt, lu)
    s = np.gradient(lug, g)
    tg = np.exp(g)
    cols = [np.ones_like(tg)] + [tg ** -k for k in range(1, order + 1)]
    A = np.vstack(cols).T[2:-2]
    coef, *_ = np.linalg.lstsq(A, s[2:-2], rcond=None)
    return float(coef[0])


def fit_rate(t, values, policy: WindowPolicy = WindowPolicy(), floor: float = 0.0,
             peak: float | None = None) -> FitResult:
    """Fit the decay exponent of ``values`` over the policy window.

    The effective floor is max(floor, 1e-10 * peak).  If every sample in the
    window is at or below it, a BelowFloor result (slopes NaN) is returned.
    """
    t = np.asarray(t, float)
    u = np.abs(np.asarray(values))
    if t.ndim != 1 or t.shape != u.shape:
        raise FitError("t and values must be 1-D arrays of equal length")
    t_lo, t_hi = policy.resolve(t)
    if not t_lo < t_hi:
        raise FitError(f"empty window [{t_lo:.4g}, {t_hi:.4g}]")
    m = (t >= t_lo) & (t <= t_hi)
    count = int(np.count_nonzero(m))
    if count < policy.min_samples:
        raise FitError(f"only {count} samples in window, need {policy.min_samples}")
    tw, uw = t[m], u[m]
    eff_floor = max(floor, HUYGENS_RELATIVE_FLOOR * peak if peak else 0.0)
    tail_max = float(np.max(uw))
    raw_vals = np.asarray(values)[m]
    re = raw_vals.real if np.iscomplexobj(raw_vals) else raw_vals
    signs = np.sign(re[re != 0])
    sign_changes = int(np.count_nonzero(np.diff(signs)))
    if tail_max <= eff_floor or np.any(uw == 0):
        return FitResult(math.nan, math.nan, (t_lo, t_hi), 0.0, sign_changes, count,
                         0.0, tail_max, eff_floor, True, policy.extrapolation_order)
    span = math.log10(t_hi / t_lo)
    if span < policy.min_decades - 1e-9:
        raise FitError(f"window spans {span:.3f} decades, need {policy.min_decades}")
    lt, lu = np.log(tw), np.log(uw)
    (slope, icpt), res, *_ = np.polyfit(lt, lu, 1, full=True)
    residual = float(np.sqrt(res[0] / count)) if len(res) else 0.0
    ext = _local_slope_fit(lt, lu, policy.extrapolation_order)
    return FitResult(float(slope), ext, (t_lo, t_hi), residual, sign_changes, count,
                     float(math.exp(icpt)), tail_max, eff_floor, False,
                     policy.extrapolation_order)


def amplitude_check(t, values, fit: FitResult) -> float:
    """Prefactor A in |u| ~ A t^{slope_raw} over the fit window."""
    if fit.below_floor:
        return 0.0
    t = np.asarray(t, float)
    u = np.abs(np.asarray(values))
    m = (t >= fit.window[0]) & (t <= fit.window[1])
    return float(np.exp(np.mean(np.log(u[m]) - fit.slope_raw * np.log(t[m]))))


def floor_from_control(values, tail_fraction: float = 0.05) -> float:
    """10x the RMS of the last ``tail_fraction`` of a Huygens control series."""
    u = np.abs(np.asarray(values))
    k = max(1, int(round(tail_fraction * u.size)))
    return float(10.0 * np.sqrt(np.mean(u[-k:] ** 2)))


def pulse_passage_time(traj: Trajectory, core_extent: float) -> float:
    """Time after which the direct pulse (data inside r <= core_extent) has
    passed the sampler, including its reflection through the origin."""
    if isinstance(traj, FixedR):
        return core_extent + traj.r0
    if isinstance(traj, Ray):
        return core_extent / (1.0 - traj.gamma)
    if isinstance(traj, NullOffset):
        return 0.0
    raise TypeError(f"unknown trajectory {traj!r}")


# ---------------------------------------------------------------- comparison


class Verdict(str, Enum):
    PASS = "pass"
    FAIL = "fail"
    VANISHING_CONFIRMED = "vanishing tail confirmed"
    VANISHING_VIOLATED = "tail above floor where none predicted"
    BELOW_FLOOR = "below floor"
    NO_PREDICTION = "no prediction"


@dataclass(frozen=True)
class LabeledFit:
    trajectory: Trajectory
    fit: FitResult
    spec: ModeSpec
    quantity: str = "u"   # "u" (wave), "f" or "psi" (Dirac)

    @property
    def face(self) -> FaceLabel:
        return classify_trajectory(self.trajectory)


def expected_slope(lf: LabeledFit, table: RateTable) -> tuple[float, int]:
    """(expected slope, r-power shift) for a labelled fit.

    Wave series are u itself, so no shift.  Dirac rates are tabulated for psi;
    f = r psi gains one power of t along rays and none at fixed r.
    """
    face = lf.face.face
    row = table.mode_row(lf.spec.mode)
    if face is Face.TF_PLUS:
        rate = row.rate_tf_plus
    elif face is Face.C_PLUS:
        rate = row.rate_C_plus
    else:
        return math.nan, 0
    if row.vanishing:
        return -math.inf, 0
    shift = 0
    if lf.spec.problem is Problem.DIRAC and lf.quantity == "f" and face is Face.C_PLUS:
        shift = 1
    return -rate + shift, shift


@dataclass(frozen=True)
class ReportRow:
    trajectory: str
    face: str
    quantity: str
    mode: int
    slope_raw: float
    slope_extrapolated: float
    expected_slope: float
    r_power_shift: int
    deviation: float
    tolerance: float
    amplitude: float
    amplitude_ok: bool
    window: tuple[float, float]
    verdict: Verdict


@dataclass
class DecayReport:
    rows: list[ReportRow] = field(default_factory=list)
    floor: float = 0.0

    @property
    def passed(self) -> bool:
        bad = {Verdict.FAIL, Verdict.VANISHING_VIOLATED, Verdict.BELOW_FLOOR}
        return bool(self.rows) and not any(r.verdict in bad for r in self.rows)

    def to_text(self) -> str:
        head = (f"{'trajectory':<12} {'face':<18} {'q':<4} {'mode':>4} {'raw':>9} "
                f"{'extrap':>9} {'expected':>9} {'shift':>5} {'dev':>8}  verdict")
        lines = [head, "-" * len(head)]
        for r in self.rows:
            lines.append(
                f"{r.trajectory:<12} {r.face:<18} {r.quantity:<4} {r.mode:>4d} "
                f"{r.slope_raw:>9.4f} {r.slope_extrapolated:>9.4f} {r.expected_slope:>9.4f} "
                f"{r.r_power_shift:>+5d} {r.deviation:>8.4f}  {r.verdict.value}")
        lines.append(f"overall: {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines)

    def to_json(self) -> str:
        def clean(x):
            if isinstance(x, float) and not math.isfinite(x):
                return None if math.isnan(x) else ("inf" if x > 0 else "-inf")
            if isinstance(x, Enum):
                return x.value
            return x

        rows = [{k: clean(v) if not isinstance(v, tuple) else list(v)
                 for k, v in asdict(r).items()} for r in self.rows]
        return json.dumps({"passed": self.passed, "floor": self.floor, "rows": rows},
                          indent=2, sort_keys=True)


def _row_key(lf: LabeledFit):
    return (lf.spec.mode, lf.face.face.value, lf.trajectory.label, lf.quantity)


def compare(fits: Sequence[LabeledFit], table: RateTable, tol: float,
            floor: float = 0.0) -> DecayReport:
    """Match each fit against the rate table; rows are ordered canonically."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    rows = []
    for lf in sorted(fits, key=_row_key):
        if lf.spec.problem is not table.problem:
            raise ValueError("fit and rate table describe different problems")
        exp, shift = expected_slope(lf, table)
        fr = lf.fit
        amp_ok = (not fr.below_floor) and fr.amplitude > SHARPNESS_FACTOR * floor
        if math.isnan(exp):
            verdict, dev = Verdict.NO_PREDICTION, math.nan
        elif exp == -math.inf:
            verdict = Verdict.VANISHING_CONFIRMED if fr.below_floor else Verdict.VANISHING_VIOLATED
            dev = math.nan
        elif fr.below_floor:
            verdict, dev = Verdict.BELOW_FLOOR, math.nan
        else:
            dev = abs(fr.slope_extrapolated - exp)
            verdict = Verdict.PASS if dev <= tol and amp_ok else Verdict.FAIL
        rows.append(ReportRow(lf.trajectory.label, str(lf.face), lf.quantity, lf.spec.mode,
                              fr.slope_raw, fr.slope_extrapolated, exp, shift, dev, tol,
                              fr.amplitude, amp_ok, fr.window, verdict))
    return DecayReport(rows, floor)
