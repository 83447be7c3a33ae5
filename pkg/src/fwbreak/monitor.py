"""Runtime checks of the a-priori estimates and the blow-up criterion.

Closed-form bounds (L^2 growth, L^inf via characteristics, conditional H^2)
are tested with a relative tolerance ``EPS_REL``. Differential inequalities
for the slope extrema only hold almost everywhere, so they are tested as
forward difference quotients with an explicit slack.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .evolution import OutcomeKind, RunOutcome, SimState
from .spectral import (
    ExtremaResult,
    Field,
    norm_Hs,
    norm_L2,
    norm_Linf,
    slope_extrema,
    spectral_derivative,
    to_field,
)

EPS_REL = 1e-8
CRITERION_THRESHOLD = -2.0 / 3.0


@dataclass(frozen=True)
class BoundCheck:
    passed: bool
    margin: float


@dataclass
class MonitorRecord:
    t: float
    l2: float
    linf: float
    extrema: ExtremaResult
    uxx_l2: float
    hs: float
    bound_flags: dict[str, BoundCheck] = field(default_factory=dict)

    @property
    def m1(self) -> float:
        return self.extrema.min_value

    @property
    def m2(self) -> float:
        return self.extrema.max_value


def make_record(state: SimState, hs_index: float = 3.0) -> MonitorRecord:
    s = state.u_hat
    uxx = to_field(spectral_derivative(s, 2))
    return MonitorRecord(
        t=state.t,
        l2=norm_L2(state.u),
        linf=norm_Linf(state.u),
        extrema=slope_extrema(state.u),
        uxx_l2=norm_L2(uxx),
        hs=norm_Hs(s, hs_index),
    )


def check_l2_bound(rec: MonitorRecord, l2_0: float, eps_rel: float = EPS_REL) -> BoundCheck:
    bound = math.exp(rec.t) * l2_0
    return BoundCheck(rec.l2 <= bound * (1.0 + eps_rel), bound - rec.l2)


def check_linf_bound(
    rec: MonitorRecord, linf_0: float, l2_0: float, eps_rel: float = EPS_REL
) -> BoundCheck:
    bound = linf_0 + l2_0 * math.expm1(rec.t)
    return BoundCheck(rec.linf <= bound * (1.0 + eps_rel), bound - rec.linf)


def check_h2_conditional_bound(
    records: Sequence[MonitorRecord], uxx0_l2: float, eps_rel: float = EPS_REL
) -> BoundCheck:
    """Gronwall bound on ``||u_xx||`` given the empirical slope floor ``-M``.

    ``M = max(0, -min_t m1(t))`` over the records. The margin is the
    smallest ``bound - ||u_xx||`` over the samples.
    """
    if not records:
        return BoundCheck(True, 0.0)
    M = max(0.0, -min(r.m1 for r in records))
    rate = 1.0 + 15.0 * M / 4.0
    passed = True
    margin = math.inf
    for r in records:
        with np.errstate(over="ignore"):
            bound = float(np.exp(rate * r.t)) * uxx0_l2
        passed &= r.uxx_l2 <= bound * (1.0 + eps_rel)
        margin = min(margin, bound - r.uxx_l2)
    return BoundCheck(bool(passed), margin)


@dataclass
class BlowupReport:
    criterion_value: float
    criterion_met: bool
    M0: float
    predicted_T_upper: float | None
    observed_breaking_time: float | None = None
    envelope_ok: bool | None = None


def evaluate_criterion(u0: Field) -> BlowupReport:
    """Initial part of the report: ``min u0' + max u0'`` against ``-2/3``."""
    ext = slope_extrema(u0)
    value = ext.min_value + ext.max_value
    met = value < CRITERION_THRESHOLD
    M0 = ext.min_value + 1.0 / 3.0
    predicted = 2.0 / (3.0 * abs(M0)) if met else None
    return BlowupReport(value, met, M0, predicted)


def riccati_slack(h: float) -> float:
    return 1e2 * h + 1e-6


@dataclass
class RiccatiResult:
    """Per-pair outcome of the slope-extrema difference inequalities."""

    t: np.ndarray
    passed_m1: np.ndarray
    passed_m2: np.ndarray
    excess_m1: np.ndarray
    excess_m2: np.ndarray
    skipped: bool = False

    @property
    def passed(self) -> np.ndarray:
        return self.passed_m1 & self.passed_m2

    @property
    def pass_fraction(self) -> float:
        return float(self.passed.mean()) if len(self.passed) else 1.0


def check_riccati_inequalities(
    records: Sequence[MonitorRecord], tol=None, *, linear: bool = False
) -> RiccatiResult:
    """Check ``(m_j(t+h) - m_j(t))/h <= -3/2 m_j(t)^2 + (m2(t) - m1(t))/2 + tol``.

    ``tol`` may be a number or a callable of the step ``h``; by default
    :func:`riccati_slack`. Linear-mode runs follow a different equation and
    are skipped.
    """
    empty = np.zeros(0)
    if linear or len(records) < 2:
        return RiccatiResult(empty, empty.astype(bool), empty.astype(bool), empty, empty, linear)
    t = np.array([r.t for r in records])
    m1 = np.array([r.m1 for r in records])
    m2 = np.array([r.m2 for r in records])
    h = np.diff(t)
    if np.any(h <= 0):
        raise ValueError("records must be strictly increasing in time")
    if tol is None:
        slack = riccati_slack(h)
    elif callable(tol):
        slack = np.array([tol(x) for x in h])
    else:
        slack = np.full_like(h, float(tol))
    spread = 0.5 * (m2[:-1] - m1[:-1])
    ex1 = np.diff(m1) / h - (-1.5 * m1[:-1] ** 2 + spread)
    ex2 = np.diff(m2) / h - (-1.5 * m2[:-1] ** 2 + spread)
    return RiccatiResult(t[:-1], ex1 <= slack, ex2 <= slack, ex1, ex2)


@dataclass
class EnvelopeResult:
    envelope_ok: bool
    min_margin: float
    contradictions: list[float]
    checked: int


def check_blowup_envelope(
    records: Sequence[MonitorRecord], M0: float, tol: float = 1e-6
) -> EnvelopeResult:
    """Check ``1/M(t) >= 1/M0 + (3/2) t - tol`` with ``M = m1 + 1/3``.

    Samples with ``M(t) >= 0`` contradict the analytic result that ``M``
    stays negative; they are listed in ``contradictions`` and fail the check.
    """
    if not M0 < 0:
        raise ValueError(f"envelope requires M0 < 0, got {M0!r}")
    ok = True
    min_margin = math.inf
    contradictions = []
    checked = 0
    for r in records:
        M = r.m1 + 1.0 / 3.0
        if M >= 0:
            contradictions.append(r.t)
            ok = False
            continue
        margin = 1.0 / M - (1.0 / M0 + 1.5 * r.t)
        min_margin = min(min_margin, margin)
        ok &= margin >= -tol
        checked += 1
    return EnvelopeResult(bool(ok), min_margin, contradictions, checked)


class Classification(str, enum.Enum):
    WAVE_BREAKING = "WaveBreaking"
    COMPLETED = "Completed"
    INCONCLUSIVE = "Inconclusive"


def classify_outcome(
    outcome: RunOutcome, records: Sequence[MonitorRecord], report: BlowupReport | None = None
) -> Classification:
    if outcome.kind is OutcomeKind.REACHED_FINAL_TIME:
        return Classification.COMPLETED
    if outcome.kind is OutcomeKind.SLOPE_CAP_HIT:
        bounded = all(
            r.bound_flags["linf_bound"].passed for r in records if "linf_bound" in r.bound_flags
        )
        if bounded and (outcome.value is None or outcome.value < 0):
            return Classification.WAVE_BREAKING
    return Classification.INCONCLUSIVE


class Monitor:
    """Observer that records diagnostics every ``stride`` steps.

    The first observed state is taken as the initial datum for the L^2 and
    L^inf bounds. The final state of a run should be added with
    :meth:`finalize` so the series ends where the run ended.
    """

    def __init__(self, stride: int = 1, hs_index: float = 3.0):
        if stride < 1:
            raise ValueError("stride must be >= 1")
        self.stride = stride
        self.hs_index = hs_index
        self.records: list[MonitorRecord] = []
        self._calls = 0
        self._last: SimState | None = None

    def __call__(self, state: SimState) -> None:
        self._last = state
        if self._calls % self.stride == 0:
            self._add(state)
        self._calls += 1

    def _add(self, state: SimState) -> None:
        rec = make_record(state, self.hs_index)
        first = self.records[0] if self.records else rec
        rec.bound_flags["l2_bound"] = check_l2_bound(rec, first.l2)
        rec.bound_flags["linf_bound"] = check_linf_bound(rec, first.linf, first.l2)
        self.records.append(rec)

    def finalize(self) -> None:
        if self._last is not None and (not self.records or self.records[-1].t < self._last.t):
            self._add(self._last)
