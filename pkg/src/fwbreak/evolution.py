"""Time integration of ``u_t + (3/2) u u_x = Q u_x`` on the unit torus.

Fourier pseudospectral discretization in space with 2/3-rule dealiasing of
the quadratic term, classical RK4 in time, and an advective CFL step.
The state spectrum is kept truncated to the retained band at all times.
"""
from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .kernel import multiplier
from .spectral import (
    Field,
    GridSpec,
    Spectrum,
    norm_Linf,
    slope_extrema,
    to_field,
    to_spectrum,
)

log = logging.getLogger(__name__)


class NonFiniteError(FloatingPointError):
    pass


@dataclass(frozen=True)
class SimState:
    t: float
    u: Field
    u_hat: Spectrum

    @classmethod
    def from_spectrum(cls, t: float, u_hat: Spectrum) -> "SimState":
        return cls(t, to_field(u_hat), u_hat)


@dataclass(frozen=True)
class StepControl:
    cfl: float = 0.3
    dt_max: float = 1e-2
    slope_cap: float = 1e3
    tail_fraction_cap: float = 1e-4

    def validate(self) -> None:
        for name in ("cfl", "dt_max", "slope_cap", "tail_fraction_cap"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ValueError(f"StepControl.{name} must be positive, got {value!r}")
        if self.cfl > 1:
            raise ValueError(f"StepControl.cfl must not exceed 1, got {self.cfl!r}")


class OutcomeKind(str, enum.Enum):
    REACHED_FINAL_TIME = "ReachedFinalTime"
    SLOPE_CAP_HIT = "SlopeCapHit"
    RESOLUTION_EXHAUSTED = "ResolutionExhausted"
    NON_FINITE = "NonFinite"


@dataclass
class RunOutcome:
    """How an integration ended.

    ``value`` carries ``m1`` for :attr:`OutcomeKind.SLOPE_CAP_HIT` and the
    top-octave energy fraction for :attr:`OutcomeKind.RESOLUTION_EXHAUSTED`.
    ``state`` is the last finite state reached.
    """

    kind: OutcomeKind
    t: float
    value: float | None = None
    steps: int = 0
    state: SimState | None = field(default=None, repr=False, compare=False)


class FornbergWhitham:
    """Semi-discrete right-hand side and RK4 stepper on a fixed grid.

    ``coefficient`` is the factor in front of ``u u_x``; 3/2 gives the
    standard equation and 1 the rescaled form obeyed by ``v = 3u/2``.
    """

    def __init__(self, grid: GridSpec | int, coefficient: float = 1.5, linear: bool = False):
        self.grid = grid if isinstance(grid, GridSpec) else GridSpec(grid)
        self.coefficient = coefficient
        self.linear = linear
        k = self.grid.k
        n = self.grid.n
        self.kmax = (n - 1) // 3
        self.mask = k <= self.kmax
        self.ik = 2j * np.pi * k * self.mask
        self.q_dx = self.ik * multiplier(k)
        self.top_octave = (k > self.kmax // 2) & self.mask

    def set_linear_mode(self, flag: bool) -> None:
        """Drop the ``u u_x`` term, leaving the exactly solvable ``u_t = Q u_x``."""
        self.linear = bool(flag)

    def truncate(self, coeffs: np.ndarray) -> np.ndarray:
        out = coeffs * self.mask
        out[0] = out[0].real
        return out

    def rhs_coeffs(self, c: np.ndarray) -> np.ndarray:
        out = self.q_dx * c
        if not self.linear:
            n = self.grid.n
            u = np.fft.irfft(c * n, n=n)
            ux = np.fft.irfft(self.ik * c * n, n=n)
            prod = np.fft.rfft(u * ux) / n
            out = out - self.coefficient * prod * self.mask
        if not np.all(np.isfinite(out)):
            raise NonFiniteError("non-finite coefficient in right-hand side")
        return out

    def rhs(self, u_hat: Spectrum) -> Spectrum:
        return u_hat.with_coeffs(self.rhs_coeffs(self.truncate(u_hat.coeffs)))

    def step_rk4(self, state: SimState, dt: float) -> SimState:
        if not dt > 0:
            raise ValueError(f"dt must be positive, got {dt!r}")
        c = state.u_hat.coeffs
        f = self.rhs_coeffs
        k1 = f(c)
        k2 = f(c + 0.5 * dt * k1)
        k3 = f(c + 0.5 * dt * k2)
        k4 = f(c + dt * k3)
        new = self.truncate(c + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4))
        return SimState.from_spectrum(state.t + dt, Spectrum(self.grid, new))

    def initial_state(self, u0: Field) -> SimState:
        if u0.grid != self.grid:
            raise ValueError("initial field grid does not match solver grid")
        c = self.truncate(to_spectrum(u0).coeffs)
        return SimState.from_spectrum(0.0, Spectrum(self.grid, c))

    def tail_fraction(self, state: SimState) -> float:
        """Share of fluctuation energy held by the top octave of retained modes."""
        e = np.abs(state.u_hat.coeffs[1:]) ** 2
        total = e.sum()
        if total == 0.0:
            return 0.0
        return float(e[self.top_octave[1:]].sum() / total)


def choose_dt(state: SimState, ctl: StepControl) -> float:
    speed = max(1.0, 1.5 * norm_Linf(state.u))
    return min(ctl.dt_max, ctl.cfl * state.u.grid.dx / speed)


Observer = Callable[[SimState], None]


def integrate(
    u0: Field,
    t_final: float,
    ctl: StepControl | None = None,
    observers: Sequence[Observer] = (),
    *,
    solver: FornbergWhitham | None = None,
    dt: float | None = None,
) -> RunOutcome:
    """Advance ``u0`` towards ``t_final``.

    With ``dt`` given the step is fixed (the last step is shortened to land on
    ``t_final``); otherwise :func:`choose_dt` sets it before every step.
    Observers are called with the initial state and after every accepted step.
    """
    ctl = ctl or StepControl()
    ctl.validate()
    if not t_final > 0:
        raise ValueError(f"t_final must be positive, got {t_final!r}")
    if dt is not None and not dt > 0:
        raise ValueError(f"dt must be positive, got {dt!r}")
    solver = solver or FornbergWhitham(u0.grid)
    state = solver.initial_state(u0)
    for obs in observers:
        obs(state)

    steps = 0
    # relative slack so rounding in t does not produce a sliver step
    t_eps = 1e-12 * max(1.0, t_final)
    while state.t < t_final - t_eps:
        h = dt if dt is not None else choose_dt(state, ctl)
        h = min(h, t_final - state.t)
        try:
            new = solver.step_rk4(state, h)
        except NonFiniteError:
            return RunOutcome(OutcomeKind.NON_FINITE, state.t + h, None, steps, state)
        if not np.all(np.isfinite(new.u.values)):
            return RunOutcome(OutcomeKind.NON_FINITE, new.t, None, steps, state)
        if t_final - new.t <= t_eps:
            new = SimState(t_final, new.u, new.u_hat)
        state = new
        steps += 1
        for obs in observers:
            obs(state)

        m1 = slope_extrema(state.u).min_value
        if abs(m1) >= ctl.slope_cap:
            log.info("slope cap hit at t=%.6g (m1=%.6g)", state.t, m1)
            return RunOutcome(OutcomeKind.SLOPE_CAP_HIT, state.t, m1, steps, state)
        tail = solver.tail_fraction(state)
        if tail > ctl.tail_fraction_cap:
            log.info("resolution exhausted at t=%.6g (tail=%.3g)", state.t, tail)
            return RunOutcome(OutcomeKind.RESOLUTION_EXHAUSTED, state.t, tail, steps, state)

    return RunOutcome(OutcomeKind.REACHED_FINAL_TIME, state.t, None, steps, state)
