"""Characteristic curves of a recorded run and the transport identity along them.

Along ``d gamma/ds = c u(gamma(s), s)`` with ``c`` the coefficient of the
nonlinear term, the solution changes only through the nonlocal forcing:
``u(y, tau) = u0(gamma(0)) + int_0^tau (Q u_x)(gamma(s), s) ds``.

Snapshots exist only at step times, so coefficients are interpolated in
time with a cubic spline. ``gamma`` is integrated on the real line and
wrapped to the torus only when stored.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from .kernel import multiplier
from .spectral import Field, GridSpec, Spectrum, evaluate, to_spectrum, wrap


def eval_field_at(s_hat: Spectrum, x: float) -> float:
    return evaluate(s_hat, x)


@dataclass
class SnapshotSeries:
    """Spectra of one run at increasing times (rows of ``coeffs``)."""

    grid: GridSpec
    times: np.ndarray
    coeffs: np.ndarray
    coefficient: float = 1.5
    resolution_exhausted: bool = False

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.coeffs = np.asarray(self.coeffs, dtype=complex)
        if self.coeffs.shape != (len(self.times), self.grid.n // 2 + 1):
            raise ValueError("snapshot array shape does not match times and grid")
        if len(self.times) > 1 and np.any(np.diff(self.times) <= 0):
            raise ValueError("snapshot times must be strictly increasing")

    def spectrum(self, i: int) -> Spectrum:
        return Spectrum(self.grid, self.coeffs[i])


class SnapshotRecorder:
    """Observer collecting the state spectrum every ``stride`` steps."""

    def __init__(self, stride: int = 1):
        self.stride = stride
        self.times: list[float] = []
        self.coeffs: list[np.ndarray] = []
        self._calls = 0
        self._last = None

    def __call__(self, state) -> None:
        self._last = state
        if self._calls % self.stride == 0:
            self.times.append(state.t)
            self.coeffs.append(state.u_hat.coeffs.copy())
        self._calls += 1

    def series(self, coefficient: float = 1.5, resolution_exhausted: bool = False) -> SnapshotSeries:
        last = self._last
        if last is not None and self.times[-1] < last.t:
            self.times.append(last.t)
            self.coeffs.append(last.u_hat.coeffs.copy())
        return SnapshotSeries(
            last.u.grid, np.array(self.times), np.array(self.coeffs),
            coefficient, resolution_exhausted,
        )


@dataclass
class CharacteristicPath:
    """Samples ``(s, gamma(s) mod 1, u, Q u_x)`` at step nodes and midpoints, increasing in ``s``."""

    y: float
    tau: float
    s: np.ndarray
    gamma: np.ndarray
    u: np.ndarray
    q_ux: np.ndarray
    lipschitz: float = 0.0
    reliable: bool = True
    gamma_lifted: np.ndarray = field(default=None, repr=False)

    @property
    def gamma0(self) -> float:
        return float(self.gamma[0])


class _Interpolant:
    def __init__(self, run: SnapshotSeries):
        self.grid = run.grid
        k = run.grid.k
        self.k = k[1:-1]
        q_dx = 2j * np.pi * k * multiplier(k)
        if len(run.times) >= 2:
            self.spline = CubicSpline(run.times, run.coeffs, axis=0)
            self.q_spline = CubicSpline(run.times, run.coeffs * q_dx, axis=0)
        else:
            self.spline = self.q_spline = None
            self.c0 = run.coeffs[0]
            self.q0 = run.coeffs[0] * q_dx

    def _sum(self, c: np.ndarray, x: float) -> float:
        phase = np.exp(2j * np.pi * self.k * x)
        return float(c[0].real + 2.0 * (phase @ c[1:-1]).real)

    def u(self, x: float, s: float) -> float:
        c = self.c0 if self.spline is None else self.spline(s)
        return self._sum(c, x)

    def q_ux(self, x: float, s: float) -> float:
        c = self.q0 if self.q_spline is None else self.q_spline(s)
        return self._sum(c, x)


def trace_characteristic(run: SnapshotSeries, y: float, tau: float, speed: float | None = None) -> CharacteristicPath:
    """Integrate the characteristic through ``(y, tau)`` back to ``s = 0``.

    RK4 with one step per snapshot interval; midpoint positions come from
    cubic Hermite interpolation of the step endpoints so the path can be
    integrated with Simpson's rule. ``speed`` defaults to the run's
    nonlinear coefficient.
    """
    if run.resolution_exhausted:
        raise ValueError("refusing to trace characteristics in a resolution-exhausted run")
    t0, t1 = run.times[0], run.times[-1]
    if not (t0 <= tau <= t1 + 1e-12 * max(1.0, t1)):
        raise ValueError(f"tau={tau!r} outside recorded range [{t0}, {t1}]")
    if t0 != 0.0:
        raise ValueError("recorded run must start at t = 0")
    c = run.coefficient if speed is None else speed
    interp = _Interpolant(run)

    def vel(g: float, s: float) -> float:
        return c * interp.u(g, s)

    nodes = np.concatenate([run.times[run.times < tau], [tau]])[::-1]
    s_list = [tau]
    g_list = [float(y)]
    mids: list[tuple[float, float]] = []
    g = float(y)
    v = vel(g, tau)
    for s_hi, s_lo in zip(nodes[:-1], nodes[1:]):
        h = s_lo - s_hi  # negative
        k1 = v
        k2 = vel(g + 0.5 * h * k1, s_hi + 0.5 * h)
        k3 = vel(g + 0.5 * h * k2, s_hi + 0.5 * h)
        k4 = vel(g + h * k3, s_lo)
        g_new = g + h * (k1 + 2 * k2 + 2 * k3 + k4) / 6.0
        v_new = vel(g_new, s_lo)
        g_mid = 0.5 * (g + g_new) + h * (v - v_new) / 8.0
        mids.append((s_hi + 0.5 * h, g_mid))
        g, v = g_new, v_new
        s_list.append(float(s_lo))
        g_list.append(g)

    # interleave nodes and midpoints, then order by increasing s
    s_all = [s_list[0]]
    g_all = [g_list[0]]
    for (sm, gm), sn, gn in zip(mids, s_list[1:], g_list[1:]):
        s_all += [sm, sn]
        g_all += [gm, gn]
    s_arr = np.array(s_all[::-1])
    g_arr = np.array(g_all[::-1])
    u_arr = np.array([interp.u(gi, si) for gi, si in zip(g_arr, s_arr)])
    q_arr = np.array([interp.q_ux(gi, si) for gi, si in zip(g_arr, s_arr)])

    ik = 2j * np.pi * run.grid.k
    ux_max = max(float(np.max(np.abs(np.fft.irfft(ik * row * run.grid.n, n=run.grid.n)))) for row in run.coeffs)
    lipschitz = abs(c) * ux_max
    h_max = float(np.max(np.abs(np.diff(nodes)))) if len(nodes) > 1 else 0.0
    reliable = lipschitz * h_max < 0.5

    return CharacteristicPath(
        y=wrap(y), tau=float(tau), s=s_arr,
        gamma=np.array([wrap(gi) for gi in g_arr]), u=u_arr, q_ux=q_arr,
        lipschitz=lipschitz, reliable=bool(reliable), gamma_lifted=g_arr,
    )


def simpson_along(path: CharacteristicPath) -> float:
    """Composite Simpson integral of ``Q u_x`` over node-midpoint-node triples."""
    s, f = path.s, path.q_ux
    if len(s) < 3:
        return 0.0
    h = s[2::2] - s[:-2:2]
    return float(np.sum(h / 6.0 * (f[:-2:2] + 4.0 * f[1:-1:2] + f[2::2])))


def verify_transport_identity(path: CharacteristicPath, u0: Field) -> float:
    """``|u(y, tau) - u0(gamma(0)) - int Q u_x ds|`` along ``path``."""
    start = evaluate(to_spectrum(u0), path.gamma0)
    return abs(path.u[-1] - start - simpson_along(path))
