"""The twelve acceptance criteria at their stated tolerances.

Each test prints (and records for the terminal summary) one line:
``PASS|FAIL <n>: <criterion> -- <measurements>``.
"""
import math
import time

import numpy as np
import pytest

from fwbreak.evolution import FornbergWhitham, OutcomeKind, StepControl, integrate
from fwbreak.kernel import apply_Q_dx, kernel_closed_form, kernel_fourier_partial_sum, kernel_lattice_sum, kernel_values
from fwbreak.monitor import check_blowup_envelope, check_riccati_inequalities, evaluate_criterion
from fwbreak.spectral import Field, GridSpec, norm_Hs, norm_L2, to_spectrum
from fwbreak.verify import (
    _timed_blowup_run,
    linear_oracle_error,
    m1_at,
    random_band_limited,
    sine_scenario,
    small_sine_run,
    transport_residuals,
)

from conftest import ACCEPTANCE_LINES

BRACKET = 0.11204  # 2 / (3 |m1(0) + 1/3|) with m1(0) = -2 pi, as stated


def report(number, title, passed, detail):
    line = f"{'PASS' if passed else 'FAIL'} {number}: {title} -- {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert passed, line


@pytest.fixture(scope="module")
def blowup():
    return _timed_blowup_run()


def test_01_kernel_triple_agreement():
    start = time.perf_counter()
    x = np.arange(10_000) / 10_000
    closed = kernel_values(x)
    e_fourier = float(np.max(np.abs(closed - kernel_fourier_partial_sum(x, 10_000))))
    e_lattice = float(np.max(np.abs(closed - kernel_lattice_sum(x, 40))))
    elapsed = time.perf_counter() - start
    ok = e_fourier <= 5.1e-6 and e_lattice <= 1e-15 and elapsed < 1.0
    report(1, "kernel triple agreement", ok,
           f"fourier err {e_fourier:.4g} <= 5.1e-6, lattice err {e_lattice:.3g} <= 1e-15, {elapsed:.2f}s < 1s")


def test_02_kernel_endpoint_derivatives():
    k0 = kernel_closed_form(0.0)
    er, el = abs(k0.derivative_right + 0.5), abs(k0.derivative_left - 0.5)
    report(2, "kernel endpoint derivatives", er <= 1e-12 and el <= 1e-12,
           f"K'(0+) = {k0.derivative_right:.17g}, K'(0-) = {k0.derivative_left:.17g}")


def test_03_operator_bound():
    start = time.perf_counter()
    rng = np.random.default_rng(2024)
    ratios = []
    for _ in range(100):
        v = random_band_limited(rng, 256)
        ratios.append(norm_Hs(apply_Q_dx(v), 1.0) / norm_Hs(v, 0.0))
    elapsed = time.perf_counter() - start
    worst = max(ratios)
    report(3, "operator bound L2 -> H1", worst <= 1 + 1e-12 and elapsed < 1.0,
           f"max ratio {worst:.9f} <= 1 + 1e-12 over 100 fields, {elapsed:.2f}s < 1s")


def test_04_linear_oracle():
    start = time.perf_counter()
    err = linear_oracle_error(n=128, dt=1e-3)
    elapsed = time.perf_counter() - start
    # at dt = 1e-3 the RK4 truncation error (~1e-17) is below rounding, so the
    # doubling ratio is measured where truncation dominates
    ratio = linear_oracle_error(dt=0.2) / linear_oracle_error(dt=0.1)
    rounding_ratio = linear_oracle_error(dt=2e-3) / err
    ok = err <= 1e-8 and 12 <= ratio <= 20 and elapsed < 5.0
    report(4, "linear oracle", ok,
           f"err(dt=1e-3) {err:.3g} <= 1e-8, ratio dt 0.2/0.1 {ratio:.2f} in [12,20] "
           f"(dt 2e-3/1e-3: {rounding_ratio:.2f}, rounding-limited), {elapsed:.2f}s < 5s")


def test_05_conservation():
    n = 256
    x = GridSpec(n).x
    u0 = Field(GridSpec(n), 0.3 + 0.06 * np.sin(2 * np.pi * x) + 0.02 * np.cos(4 * np.pi * x))
    out = integrate(u0, 1.0)
    mean_drift = abs(out.state.u_hat.coeffs[0] - to_spectrum(u0).coeffs[0])

    rng = np.random.default_rng(11)
    s0 = random_band_limited(rng, n, kmax=40)
    v0 = Field(s0.grid, np.fft.irfft(s0.coeffs * n, n=n))
    lin = integrate(v0, 1.0, StepControl(slope_cap=1e12, tail_fraction_cap=1.0),
                    solver=FornbergWhitham(n, linear=True))
    l2_drift = abs(norm_L2(lin.state.u) - norm_L2(v0))
    ok = (out.kind is OutcomeKind.REACHED_FINAL_TIME and lin.kind is OutcomeKind.REACHED_FINAL_TIME
          and mean_drift <= 1e-10 and l2_drift <= 1e-10)
    report(5, "conservation", ok, f"mean drift {mean_drift:.3g}, linear L2 drift {l2_drift:.3g} (<= 1e-10)")


def _violations(art, flag):
    return sum(not r.bound_flags[flag].passed for r in art.records)


def test_06_l2_growth_bound(blowup):
    sine, (art, _) = small_sine_run(), blowup
    a, b = _violations(sine, "l2_bound"), _violations(art, "l2_bound")
    report(6, "L2 growth bound", a == 0 and b == 0 and sine.outcome["t"] == 1.0,
           f"violations: sine(0.1,1) {a}/{len(sine.records)}, blow-up {b}/{len(art.records)}")


def test_07_linf_bound(blowup):
    sine, (art, _) = small_sine_run(), blowup
    a, b = _violations(sine, "linf_bound"), _violations(art, "linf_bound")
    report(7, "Linf bound", a == 0 and b == 0,
           f"violations: sine(0.1,1) {a}/{len(sine.records)}, blow-up {b}/{len(art.records)}")


def test_08_blowup_bracket(blowup):
    art, elapsed = blowup
    sc = art.scenario
    assert sc["n"] == 2048 and sc["control"]["cfl"] == 0.3 and sc["control"]["slope_cap"] == 1e3
    t_star = art.outcome["t"]
    dt = art.records[-1].t - art.records[-2].t
    hit = art.outcome["kind"] == OutcomeKind.SLOPE_CAP_HIT.value
    linf = _violations(art, "linf_bound")
    ok = hit and t_star <= BRACKET + dt and linf == 0 and elapsed < 60.0
    report(8, "blow-up bracket", ok,
           f"{art.outcome['kind']} at t* = {t_star:.6f} <= {BRACKET} + {dt:.3g}, "
           f"Linf violations {linf}, {elapsed:.1f}s < 60s")


def test_09_envelope_and_riccati(blowup):
    art, _ = blowup
    env = check_blowup_envelope(art.records, art.report.M0, tol=1e-6)
    ric = check_riccati_inequalities(art.records)
    ok = env.envelope_ok and ric.pass_fraction >= 0.99
    failed = ~ric.passed
    onset = f", first failure t={ric.t[failed][0]:.4f}" if failed.any() else ""
    report(9, "envelope and Riccati inequalities", ok,
           f"envelope min margin {env.min_margin:.3g} >= -1e-6 ({env.checked} samples); "
           f"Riccati pass fraction {ric.pass_fraction:.4f} >= 0.99 "
           f"({int(failed.sum())}/{len(failed)} pairs fail{onset})")


def test_10_criterion_negative_control():
    values = {a: evaluate_criterion(sine_scenario(a, 1.0).initial_field()) for a in (0.1, 0.5)}
    ok = all(abs(r.criterion_value) <= 1e-10 and not r.criterion_met for r in values.values())
    report(10, "criterion negative control", ok,
           ", ".join(f"sine({a},1): {r.criterion_value:.3g} met={r.criterion_met}" for a, r in values.items()))


def test_11_transport_identity():
    start = time.perf_counter()
    coarse = transport_residuals(cfl=0.3, stride=40)
    fine = transport_residuals(cfl=0.15, stride=40)  # half the step, half the snapshot interval
    elapsed = time.perf_counter() - start
    worst, reduction = coarse.max(), coarse.max() / fine.max()
    ok = worst <= 1e-6 and reduction >= 8 and elapsed < 30.0
    report(11, "transport identity", ok,
           f"max residual {worst:.3g} <= 1e-6 over 10 seeds, reduction {reduction:.1f}x >= 8, {elapsed:.1f}s < 30s")


def test_12_refinement_stability():
    a, b = m1_at(1024), m1_at(2048)
    diff = abs(a - b)
    report(12, "refinement stability", diff < 1e-6,
           f"m1(0.05): n=1024 {a:.12f}, n=2048 {b:.12f}, diff {diff:.3g} < 1e-6")
