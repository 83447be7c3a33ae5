"""Green's kernel of Q = (id - d^2/dx^2)^{-1} on the unit torus.

Three representations are provided:

* the closed form ``(e^x + e^{1-x}) / (2(e-1))`` on ``[0, 1)``,
* the Fourier series ``sum_k e^{2 pi i k x} / (1 + 4 pi^2 k^2)``, truncated,
* the periodized two-sided exponential ``(1/2) sum_l e^{-|x + l|}``, truncated.

The closed form is the working definition; the two sums exist so the
representations can be cross-checked against each other.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .spectral import Spectrum

_E = math.e
_NORM = 1.0 / (2.0 * (_E - 1.0))


@dataclass(frozen=True)
class KernelEval:
    x: float
    value: float
    derivative_left: float
    derivative_right: float


def _reduce(x):
    r = np.mod(x, 1.0)
    # np.mod(-tiny, 1.0) rounds to exactly 1.0
    return np.where(r >= 1.0, 0.0, r)


def multiplier(k) -> float | np.ndarray:
    """Fourier symbol of Q at integer frequency ``k``: ``1 / (1 + 4 pi^2 k^2)``."""
    k = np.asarray(k, dtype=float)
    out = 1.0 / (1.0 + 4.0 * np.pi**2 * k * k)
    return float(out) if out.ndim == 0 else out


def kernel_values(x) -> np.ndarray:
    """Vectorized closed-form kernel values at arbitrary real ``x``."""
    r = _reduce(np.asarray(x, dtype=float))
    return (np.exp(r) + np.exp(1.0 - r)) * _NORM


def kernel_closed_form(x: float) -> KernelEval:
    """Closed-form kernel value with one-sided derivatives.

    The kernel has a corner at ``x = 0``: the derivative from the right is
    ``-1/2`` and from the left (the limit ``x -> 1^-``) is ``+1/2``.
    """
    r = float(_reduce(float(x)))
    value = (math.exp(r) + math.exp(1.0 - r)) * _NORM
    if r == 0.0:
        right = (1.0 - _E) * _NORM
        left = (_E - 1.0) * _NORM
    else:
        right = left = (math.exp(r) - math.exp(1.0 - r)) * _NORM
    return KernelEval(r, value, left, right)


def kernel_fourier_partial_sum(x, K_max: int):
    """Symmetric partial Fourier sum over ``|k| <= K_max``.

    Real by symmetry, so it is evaluated as ``1 + 2 Re sum_{k>=1} e^{2 pi i k x} mult(k)``,
    with the highest-frequency chunks accumulated first. Accepts scalars or
    arrays.
    """
    if K_max < 0:
        raise ValueError("K_max must be non-negative")
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    theta = 2.0 * np.pi * _reduce(xs)
    acc = np.zeros_like(theta)
    if K_max:
        # e^{i k theta} = e^{i k0 theta} e^{i j theta}: one block of phases
        # reused for every chunk, the sum done as matrix-vector products
        width = min(K_max, 512)
        block = np.exp(1j * np.multiply.outer(theta, np.arange(width)))
        ks = np.arange(1, K_max + 1, dtype=float)
        a = multiplier(ks)
        starts = list(range(1, K_max + 1, width))
        for k0 in reversed(starts):
            seg = a[k0 - 1: k0 - 1 + width]
            acc += (np.exp(1j * k0 * theta) * (block[:, : len(seg)] @ seg)).real
    out = 1.0 + 2.0 * acc
    return float(out[0]) if np.ndim(x) == 0 else out


def kernel_lattice_sum(x, L_max: int):
    """Truncated lattice sum ``(1/2) sum_{|l| <= L_max} e^{-|x + l|}``."""
    if L_max < 1:
        raise ValueError("L_max must be at least 1")
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    ls = np.arange(-L_max, L_max + 1, dtype=float)
    terms = np.exp(-np.abs(np.add.outer(xs, ls)))
    terms.sort(axis=1)
    out = np.array([0.5 * math.fsum(row) for row in terms])
    return float(out[0]) if np.ndim(x) == 0 else out


def fourier_tail_bound(K_max: int) -> float:
    """Upper bound ``1 / (2 pi^2 K_max)`` on the Fourier truncation error."""
    return 1.0 / (2.0 * np.pi**2 * K_max)


def apply_Q(v: Spectrum) -> Spectrum:
    return v.with_coeffs(v.coeffs * multiplier(v.grid.k))


def apply_Q_dx(v: Spectrum) -> Spectrum:
    """Apply ``Q o d/dx``; bounded from L^2 into H^1 with norm at most one."""
    k = v.grid.k
    symbol = 2j * np.pi * k * multiplier(k)
    symbol[-1] = 0.0  # Nyquist
    return v.with_coeffs(v.coeffs * symbol)
