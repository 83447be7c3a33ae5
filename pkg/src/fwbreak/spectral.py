"""Real periodic fields on a uniform grid of the unit torus.

Layout convention, shared by every module in the package: a :class:`Spectrum`
stores the non-negative half of the Fourier coefficients,
``coeffs[k] = (1/n) sum_j values[j] exp(-2 pi i k j / n)`` for
``k = 0 .. n/2``, i.e. ``numpy.fft.rfft(values) / n``. The negative
frequencies are implied by Hermitian symmetry, ``c(-k) = conj(c(k))``, so
realness holds by construction. With this scaling a constant field ``c``
has ``coeffs[0] == c`` and ``sin(2 pi x)`` has ``coeffs[1] == -i/2``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class GridSpec:
    n: int

    def __post_init__(self):
        n = self.n
        if not isinstance(n, (int, np.integer)) or n < 8 or n & (n - 1):
            raise ValueError(f"grid size must be a power of two >= 8, got {n!r}")

    @cached_property
    def x(self) -> np.ndarray:
        return np.arange(self.n) / self.n

    @cached_property
    def k(self) -> np.ndarray:
        """Non-negative integer frequencies ``0 .. n/2`` as floats."""
        return np.arange(self.n // 2 + 1, dtype=float)

    @cached_property
    def weights(self) -> np.ndarray:
        """Multiplicity of each stored coefficient in a sum over all of Z."""
        w = np.full(self.n // 2 + 1, 2.0)
        w[0] = 1.0
        w[-1] = 1.0
        return w

    @property
    def dx(self) -> float:
        return 1.0 / self.n


@dataclass(frozen=True, eq=False)
class Field:
    grid: GridSpec
    values: np.ndarray

    @classmethod
    def from_function(cls, n: int, func) -> "Field":
        grid = GridSpec(n)
        return cls(grid, np.asarray(func(grid.x), dtype=float) * np.ones(n))


@dataclass(frozen=True, eq=False)
class Spectrum:
    grid: GridSpec
    coeffs: np.ndarray

    def with_coeffs(self, coeffs: np.ndarray) -> "Spectrum":
        return Spectrum(self.grid, coeffs)

    def full(self) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(k, c)`` for ``k = -n/2 .. n/2 - 1`` (numpy fftshift order)."""
        n = self.grid.n
        c = np.empty(n, dtype=complex)
        c[: n // 2 + 1] = self.coeffs
        c[n // 2 + 1:] = np.conj(self.coeffs[1: n // 2][::-1])
        k = np.fft.fftfreq(n, 1.0 / n)
        return np.fft.fftshift(k), np.fft.fftshift(c)


@dataclass(frozen=True)
class ExtremaResult:
    min_value: float
    min_location: float
    max_value: float
    max_location: float


def wrap(x: float) -> float:
    """Reduce a position to ``[0, 1)``."""
    r = float(np.mod(x, 1.0))
    return 0.0 if r >= 1.0 else r


def to_spectrum(f: Field) -> Spectrum:
    return Spectrum(f.grid, np.fft.rfft(f.values) / f.grid.n)


def to_field(s: Spectrum) -> Field:
    return Field(s.grid, np.fft.irfft(s.coeffs * s.grid.n, n=s.grid.n))


def derivative_symbol(grid: GridSpec, order: int) -> np.ndarray:
    sym = (1j * TWO_PI * grid.k) ** order
    if order % 2:
        sym[-1] = 0.0
    return sym


def spectral_derivative(s: Spectrum, order: int = 1) -> Spectrum:
    if order not in (1, 2, 3):
        raise ValueError(f"derivative order must be 1, 2 or 3, got {order}")
    return s.with_coeffs(s.coeffs * derivative_symbol(s.grid, order))


def norm_L2(f: Field) -> float:
    """Discrete L^2 norm ``sqrt(mean(values^2))``; equals the torus integral for band-limited data."""
    return float(np.sqrt(np.mean(f.values * f.values)))


def norm_Linf(f: Field) -> float:
    """Grid maximum of ``|values|``. No subgrid refinement."""
    return float(np.max(np.abs(f.values)))


def norm_Hs(s: Spectrum, index: float) -> float:
    """``sqrt(sum_k (1 + 4 pi^2 k^2)^index |c_k|^2)`` over all integer ``k``."""
    w = s.grid.weights * (1.0 + (TWO_PI * s.grid.k) ** 2) ** index
    return float(np.sqrt(np.sum(w * np.abs(s.coeffs) ** 2)))


def evaluate(s: Spectrum, x) -> np.ndarray | float:
    """Trigonometric interpolant ``sum_k c_k e^{2 pi i k x}`` at arbitrary points.

    The Nyquist coefficient is folded in as ``Re(c_{n/2}) cos(pi n x)`` so grid
    values are reproduced exactly.
    """
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    c = s.coeffs
    phase = np.exp(1j * TWO_PI * np.multiply.outer(xs, s.grid.k[1:-1]))
    out = c[0].real + 2.0 * (phase @ c[1:-1]).real
    out = out + c[-1].real * np.cos(np.pi * s.grid.n * xs)
    return float(out[0]) if np.ndim(x) == 0 else out


def resample(f: Field, n: int) -> Field:
    """Spectral interpolation (or truncation) of ``f`` onto an ``n``-point grid."""
    grid = GridSpec(n)
    src = to_spectrum(f).coeffs
    dst = np.zeros(n // 2 + 1, dtype=complex)
    m = min(len(src), len(dst)) - 1
    dst[:m] = src[:m]
    return to_field(Spectrum(grid, dst))


def _refine(s_x: Spectrum, s_xx: Spectrum, s_xxx: Spectrum, x0: float, dx: float, sign: float):
    """One Newton step on ``u_xx = 0`` from ``x0``; returns ``(location, slope)``."""
    uxx = evaluate(s_xx, x0)
    uxxx = evaluate(s_xxx, x0)
    # sign * uxxx > 0 is the curvature of a minimum (sign=+1) or maximum (sign=-1)
    if sign * uxxx <= 0.0:
        return x0, evaluate(s_x, x0)
    step = -uxx / uxxx
    if abs(step) > dx:
        return x0, evaluate(s_x, x0)
    x1 = x0 + step
    return wrap(x1), evaluate(s_x, x1)


def slope_extrema(f: Field) -> ExtremaResult:
    """Minimum and maximum of ``u_x`` with locations.

    Grid argmin/argmax (lowest index on ties) followed by a single Newton
    step on ``u_xx`` evaluated from the spectrum. The refined value is kept
    only when it improves on the grid value.
    """
    s = to_spectrum(f)
    s_x = spectral_derivative(s, 1)
    ux = to_field(s_x).values
    if not np.any(ux):
        return ExtremaResult(0.0, 0.0, 0.0, 0.0)
    s_xx = spectral_derivative(s, 2)
    s_xxx = spectral_derivative(s, 3)
    x = f.grid.x
    dx = f.grid.dx

    i1 = int(np.argmin(ux))
    xi1, m1 = _refine(s_x, s_xx, s_xxx, x[i1], dx, +1.0)
    if m1 > ux[i1]:
        xi1, m1 = x[i1], ux[i1]

    i2 = int(np.argmax(ux))
    xi2, m2 = _refine(s_x, s_xx, s_xxx, x[i2], dx, -1.0)
    if m2 < ux[i2]:
        xi2, m2 = x[i2], ux[i2]

    return ExtremaResult(float(m1), float(xi1), float(m2), float(xi2))
