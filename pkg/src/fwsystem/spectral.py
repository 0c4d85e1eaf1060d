"""Periodic Fourier grid and the Fourier-multiplier operators of the FW system.

The domain is ``[-L, L)`` sampled at ``N`` equispaced points.  The discrete
spectrum of a real field ``v`` is normalised as

    v_hat[n] = (1/N) * sum_j v[j] * exp(-i k_n x_j),   k_n = pi n / L,

so that ``v(x) = sum_n v_hat[n] exp(i k_n x)`` and the ``s = 0`` Sobolev
norm, ``sqrt(2L * sum |v_hat|^2)``, coincides with the trapezoidal L2 norm.

Internally every operator works on real FFTs of plain ``ndarray`` values;
the :class:`Field` wrappers exist for the public, value-like API.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np

from .errors import InvalidField, InvalidGrid, InvalidMollifier

MOLLIFIER_KINDS = ("gaussian", "sharp_cutoff")


@dataclass(frozen=True, eq=False)
class Grid:
    """Collocation grid on ``[-half_period, half_period)``.

    Immutable after construction; the precomputed wavenumber tables are
    shared read-only by every operator.
    """

    half_period: float
    n_points: int
    x: np.ndarray = field(init=False, repr=False)
    k: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        n = int(self.n_points)
        if n != self.n_points or n < 8 or n % 2:
            raise InvalidGrid(f"n_points must be an even integer >= 8, got {self.n_points!r}")
        if not (np.isfinite(self.half_period) and self.half_period > 0):
            raise InvalidGrid(f"half_period must be positive, got {self.half_period!r}")
        L = float(self.half_period)
        object.__setattr__(self, "half_period", L)
        object.__setattr__(self, "n_points", n)
        x = -L + (2.0 * L / n) * np.arange(n)
        k = (np.pi / L) * np.arange(n // 2 + 1)
        x.flags.writeable = False
        k.flags.writeable = False
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "k", k)

    # -- basic geometry --------------------------------------------------
    @property
    def length(self) -> float:
        return 2.0 * self.half_period

    @property
    def dx(self) -> float:
        return self.length / self.n_points

    @property
    def k_max(self) -> float:
        return float(self.k[-1])

    @cached_property
    def modes(self) -> np.ndarray:
        """Integer mode numbers ``n`` in ``[-N/2, N/2)``, ascending."""
        n = self.n_points
        return np.arange(-n // 2, n // 2)

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        """Full wavenumber table ``k_n = pi n / L`` matching :attr:`modes`."""
        return (np.pi / self.half_period) * self.modes

    @cached_property
    def _rfft_weights(self) -> np.ndarray:
        # each interior rfft bin stands for the pair +-n
        w = np.full(self.k.size, 2.0)
        w[0] = 1.0
        w[-1] = 1.0
        return w

    @cached_property
    def _phase(self) -> np.ndarray:
        return np.exp(-1j * self.k * self.x[0])

    # -- transforms ------------------------------------------------------
    def rfft(self, v: np.ndarray) -> np.ndarray:
        return np.fft.rfft(v)

    def irfft(self, vh: np.ndarray) -> np.ndarray:
        return np.fft.irfft(vh, n=self.n_points)

    def apply_symbol(self, v: np.ndarray, symbol: np.ndarray) -> np.ndarray:
        """Multiply mode-wise by ``symbol`` (sampled on :attr:`k`)."""
        return np.fft.irfft(symbol * np.fft.rfft(v), n=self.n_points)

    @cached_property
    def symbol_dx(self) -> np.ndarray:
        s = 1j * self.k
        s[-1] = 0.0  # odd operator, Nyquist mode has no real image
        return s

    @cached_property
    def symbol_helmholtz_inverse(self) -> np.ndarray:
        return 1.0 / (1.0 + self.k**2)

    @cached_property
    def symbol_nonlocal(self) -> np.ndarray:
        return self.symbol_dx / (1.0 + self.k**2)

    @cached_property
    def symbol_second_helmholtz(self) -> np.ndarray:
        return -self.k**2 / (1.0 + self.k**2)

    def dx_op(self, v):
        return self.apply_symbol(v, self.symbol_dx)

    def helmholtz_inverse_op(self, v):
        return self.apply_symbol(v, self.symbol_helmholtz_inverse)

    def nonlocal_op(self, v):
        return self.apply_symbol(v, self.symbol_nonlocal)

    def second_helmholtz_op(self, v):
        return self.apply_symbol(v, self.symbol_second_helmholtz)

    # -- products --------------------------------------------------------
    @cached_property
    def padded_points(self) -> int:
        return 3 * self.n_points // 2

    def product(self, a: np.ndarray, b: np.ndarray, dealias: bool = True) -> np.ndarray:
        """Pointwise product, alias-free by 3/2 zero padding when ``dealias``.

        Zero padding to ``3N/2`` points removes every aliased quadratic
        interaction, which is the padded form of the two-thirds rule.
        """
        if not dealias:
            return a * b
        n, m = self.n_points, self.padded_points
        nk = n // 2
        ah = np.zeros(m // 2 + 1, dtype=complex)
        bh = np.zeros(m // 2 + 1, dtype=complex)
        ah[:nk] = np.fft.rfft(a)[:nk]
        bh[:nk] = np.fft.rfft(b)[:nk]
        scale = m / n
        ab = np.fft.irfft(ah, n=m) * np.fft.irfft(bh, n=m) * scale**2
        ph = np.fft.rfft(ab)[: nk + 1] / scale
        ph[nk] = 0.0
        return np.fft.irfft(ph, n=n)

    # -- quadrature, norms, interpolation --------------------------------
    def integral(self, v: np.ndarray) -> float:
        """Spectral quadrature ``2L * mean(v)``."""
        return float(self.length * np.mean(v))

    def l2_norm(self, v: np.ndarray) -> float:
        return float(np.sqrt(self.dx * np.sum(np.abs(v) ** 2)))

    def l1_norm(self, v: np.ndarray) -> float:
        return float(self.dx * np.sum(np.abs(v)))

    def sobolev_norm(self, v: np.ndarray, s: float) -> float:
        vh = np.fft.rfft(v) / self.n_points
        w = self._rfft_weights * (1.0 + self.k**2) ** s
        return float(np.sqrt(self.length * np.sum(w * np.abs(vh) ** 2)))

    def interpolate(self, v: np.ndarray, points, vh: np.ndarray | None = None) -> np.ndarray:
        """Trigonometric interpolant of ``v`` evaluated at arbitrary ``points``.

        Exact for band-limited data; points may lie outside ``[-L, L)``.
        ``vh`` (the rfft of ``v``) may be passed to skip the transform.
        """
        if vh is None:
            vh = np.fft.rfft(v)
        pts = np.asarray(points, dtype=float)
        e = np.exp(1j * np.multiply.outer(pts - self.x[0], self.k))
        return (e @ (self._rfft_weights * vh)).real / self.n_points

    def shift(self, v: np.ndarray, a: float) -> np.ndarray:
        """Return the samples of ``v(x - a)`` (periodic translation)."""
        return self.apply_symbol(v, np.exp(-1j * self.k * a))

    def evaluate(self, func: Callable[[np.ndarray], np.ndarray]) -> "Field":
        return Field(self, np.asarray(func(self.x), dtype=float))


@dataclass(frozen=True, eq=False)
class Field:
    """A real periodic function sampled on a :class:`Grid`."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != (self.grid.n_points,):
            raise InvalidField(f"expected {self.grid.n_points} values, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise InvalidField("field contains non-finite values")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @cached_property
    def spectrum(self) -> "Spectrum":
        return transform(self)

    def __add__(self, other):
        return Field(self.grid, self.values + _values(other))

    def __sub__(self, other):
        return Field(self.grid, self.values - _values(other))

    def __mul__(self, other):
        return Field(self.grid, self.values * _values(other))

    __rmul__ = __mul__

    def __neg__(self):
        return Field(self.grid, -self.values)


def _values(obj):
    return obj.values if isinstance(obj, Field) else obj


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Complex Fourier coefficients ordered by mode ``n = -N/2 .. N/2-1``."""

    grid: Grid
    coeffs: np.ndarray

    def at(self, n: int) -> complex:
        return complex(self.coeffs[n + self.grid.n_points // 2])


@dataclass(frozen=True)
class MollifierSpec:
    """Fourier-symbol mollifier ``J_eps``.

    ``gaussian`` has symbol ``exp(-(eps k)^2)``; ``sharp_cutoff`` keeps the
    modes with ``|k| <= 1/eps``.
    """

    epsilon: float
    kind: str = "gaussian"

    def __post_init__(self):
        if not (np.isfinite(self.epsilon) and 0.0 < self.epsilon <= 1.0):
            raise InvalidMollifier(f"epsilon must lie in (0, 1], got {self.epsilon!r}")
        if self.kind not in MOLLIFIER_KINDS:
            raise InvalidMollifier(f"unknown mollifier kind {self.kind!r}")

    @classmethod
    def identity_for(cls, grid: Grid) -> "MollifierSpec":
        """Sharp cutoff beyond the grid's largest wavenumber: symbol == 1."""
        return cls(epsilon=min(1.0, 1.0 / (2.0 * grid.k_max)), kind="sharp_cutoff")

    def symbol(self, k) -> np.ndarray:
        k = np.abs(np.asarray(k, dtype=float))
        if self.kind == "gaussian":
            return np.exp(-((self.epsilon * k) ** 2))
        return (k * self.epsilon <= 1.0).astype(float)


# ---------------------------------------------------------------------------
# Field-level operations
# ---------------------------------------------------------------------------

def transform(f: Field) -> Spectrum:
    g = f.grid
    v = f.values
    if not np.all(np.isfinite(v)):
        raise InvalidField("field contains non-finite values")
    c = np.fft.fftshift(np.fft.fft(v)) / g.n_points
    c *= np.exp(-1j * g.wavenumbers * g.x[0])
    return Spectrum(g, c)


def inverse(spec: Spectrum) -> Field:
    g = spec.grid
    c = np.asarray(spec.coeffs) * np.exp(1j * g.wavenumbers * g.x[0])
    v = np.fft.ifft(np.fft.ifftshift(c)) * g.n_points
    return Field(g, v.real)


def derivative(f: Field) -> Field:
    return Field(f.grid, f.grid.dx_op(f.values))


def helmholtz_inverse(f: Field) -> Field:
    """Apply ``(I - d^2/dx^2)^{-1}``, symbol ``1/(1+k^2)``."""
    return Field(f.grid, f.grid.helmholtz_inverse_op(f.values))


def nonlocal_T(f: Field) -> Field:
    """Apply ``d/dx (I - d^2/dx^2)^{-1}``, symbol ``ik/(1+k^2)``."""
    return Field(f.grid, f.grid.nonlocal_op(f.values))


def second_deriv_helmholtz(f: Field) -> Field:
    """Apply ``d^2/dx^2 (I - d^2/dx^2)^{-1}``, symbol ``-k^2/(1+k^2)``."""
    return Field(f.grid, f.grid.second_helmholtz_op(f.values))


def mollify(f: Field, spec: MollifierSpec) -> Field:
    if not isinstance(spec, MollifierSpec):
        raise InvalidMollifier(f"expected MollifierSpec, got {type(spec).__name__}")
    return Field(f.grid, f.grid.apply_symbol(f.values, spec.symbol(f.grid.k)))


def sobolev_norm(f: Field, s: float) -> float:
    return f.grid.sobolev_norm(f.values, s)
