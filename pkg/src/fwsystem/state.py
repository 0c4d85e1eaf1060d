"""State containers for the two-component system."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidField
from .spectral import Field, Grid


@dataclass(frozen=True, eq=False)
class State:
    """Velocity ``u`` and surface variable ``rho_bar = rho + 1`` at time ``t``.

    Values are stored as plain arrays on a shared grid; :attr:`u_field` and
    :attr:`rho_bar_field` give the :class:`Field` views.
    """

    grid: Grid
    u: np.ndarray
    rho_bar: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        n = self.grid.n_points
        for name in ("u", "rho_bar"):
            v = np.asarray(getattr(self, name), dtype=float)
            if v.shape != (n,):
                raise InvalidField(f"{name} must have shape ({n},), got {v.shape}")
            object.__setattr__(self, name, v)
        object.__setattr__(self, "t", float(self.t))

    @classmethod
    def from_fields(cls, u: Field, rho_bar: Field, t: float = 0.0) -> "State":
        if u.grid is not rho_bar.grid:
            raise InvalidField("u and rho_bar must share one grid")
        return cls(u.grid, u.values, rho_bar.values, t)

    @classmethod
    def from_functions(cls, grid: Grid, u, rho_bar, t: float = 0.0) -> "State":
        x = grid.x
        return cls(grid, np.broadcast_to(u(x), x.shape).astype(float),
                   np.broadcast_to(rho_bar(x), x.shape).astype(float), t)

    @property
    def rho(self) -> np.ndarray:
        return self.rho_bar - 1.0

    @property
    def u_field(self) -> Field:
        return Field(self.grid, self.u)

    @property
    def rho_bar_field(self) -> Field:
        return Field(self.grid, self.rho_bar)

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.u)) and np.all(np.isfinite(self.rho_bar)))


@dataclass(frozen=True, eq=False)
class StateDerivative:
    du: np.ndarray
    drho_bar: np.ndarray
