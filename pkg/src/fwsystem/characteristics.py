"""Particle paths of the velocity field and quantities carried along them.

Paths are integrated with RK4 whose step is the snapshot spacing of the
trajectory.  Between snapshots the velocity is rebuilt by cubic Hermite
interpolation in time (using the stored right-hand sides) and
trigonometric interpolation in space, so the path error is fourth order.
The Jacobian ``q_x = exp(int u_x(s, q) ds)`` is integrated as the extra
ODE component ``d/dt log q_x = u_x(t, q)`` with the same RK4 stages.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .diagnostics import slope_extrema
from .dynamics import Trajectory
from .errors import SeedOutsideDomain
from .spectral import Grid


@dataclass
class CharacteristicsBundle:
    """Paths on the universal cover: ``q`` is unwrapped, see :attr:`winding`."""

    seeds: np.ndarray
    times: np.ndarray
    q: np.ndarray  # (n_times, n_seeds)
    qx: np.ndarray
    gamma: np.ndarray
    half_period: float

    @property
    def winding(self) -> np.ndarray:
        L = self.half_period
        return np.floor((self.q + L) / (2 * L)).astype(int)

    @property
    def q_wrapped(self) -> np.ndarray:
        L = self.half_period
        return (self.q + L) % (2 * L) - L

    def rows(self):
        """``(t, seed_id, q, qx, gamma)`` rows ordered by time then seed."""
        for i, t in enumerate(self.times):
            for j in range(self.seeds.size):
                yield t, j, self.q[i, j], self.qx[i, j], self.gamma[i, j]


def _hermite(theta: float) -> tuple[float, float, float, float]:
    t2, t3 = theta * theta, theta ** 3
    return 2 * t3 - 3 * t2 + 1, t3 - 2 * t2 + theta, -2 * t3 + 3 * t2, t3 - t2


def _eval_pairs(grid: Grid, uh: np.ndarray, pts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Trigonometric interpolant of ``u`` and ``u_x`` at ``pts`` from the rfft ``uh``."""
    w = np.full(grid.k.size, 2.0)
    w[0] = w[-1] = 1.0
    e = np.exp(1j * np.multiply.outer(pts - grid.x[0], grid.k))
    c = w * uh
    cx = c * grid.symbol_dx
    n = grid.n_points
    return (e @ c).real / n, (e @ cx).real / n


def advect(traj: Trajectory, seeds) -> CharacteristicsBundle:
    g = traj.grid
    L = g.half_period
    x0 = np.atleast_1d(np.asarray(seeds, dtype=float))
    if np.any(~np.isfinite(x0)) or np.any(x0 < -L) or np.any(x0 >= L):
        raise SeedOutsideDomain(f"seeds must lie in [{-L}, {L})")
    snaps = traj.snapshots
    derivs = traj.rhs_values
    nt = len(snaps)
    U = [np.fft.rfft(s.u) for s in snaps]
    Ud = [np.fft.rfft(d.du) for d in derivs]

    q = np.empty((nt, x0.size))
    logqx = np.empty((nt, x0.size))
    q[0] = x0
    logqx[0] = 0.0
    for n in range(nt - 1):
        t0, t1 = snaps[n].t, snaps[n + 1].t
        h = t1 - t0

        def spectrum_at(theta: float) -> np.ndarray:
            a, b, c, d = _hermite(theta)
            return a * U[n] + (b * h) * Ud[n] + c * U[n + 1] + (d * h) * Ud[n + 1]

        mid = spectrum_at(0.5)
        y = q[n]
        k1u, k1x = _eval_pairs(g, U[n], y)
        k2u, k2x = _eval_pairs(g, mid, y + 0.5 * h * k1u)
        k3u, k3x = _eval_pairs(g, mid, y + 0.5 * h * k2u)
        k4u, k4x = _eval_pairs(g, U[n + 1], y + h * k3u)
        q[n + 1] = y + (h / 6.0) * (k1u + 2 * k2u + 2 * k3u + k4u)
        logqx[n + 1] = logqx[n] + (h / 6.0) * (k1x + 2 * k2x + 2 * k3x + k4x)

    gamma = np.empty_like(q)
    for n, s in enumerate(snaps):
        gamma[n] = g.interpolate(s.rho_bar, q[n])
    return CharacteristicsBundle(x0, traj.times, q, np.exp(logqx), gamma, L)


def density_deviation(bundle: CharacteristicsBundle) -> np.ndarray:
    """``rho_bar(t, q) q_x - rho_bar_0(x0)`` for every time and seed."""
    return bundle.gamma * bundle.qx - bundle.gamma[0]


def verify_density_invariant(bundle: CharacteristicsBundle, traj: Trajectory) -> float:
    if bundle.times.size != len(traj.snapshots):
        raise ValueError("bundle was not produced from this trajectory")
    return float(np.max(np.abs(density_deviation(bundle))))


@dataclass
class ForcingReport:
    times: np.ndarray
    forcing: np.ndarray  # (n_times, n_seeds)
    bound: float
    slack: float

    @property
    def max_abs(self) -> float:
        return float(np.max(np.abs(self.forcing)))

    @property
    def within_bound(self) -> bool:
        return self.max_abs <= self.bound + self.slack


def forcing_field(s) -> np.ndarray:
    """``d^2/dx^2 (I - d^2/dx^2)^{-1} (rho_bar - u)`` on the grid."""
    return s.grid.second_helmholtz_op(s.rho_bar - s.u)


def riccati_forcing(traj: Trajectory, bundle: CharacteristicsBundle, slack: float = 1e-6) -> ForcingReport:
    """Slope forcing along each path, with the bound ``||rho_bar_0||_L1 + K1(T)``."""
    g = traj.grid
    f = np.empty_like(bundle.q)
    for n, s in enumerate(traj.snapshots):
        f[n] = g.interpolate(forcing_field(s), bundle.q[n])
    s0 = traj.snapshots[0]
    l1 = g.l1_norm(s0.rho_bar)
    T = traj.snapshots[-1].t
    bound = l1 + g.l2_norm(s0.u) + l1 * T
    return ForcingReport(bundle.times, f, bound, slack)


@dataclass
class SlopeDynamics:
    """Extremal slopes and the finite-difference check of ``M' = -M^2 + f``."""

    times: np.ndarray
    m: np.ndarray
    M: np.ndarray
    xi_m: np.ndarray
    xi_M: np.ndarray
    forcing_at_max: np.ndarray
    forcing_at_min: np.ndarray
    dMdt: np.ndarray
    residual: np.ndarray  # dM/dt - (-M^2 + f), interior points only
    residual_min: np.ndarray


def slope_along_extremum(traj: Trajectory, refine: str = "newton") -> SlopeDynamics:
    g = traj.grid
    n = len(traj.snapshots)
    t = traj.times
    m = np.empty(n)
    M = np.empty(n)
    xm = np.empty(n)
    xM = np.empty(n)
    fM = np.empty(n)
    fm = np.empty(n)
    for i, s in enumerate(traj.snapshots):
        m[i], xm[i], M[i], xM[i] = slope_extrema(g, s.u, refine=refine)
        ff = forcing_field(s)
        fM[i], fm[i] = g.interpolate(ff, [xM[i], xm[i]])
    if n >= 3:
        dM = np.gradient(M, t, edge_order=2)
        dm = np.gradient(m, t, edge_order=2)
    else:
        dM = np.full(n, np.nan)
        dm = np.full(n, np.nan)
    res = (dM - (-M**2 + fM))[1:-1]
    res_m = (dm - (-m**2 + fm))[1:-1]
    return SlopeDynamics(t, m, M, xm, xM, fM, fm, dM, res, res_m)


@dataclass
class GrowthMonitor:
    """At-most-linear growth check of ``log(1 + M(t))``.

    ``omega`` is the Lyapunov quantity ``g0 g + (g0/g)(1 + M^2)`` with
    ``g = rho_bar`` at the location of the largest slope.
    """

    times: np.ndarray
    log_growth: np.ndarray
    rate: float
    margin: float
    omega: np.ndarray

    @property
    def holds(self) -> bool:
        return bool(np.all(self.log_growth <= self.rate * self.times + self.margin))


def slope_growth_monitor(traj: Trajectory, margin: float = 0.1) -> GrowthMonitor:
    """Check ``log(1+M(t)) - log(1+M(0)) <= (||rho_bar_0||_L1 + K1(T) + 1/2) t + margin``."""
    g = traj.grid
    sd = slope_along_extremum(traj)
    s0 = traj.snapshots[0]
    l1 = g.l1_norm(s0.rho_bar)
    T = traj.snapshots[-1].t
    rate = l1 + g.l2_norm(s0.u) + l1 * T + 0.5
    growth = np.log1p(sd.M) - math.log1p(sd.M[0])
    gam = np.array([float(g.interpolate(s.rho_bar, x)) for s, x in zip(traj.snapshots, sd.xi_M)])
    with np.errstate(divide="ignore", invalid="ignore"):
        omega = gam[0] * gam + gam[0] / gam * (1.0 + sd.M**2)
    return GrowthMonitor(sd.times, growth, rate, margin, omega)
