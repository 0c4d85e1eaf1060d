import numpy as np
import pytest

from fwsystem.characteristics import (advect, density_deviation, forcing_field, riccati_forcing,
                                      slope_along_extremum, slope_growth_monitor, verify_density_invariant)
from fwsystem.dynamics import SimConfig, Trajectory, simulate
from fwsystem.errors import SeedOutsideDomain
from fwsystem.spectral import Grid
from fwsystem.state import State, StateDerivative

G = Grid(np.pi, 64)


def frozen(u, rb, t_end=1.0, n=101):
    """Trajectory of a field held fixed in time (zero time derivative)."""
    tr = Trajectory(grid=G, config=SimConfig(dt=t_end / (n - 1), t_end=t_end))
    zero = StateDerivative(np.zeros(G.n_points), np.zeros(G.n_points))
    for t in np.linspace(0.0, t_end, n):
        tr.snapshots.append(State(G, u, rb, float(t)))
        tr.rhs_values.append(zero)
    return tr


def test_zero_velocity_paths_stay():
    tr = simulate(State(G, np.zeros(64), np.full(64, 1.3)), SimConfig(dt=0.05, t_end=1.0))
    seeds = np.linspace(-3, 3, 7)
    b = advect(tr, seeds)
    assert np.max(np.abs(b.q - seeds)) < 1e-15
    assert np.max(np.abs(b.qx - 1.0)) < 1e-15
    assert verify_density_invariant(b, tr) < 1e-14


def test_constant_velocity_translates():
    c0 = 0.8
    tr = simulate(State(G, np.full(64, c0), np.ones(64)), SimConfig(dt=0.05, t_end=3.0, stride=5))
    seeds = np.array([-3.0, 0.0, 2.5])
    b = advect(tr, seeds)
    assert np.max(np.abs(b.q - (seeds + c0 * b.times[:, None]))) < 1e-12
    assert np.max(np.abs(b.qx - 1.0)) < 1e-13
    wrapped = (seeds + c0 * 3.0 + np.pi) % (2 * np.pi) - np.pi
    assert np.max(np.abs(b.q_wrapped[-1] - wrapped)) < 1e-12
    assert b.winding[-1].tolist() == [0, 0, 1]


def test_frozen_sine_closed_form():
    tr = frozen(np.sin(G.x), np.ones(64))
    seeds = np.linspace(-3.0, 3.0, 13)
    b = advect(tr, seeds)
    t = b.times[:, None]
    exact = 2 * np.arctan(np.tan(seeds / 2) * np.exp(t))
    assert np.max(np.abs(b.q - exact)) < 1e-8
    # q_x of the closed form
    qx = np.exp(t) / (np.cos(seeds / 2) ** 2 + np.sin(seeds / 2) ** 2 * np.exp(2 * t))
    assert np.max(np.abs(b.qx - qx)) < 1e-8


def test_zero_density_transported():
    tr = simulate(State(G, 0.2 * np.sin(G.x), np.zeros(64)), SimConfig(dt=0.01, t_end=0.5, stride=5))
    b = advect(tr, np.linspace(-3, 3, 9))
    assert np.max(np.abs(b.gamma * b.qx)) < 1e-13


@pytest.mark.parametrize("bad", [np.pi, -4.0, np.nan])
def test_seed_outside_domain(bad):
    tr = frozen(np.zeros(64), np.ones(64), n=3)
    with pytest.raises(SeedOutsideDomain):
        advect(tr, [0.0, bad])


def test_rows_layout():
    tr = frozen(np.zeros(64), np.ones(64), n=3)
    rows = list(advect(tr, [0.0, 1.0]).rows())
    assert len(rows) == 6
    assert rows[0][:2] == (0.0, 0) or list(rows[0][:2]) == [0.0, 0]


def test_order_preserving(smooth_run):
    seeds = np.sort(np.random.default_rng(3).uniform(-np.pi, np.pi, 40))
    b = advect(smooth_run, seeds)
    assert np.all(np.diff(b.q, axis=1) > 0)
    assert np.all(b.qx > 0)


def test_density_invariant_smooth(smooth_run):
    b = advect(smooth_run, np.linspace(-np.pi, np.pi, 32, endpoint=False))
    assert verify_density_invariant(b, smooth_run) < 1e-4
    assert density_deviation(b).shape == b.q.shape


def test_forcing_examples():
    s = State(G, np.zeros(64), np.ones(64))
    assert np.max(np.abs(forcing_field(s))) < 1e-14
    s = State(G, np.zeros(64), 1 + np.cos(G.x))
    tr = frozen(s.u, s.rho_bar, n=3)
    rep = riccati_forcing(tr, advect(tr, [0.0]))
    assert rep.forcing[0, 0] == pytest.approx(-0.5, abs=1e-14)


def test_slope_dynamics_constant():
    tr = simulate(State(G, np.full(64, 0.3), np.ones(64)), SimConfig(dt=0.05, t_end=0.5))
    sd = slope_along_extremum(tr)
    assert np.max(np.abs(sd.m)) < 1e-14 and np.max(np.abs(sd.M)) < 1e-14


def test_slope_dynamics_sine_early_time():
    tr = simulate(State(G, np.sin(G.x), np.ones(64)), SimConfig(dt=1e-3, t_end=0.2))
    sd = slope_along_extremum(tr)
    assert np.max(np.abs(sd.residual)) < 1e-2
    assert np.all(sd.m <= 0) and np.all(sd.M >= 0)


def test_slope_signs_and_growth_monitor(smooth_run):
    sd = slope_along_extremum(smooth_run)
    assert np.all(sd.m <= 0) and np.all(sd.M >= 0)
    gm = slope_growth_monitor(smooth_run)
    assert gm.holds
    assert np.all(np.isfinite(gm.omega))
