"""Right-hand sides, RK4 time stepping and energy monitoring.

The system advanced here is

    u_t       = -u u_x + T(rho_bar - 1 - u),     T = d/dx (I - d^2/dx^2)^{-1}
    rho_bar_t = -(rho_bar u)_x

together with its mollified regularisation, in which every quadratic term
is wrapped by the Fourier mollifier ``J_eps``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .diagnostics import DiagnosticsRecord, make_record, slope_extrema
from .errors import CFLViolation, InvalidField, InvalidMollifier, InvalidSobolevIndex
from .spectral import Field, Grid, MollifierSpec
from .state import State, StateDerivative

DEFAULT_CFL_LIMIT = 0.5


# ---------------------------------------------------------------------------
# right-hand sides
# ---------------------------------------------------------------------------

def rhs(s: State, dealias: bool = True) -> StateDerivative:
    g = s.grid
    u, rb = s.u, s.rho_bar
    ux = g.dx_op(u)
    du = -g.product(u, ux, dealias) + g.nonlocal_op(rb - 1.0 - u)
    drb = -g.dx_op(g.product(rb, u, dealias))
    return StateDerivative(du, drb)


def rhs_mollified(s: State, spec: MollifierSpec, dealias: bool = True) -> StateDerivative:
    """Mollified right-hand side; the ``rho`` equation is evolved for ``rho = rho_bar - 1``."""
    if not isinstance(spec, MollifierSpec):
        raise InvalidMollifier(f"expected MollifierSpec, got {type(spec).__name__}")
    g = s.grid
    sym = spec.symbol(g.k)
    uh = np.fft.rfft(s.u)
    rho = s.rho_bar - 1.0
    ju = g.irfft(sym * uh)
    jux = g.irfft(sym * g.symbol_dx * uh)
    jrho = g.apply_symbol(rho, sym)
    du = -g.apply_symbol(g.product(ju, jux, dealias), sym) + g.nonlocal_op(rho - s.u)
    flux = g.apply_symbol(g.product(ju, jrho, dealias), sym)
    drho = -g.dx_op(flux) - g.irfft(g.symbol_dx * uh)
    return StateDerivative(du, drho)


def scalar_fw_rhs(grid: Grid, u: np.ndarray, dealias: bool = True) -> np.ndarray:
    """Scalar Fornberg-Whitham equation ``u_t + u u_x = -T u``.

    This is the sign obtained from ``u_t - u_xxt + u_x + u u_x = u u_xxx +
    3 u_x u_xx`` and equals the system's ``u`` equation when ``rho_bar = 0``.
    """
    ux = grid.dx_op(u)
    return -grid.product(u, ux, dealias) - grid.nonlocal_op(u)


def _evaluate(s: State, mollifier: MollifierSpec | None, dealias: bool) -> StateDerivative:
    if mollifier is None:
        return rhs(s, dealias)
    return rhs_mollified(s, mollifier, dealias)


# ---------------------------------------------------------------------------
# time stepping
# ---------------------------------------------------------------------------

def cfl_number(s: State, dt: float) -> float:
    return float(np.max(np.abs(s.u)) * dt / s.grid.dx)


def step_rk4(s: State, dt: float, mollifier: MollifierSpec | None = None, dealias: bool = True,
             cfl_limit: float = DEFAULT_CFL_LIMIT, k1: StateDerivative | None = None) -> State:
    """Advance one classical fourth-order Runge-Kutta step.

    ``mollifier=None`` selects the unmollified system.  ``k1`` may carry a
    precomputed right-hand side at ``s``.
    """
    cfl = cfl_number(s, dt)
    if cfl > cfl_limit:
        raise CFLViolation(cfl, cfl_limit)
    g = s.grid
    if k1 is None:
        k1 = _evaluate(s, mollifier, dealias)

    def stage(k: StateDerivative, h: float) -> State:
        return State(g, s.u + h * k.du, s.rho_bar + h * k.drho_bar, s.t + h)

    k2 = _evaluate(stage(k1, 0.5 * dt), mollifier, dealias)
    k3 = _evaluate(stage(k2, 0.5 * dt), mollifier, dealias)
    k4 = _evaluate(stage(k3, dt), mollifier, dealias)
    u = s.u + (dt / 6.0) * (k1.du + 2.0 * k2.du + 2.0 * k3.du + k4.du)
    rb = s.rho_bar + (dt / 6.0) * (k1.drho_bar + 2.0 * k2.drho_bar + 2.0 * k3.drho_bar + k4.drho_bar)
    return State(g, u, rb, s.t + dt)


# ---------------------------------------------------------------------------
# simulation driver
# ---------------------------------------------------------------------------

class Status(enum.Enum):
    COMPLETED = "Completed"
    BLOWUP = "BlowUpDetected"
    STEP_REJECTED = "StepRejected"


@dataclass(frozen=True)
class SimConfig:
    dt: float
    t_end: float
    mollifier: MollifierSpec | None = None
    dealias: bool = True
    blowup_slope_threshold: float = 1e4
    stride: int = 1
    cfl_limit: float = DEFAULT_CFL_LIMIT
    max_halvings: int = 20

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt!r}")
        if not self.t_end > 0:
            raise ValueError(f"t_end must be positive, got {self.t_end!r}")
        if not self.blowup_slope_threshold > 0:
            raise ValueError("blowup_slope_threshold must be positive")
        if int(self.stride) < 1:
            raise ValueError("stride must be >= 1")


@dataclass
class Trajectory:
    """Stored snapshots (with their right-hand sides) and per-step records.

    ``rhs_values[i]`` is the time derivative at ``snapshots[i]``; together
    they allow cubic Hermite reconstruction between snapshots.
    """

    grid: Grid
    config: SimConfig
    snapshots: list[State] = field(default_factory=list)
    rhs_values: list[StateDerivative] = field(default_factory=list)
    records: list[DiagnosticsRecord] = field(default_factory=list)
    status: Status = Status.COMPLETED
    t_star: float | None = None
    steps: int = 0
    dt_final: float = 0.0
    message: str = ""

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.snapshots])

    @property
    def final(self) -> State:
        return self.snapshots[-1]

    @property
    def dt_initial(self) -> float:
        return self.config.dt

    def summary(self) -> dict:
        return {
            "status": self.status.value,
            "t_star": self.t_star,
            "t_final": self.final.t,
            "steps": self.steps,
            "dt_initial": self.config.dt,
            "dt_final": self.dt_final,
            "n_snapshots": len(self.snapshots),
            "message": self.message,
        }


def simulate(s0: State, cfg: SimConfig) -> Trajectory:
    """Integrate from ``s0`` to ``cfg.t_end``.

    Stops early with ``BLOWUP`` once ``inf u_x <= -threshold``.  A CFL
    violation halves ``dt`` (at most ``cfg.max_halvings`` times, after which
    the run ends with ``STEP_REJECTED``); the reduced step is kept.
    """
    g = s0.grid
    l1_rho0 = g.l1_norm(s0.rho_bar)
    l2_u0 = g.l2_norm(s0.u)
    traj = Trajectory(grid=g, config=cfg)
    s = s0
    k = _evaluate(s, cfg.mollifier, cfg.dealias)
    traj.snapshots.append(s)
    traj.rhs_values.append(k)
    traj.records.append(make_record(s, l1_rho0, l2_u0))

    dt = cfg.dt
    halvings = 0
    n_steps = 0
    # time is accumulated as n*dt segments to avoid drift in the final step
    t_end = cfg.t_end
    tol = 1e-12 * max(1.0, t_end)
    while s.t < t_end - tol:
        h = min(dt, t_end - s.t)
        try:
            s_new = step_rk4(s, h, cfg.mollifier, cfg.dealias, cfg.cfl_limit, k1=k)
        except CFLViolation as exc:
            halvings += 1
            if halvings > cfg.max_halvings:
                traj.status = Status.STEP_REJECTED
                traj.message = str(exc)
                break
            dt *= 0.5
            continue
        if abs(t_end - s_new.t) <= tol:
            s_new = replace(s_new, t=t_end)
        n_steps += 1
        if not s_new.is_finite():
            traj.status = Status.STEP_REJECTED
            traj.message = f"non-finite state at t={s_new.t:.6g}"
            break
        rec = make_record(s_new, l1_rho0, l2_u0)
        traj.records.append(rec)
        s = s_new
        blow = rec.min_slope <= -cfg.blowup_slope_threshold
        done = blow or s.t >= t_end - tol
        k = _evaluate(s, cfg.mollifier, cfg.dealias)
        if n_steps % cfg.stride == 0 or done:
            traj.snapshots.append(s)
            traj.rhs_values.append(k)
        if blow:
            traj.status = Status.BLOWUP
            traj.t_star = s.t
            break
    traj.steps = n_steps
    traj.dt_final = dt
    return traj


# ---------------------------------------------------------------------------
# energy and studies
# ---------------------------------------------------------------------------

def energy(s: State, s_index: float) -> float:
    """``E^s = 1/2 ||u||_{H^s}^2 + 1/2 ||rho_bar - 1||_{H^{s-1}}^2``; needs ``s > 3/2``."""
    if not s_index > 1.5:
        raise InvalidSobolevIndex(f"Sobolev index must exceed 3/2, got {s_index!r}")
    g = s.grid
    return 0.5 * g.sobolev_norm(s.u, s_index) ** 2 + 0.5 * g.sobolev_norm(s.rho, s_index - 1.0) ** 2


@dataclass
class ConvergenceTable:
    """Deviation ``||u_eps(t) - u(t)||_{H^sigma}`` per mollifier and checkpoint."""

    mollifiers: list[MollifierSpec]
    times: np.ndarray
    deviations: np.ndarray  # shape (len(mollifiers), len(times))
    sigma: float

    def final(self) -> np.ndarray:
        return self.deviations[:, -1]

    def is_monotone(self, slack: float = 0.05) -> bool:
        d = self.final()
        return bool(np.all(d[1:] <= d[:-1] * (1.0 + slack)))


def _checkpoint_states(traj: Trajectory, times: np.ndarray) -> list[State]:
    by_t = {round(s.t, 12): s for s in traj.snapshots}
    out = []
    for t in times:
        st = by_t.get(round(float(t), 12))
        if st is None:
            raise ValueError(f"no snapshot at checkpoint t={t}")
        out.append(st)
    return out


def mollifier_convergence_study(s0: State, eps_list, cfg: SimConfig, sigma: float = 1.0,
                                kind: str = "gaussian") -> ConvergenceTable:
    """Distance of mollified runs from the unmollified run at every snapshot time.

    ``eps_list`` entries are either floats (interpreted with ``kind``) or
    :class:`MollifierSpec` instances.
    """
    specs = [e if isinstance(e, MollifierSpec) else MollifierSpec(float(e), kind) for e in eps_list]
    ref = simulate(s0, replace(cfg, mollifier=None))
    times = ref.times
    ref_states = ref.snapshots
    g = s0.grid
    dev = np.zeros((len(specs), times.size))
    for i, spec in enumerate(specs):
        run = simulate(s0, replace(cfg, mollifier=spec))
        states = _checkpoint_states(run, times)
        for j, (a, b) in enumerate(zip(states, ref_states)):
            dev[i, j] = g.sobolev_norm(a.u - b.u, sigma)
    return ConvergenceTable(specs, times, dev, sigma)


def _as_perturbation(s0: State, perturbation) -> tuple[np.ndarray, np.ndarray]:
    n = s0.grid.n_points
    if isinstance(perturbation, tuple):
        du, dr = perturbation
    else:
        du, dr = perturbation, np.zeros(n)
    du = du.values if isinstance(du, Field) else np.asarray(du, dtype=float)
    dr = dr.values if isinstance(dr, Field) else np.asarray(dr, dtype=float)
    if du.shape != (n,) or dr.shape != (n,):
        raise InvalidField("perturbation does not match the grid")
    return du, dr


def stability_divergence(s0: State, perturbation, cfg: SimConfig, s_index: float = 2.0,
                         max_relative: float = 1e-4) -> tuple[np.ndarray, np.ndarray]:
    """Twin-run deviation ``||du||_{H^{s-1}} + ||drho||_{H^{s-1}}`` over time.

    ``perturbation`` is a field (applied to ``u``) or a ``(du, drho)`` pair.
    """
    g = s0.grid
    du, dr = _as_perturbation(s0, perturbation)
    size = g.sobolev_norm(du, s_index - 1) + g.sobolev_norm(dr, s_index - 1)
    base = g.sobolev_norm(s0.u, s_index - 1) + g.sobolev_norm(s0.rho, s_index - 1)
    if base > 0 and size > max_relative * base:
        raise ValueError(f"perturbation size {size:.3g} exceeds {max_relative:g} of the state size {base:.3g}")
    a = simulate(s0, cfg)
    b = simulate(State(g, s0.u + du, s0.rho_bar + dr, s0.t), cfg)
    n = min(len(a.snapshots), len(b.snapshots))
    times = np.array([a.snapshots[i].t for i in range(n)])
    dev = np.array([
        g.sobolev_norm(b.snapshots[i].u - a.snapshots[i].u, s_index - 1)
        + g.sobolev_norm(b.snapshots[i].rho_bar - a.snapshots[i].rho_bar, s_index - 1)
        for i in range(n)
    ])
    return times, dev


def fit_growth_rate(times, deviation) -> float:
    """Least-squares slope ``K`` of ``log(dev(t)/dev(0)) ~ K t`` through the origin."""
    t = np.asarray(times, dtype=float)
    d = np.asarray(deviation, dtype=float)
    if d[0] <= 0:
        return 0.0
    y = np.log(d / d[0])
    den = float(np.dot(t, t))
    return float(np.dot(t, y) / den) if den > 0 else 0.0


def simulate_scalar_fw(grid: Grid, u0: np.ndarray, dt: float, t_end: float, dealias: bool = True) -> np.ndarray:
    """Independent RK4 integration of the scalar FW equation."""
    u = np.array(u0, dtype=float)
    n = int(math.ceil(t_end / dt - 1e-9))
    h = t_end / n
    for _ in range(n):
        k1 = scalar_fw_rhs(grid, u, dealias)
        k2 = scalar_fw_rhs(grid, u + 0.5 * h * k1, dealias)
        k3 = scalar_fw_rhs(grid, u + 0.5 * h * k2, dealias)
        k4 = scalar_fw_rhs(grid, u + h * k3, dealias)
        u = u + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return u


def slope_series(traj: Trajectory, refine: str = "newton") -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``(t, m(t), M(t))`` evaluated on the stored snapshots."""
    t, m, M = [], [], []
    for s in traj.snapshots:
        a, _, b, _ = slope_extrema(s.grid, s.u, refine=refine)
        t.append(s.t)
        m.append(a)
        M.append(b)
    return np.array(t), np.array(m), np.array(M)
