"""Conservation monitors, slope extrema and the wave-breaking criteria.

The two sufficient breaking criteria are exposed as predicates returning a
:class:`BreakingPrediction`; :func:`empirical_breaking_check` closes the
loop against a simulated :class:`~fwsystem.dynamics.Trajectory`.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import TYPE_CHECKING

import numpy as np
from scipy.integrate import solve_ivp

from .errors import InvalidBounds, MismatchedInitialData, NotApplicable
from .spectral import Grid
from .state import State

if TYPE_CHECKING:
    from .dynamics import Trajectory

L1_NORMALIZATION_TOL = 1e-10


# ---------------------------------------------------------------------------
# slope extrema
# ---------------------------------------------------------------------------

def _parabolic(values: np.ndarray, j: int) -> tuple[float, float]:
    """Vertex offset (in cells) and value of the parabola through j-1, j, j+1."""
    n = values.size
    a, b, c = values[(j - 1) % n], values[j], values[(j + 1) % n]
    den = a - 2.0 * b + c
    if den == 0.0:
        return 0.0, float(b)
    off = 0.5 * (a - c) / den
    off = min(max(off, -0.5), 0.5)
    return off, float(b - 0.25 * (a - c) * off)


def _newton_polish(grid: Grid, uh: np.ndarray, x0: float, sign: float) -> tuple[float, float]:
    """Locate the extremum of the interpolated slope near ``x0``.

    Newton iterations on ``u_xx = 0`` using the trigonometric interpolant;
    falls back to ``x0`` if the iteration wanders more than one cell.
    """
    k = grid.k
    d1 = (1j * k) * uh
    d2 = (1j * k) ** 2 * uh
    d3 = (1j * k) ** 3 * uh
    d1[-1] = d3[-1] = 0.0
    x = x0
    for _ in range(8):
        f2 = float(grid.interpolate(None, x, vh=d2))
        f3 = float(grid.interpolate(None, x, vh=d3))
        if sign * f3 <= 0.0:
            break
        step = f2 / f3
        x -= step
        if abs(x - x0) > grid.dx:
            x = x0
            break
        if abs(step) < 1e-15 * max(1.0, abs(x)):
            break
    return x, float(grid.interpolate(None, x, vh=d1))


def slope_extrema(grid: Grid, u: np.ndarray, refine: str = "parabolic") -> tuple[float, float, float, float]:
    """Return ``(m, xi_m, M, xi_M)``: inf/sup of ``u_x`` and their locations.

    The grid argmin/argmax (ties to the smallest ``x``) is refined by a
    parabola through the neighbouring samples; ``refine="newton"`` further
    polishes on the spectral interpolant.  ``refine="none"`` returns grid
    values, which bound the true extremum magnitude from below.
    """
    if refine not in ("none", "parabolic", "newton"):
        raise ValueError(f"unknown refine mode {refine!r}")
    uh = np.fft.rfft(u)
    ux = grid.irfft(grid.symbol_dx * uh)
    jm = int(np.argmin(ux))
    jM = int(np.argmax(ux))
    if refine == "none":
        return float(ux[jm]), float(grid.x[jm]), float(ux[jM]), float(grid.x[jM])
    om, m = _parabolic(ux, jm)
    oM, M = _parabolic(ux, jM)
    xm = grid.x[jm] + om * grid.dx
    xM = grid.x[jM] + oM * grid.dx
    # the parabola may overshoot by round-off; never report beyond the samples
    m = min(m, float(ux[jm]))
    M = max(M, float(ux[jM]))
    if refine == "newton":
        xm, m_n = _newton_polish(grid, uh, xm, sign=+1.0)
        xM, M_n = _newton_polish(grid, uh, xM, sign=-1.0)
        m = min(m_n, float(ux[jm]))
        M = max(M_n, float(ux[jM]))
    return m, float(xm), M, float(xM)


# ---------------------------------------------------------------------------
# per-step record
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DiagnosticsRecord:
    t: float
    min_slope: float
    max_slope: float
    int_u: float
    int_rho_bar: float
    l2_u: float
    l1_rho_bar: float
    energy_s2: float
    forcing_bound: float

    CSV_COLUMNS = ("t", "min_slope", "max_slope", "int_u", "int_rho_bar", "l2_u",
                   "energy_s2", "l1_rho_bar", "forcing_bound")

    def row(self) -> list[float]:
        d = asdict(self)
        return [d[c] for c in self.CSV_COLUMNS]

    def is_finite(self) -> bool:
        return all(math.isfinite(v) for v in asdict(self).values())


def conserved_integrals(s: State) -> tuple[float, float]:
    """Spectral quadrature of ``u`` and ``rho_bar`` over one period."""
    return s.grid.integral(s.u), s.grid.integral(s.rho_bar)


def energy_s(s: State, s_index: float) -> float:
    from .dynamics import energy

    return energy(s, s_index)


def forcing_bound(l1_rho0: float, l2_u0: float, t: float) -> float:
    """``||rho_bar_0||_L1 + K1(t)`` with ``K1(t) = ||u_0||_L2 + ||rho_bar_0||_L1 t``."""
    return l1_rho0 + l2_u0 + l1_rho0 * t


def make_record(s: State, l1_rho0: float, l2_u0: float) -> DiagnosticsRecord:
    g = s.grid
    m, _, M, _ = slope_extrema(g, s.u)
    iu, ir = conserved_integrals(s)
    return DiagnosticsRecord(
        t=s.t,
        min_slope=m,
        max_slope=M,
        int_u=iu,
        int_rho_bar=ir,
        l2_u=g.l2_norm(s.u),
        l1_rho_bar=g.l1_norm(s.rho_bar),
        energy_s2=energy_s(s, 2.0),
        forcing_bound=forcing_bound(l1_rho0, l2_u0, s.t),
    )


def fit_energy_riccati_constant(times, energies) -> float:
    """Smallest ``C`` with ``dE/dt <= C (E + E^2)`` on the sampled run."""
    t = np.asarray(times, dtype=float)
    e = np.asarray(energies, dtype=float)
    if t.size < 3:
        return 0.0
    de = np.gradient(e, t)
    den = e + e**2
    ok = den > 0
    if not np.any(ok):
        return 0.0
    return float(max(0.0, np.max(de[ok] / den[ok])))


# ---------------------------------------------------------------------------
# breaking criteria
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BreakingPrediction:
    criterion: str
    satisfied: bool
    breaking_time_upper_bound: float | None
    inputs: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.satisfied != (self.breaking_time_upper_bound is not None):
            raise ValueError("breaking_time_upper_bound must be present iff satisfied")

    def to_dict(self) -> dict:
        return asdict(self)


def check_thm43(s0: State, refine: str = "newton") -> BreakingPrediction:
    """Slope-sum criterion: ``inf u0' + sup u0' <= -2`` with ``||rho_bar_0||_L1 = 1``.

    On success the breaking time is bounded by ``1/|m(0) + 1/2|``.
    """
    g = s0.grid
    if np.min(s0.rho_bar) < 0.0:
        raise NotApplicable("rho_bar_0 must be non-negative")
    l1 = g.l1_norm(s0.rho_bar)
    if abs(l1 - 1.0) > L1_NORMALIZATION_TOL:
        raise NotApplicable(f"||rho_bar_0||_L1 = {l1:.12g}, must equal 1 (use normalize_rho_bar)")
    m, _, M, _ = slope_extrema(g, s0.u, refine=refine)
    pred = thm43_from_slopes(m, M)
    pred.inputs["l1_rho_bar0"] = l1
    return pred


def thm43_from_slopes(m0: float, M0: float) -> BreakingPrediction:
    """Slope-sum criterion evaluated on given initial slopes."""
    ok = m0 + M0 <= -2.0
    bound = 1.0 / abs(m0 + 0.5) if ok else None
    return BreakingPrediction("thm43", bool(ok), bound, {"m0": float(m0), "M0": float(M0)})


def check_thm42(s0: State, eps: float, K2: float, C: float, refine: str = "newton") -> BreakingPrediction:
    """Riccati criterion ``m(0) <= -(1 + eps) J`` with ``J = sqrt(K2 + C)``.

    ``K2`` and ``C`` are the a-priori bounds on ``||rho_bar||_inf`` and
    ``||u_x||_inf`` over the time window; they must be supplied.
    """
    if not eps > 0:
        raise InvalidBounds(f"eps must be positive, got {eps!r}")
    if not K2 + C > 0:
        raise InvalidBounds(f"K2 + C must be positive, got {K2 + C!r}")
    m, _, M, _ = slope_extrema(s0.grid, s0.u, refine=refine)
    return thm42_from_slope(m, eps, K2, C, M0=M)


def thm42_from_slope(m0: float, eps: float, K2: float, C: float, M0: float | None = None) -> BreakingPrediction:
    if not eps > 0:
        raise InvalidBounds(f"eps must be positive, got {eps!r}")
    if not K2 + C > 0:
        raise InvalidBounds(f"K2 + C must be positive, got {K2 + C!r}")
    J = math.sqrt(K2 + C)
    ok = m0 <= -(1.0 + eps) * J
    bound = math.log((m0 - J) / (m0 + J)) / (2.0 * J) if ok else None
    inputs = {"m0": m0, "eps": eps, "K2": K2, "C": C, "K_tilde": J}
    if M0 is not None:
        inputs["M0"] = M0
    return BreakingPrediction("thm42", bool(ok), bound, inputs)


def bootstrap_thm42_bounds(traj: "Trajectory") -> tuple[float, float]:
    """Estimate ``(K2, C)`` from a trial run.

    ``C`` is the largest observed ``||u_x||_inf`` and ``K2`` the growth bound
    ``(||rho_0||_inf + 1) exp(C T)`` over the run length ``T``.
    """
    C = max(max(abs(r.min_slope), abs(r.max_slope)) for r in traj.records)
    s0 = traj.snapshots[0]
    T = traj.records[-1].t
    K2 = (float(np.max(np.abs(s0.rho))) + 1.0) * math.exp(C * T)
    return K2, C


def riccati_blowup_time(m0: float, J: float = 0.0, t_max: float = 1e3) -> float:
    """Blow-up time of ``m' = -m^2 + J^2`` found by integrating ``w = 1/m``.

    ``w' = 1 - J^2 w^2`` is regular through the singularity, so the time of
    ``w = 0`` is located by event detection.  Returns ``inf`` if none.
    """
    if m0 >= -J:
        return math.inf

    def hit(t, w):
        return w[0]

    hit.terminal = True
    hit.direction = 1
    sol = solve_ivp(lambda t, w: [1.0 - J * J * w[0] ** 2], (0.0, t_max), [1.0 / m0],
                    events=hit, rtol=1e-12, atol=1e-14)
    if sol.t_events[0].size:
        return float(sol.t_events[0][0])
    return math.inf


def riccati_comparison(criterion: str, m0: float, t, J: float = 0.0) -> np.ndarray:
    """Closed-form comparison slope ``m(t)`` for the two criteria."""
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        if criterion == "thm43":
            mt0 = m0 + 0.5
            out = mt0 / (1.0 + mt0 * t) - 0.5
            out = np.where(1.0 + mt0 * t > 0, out, -np.inf)
        else:
            th = np.tanh(J * t)
            den = J + m0 * th
            out = np.where(den > 0, J * (m0 + J * th) / den, -np.inf)
    return out


@dataclass
class VerificationReport:
    criterion: str
    satisfied: bool
    breaking_observed: bool
    t_star: float | None
    bound: float | None
    dt: float
    within_bound: bool | None
    times: list = field(default_factory=list)
    observed_min_slope: list = field(default_factory=list)
    comparison_min_slope: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


def empirical_breaking_check(traj: "Trajectory", pred: BreakingPrediction,
                             rel_tol: float = 1e-6) -> VerificationReport:
    """Compare a simulated run with a breaking prediction.

    Breaking is counted when the run ended with a detected blow-up; it is
    "within bound" if ``t* <= bound + 2 dt``.  For unsatisfied predictions
    the outcome is recorded only.
    """
    from .dynamics import Status

    s0 = traj.snapshots[0]
    m0 = pred.inputs.get("m0")
    m_obs, _, _, _ = slope_extrema(s0.grid, s0.u, refine="newton")
    if m0 is None or abs(m_obs - m0) > rel_tol * max(1.0, abs(m0)):
        raise MismatchedInitialData(f"trajectory m(0) = {m_obs!r} does not match prediction m0 = {m0!r}")
    observed = traj.status is Status.BLOWUP
    t_star = traj.t_star if observed else None
    within = None
    if pred.satisfied and observed:
        within = bool(t_star <= pred.breaking_time_upper_bound + 2.0 * traj.dt_initial)
    elif pred.satisfied:
        within = False
    times = [r.t for r in traj.records]
    obs = [r.min_slope for r in traj.records]
    J = pred.inputs.get("K_tilde", 0.0)
    comp = riccati_comparison(pred.criterion, m0, times, J=J)
    return VerificationReport(
        criterion=pred.criterion,
        satisfied=pred.satisfied,
        breaking_observed=observed,
        t_star=t_star,
        bound=pred.breaking_time_upper_bound,
        dt=traj.dt_initial,
        within_bound=within,
        times=times,
        observed_min_slope=obs,
        comparison_min_slope=[float(v) if np.isfinite(v) else None for v in comp],
    )


def normalize_rho_bar(s0: State) -> State:
    """Rescale ``rho_bar_0`` to unit L1 norm.

    This changes the problem being solved: ``u`` and ``rho_bar`` do not
    scale jointly under this map.
    """
    l1 = s0.grid.l1_norm(s0.rho_bar)
    if l1 == 0:
        raise NotApplicable("rho_bar_0 vanishes identically")
    return State(s0.grid, s0.u, s0.rho_bar / l1, s0.t)
