"""Even 2*pi-periodic travelling waves and their bifurcation branch.

A profile is stored by its cosine coefficients,

    phi(y) = a_0 / 2 + sum_{k=1}^{M} a_k cos(k y),

and solves the fixed-point equation

    F(c, phi) = phi - phi^2/(2c) + (1/2c) e^{-|y|} * (cA/(phi - c) - phi) + A/c = 0.

On a 2*pi-periodic even function the convolution with ``e^{-|y|}`` acts on
the cosine coefficients by multiplication with ``2 / (1 + k^2)``.  The
surface variable follows from ``psi = cA / (phi - c)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import NoConvergence, SingularityGuard
from .spectral import Field, Grid

GUARD_MARGIN = 1e-8
DEFAULT_MODES = 32


def kernel_coefficient(k) -> np.ndarray | float:
    """Cosine coefficient ``2/(1+k^2)`` of the periodised kernel ``e^{-|y|}``."""
    k = np.asarray(k, dtype=float)
    out = 2.0 / (1.0 + k * k)
    return float(out) if out.ndim == 0 else out


def periodized_kernel(y, images: int = 30) -> np.ndarray:
    """``A(y) = sum_{|j| <= images} exp(-|y + 2 pi j|)``."""
    y = np.asarray(y, dtype=float)
    j = np.arange(-images, images + 1)
    return np.exp(-np.abs(np.add.outer(y, 2.0 * np.pi * j))).sum(axis=-1)


def periodized_kernel_coefficient(k: int, images: int = 30, nodes: int = 200) -> float:
    """Brute-force ``int_{-pi}^{pi} A(y) cos(k y) dy`` by direct periodisation.

    ``A`` has a corner at ``y = 0`` only, so the even integrand is folded
    onto ``[0, pi]`` where Gauss-Legendre quadrature converges rapidly.
    """
    xg, wg = np.polynomial.legendre.leggauss(nodes)
    y = 0.5 * np.pi * (xg + 1.0)
    w = 0.5 * np.pi * wg
    return float(2.0 * np.sum(w * periodized_kernel(y, images) * np.cos(k * y)))


def bifurcation_point(A: float) -> float:
    """Speed ``c*`` at which mode 1 enters the kernel: ``2 c*^2 = A + c*``."""
    if A < 0:
        raise ValueError(f"A must be non-negative, got {A!r}")
    return 0.25 + math.sqrt((8.0 * A + 1.0) / 16.0)


def constant_solution_threshold(A: float) -> float:
    return 0.5 + math.sqrt(A + 0.25)


def linearized_multiplier(k, c: float, A: float):
    """Fourier symbol ``1 - (A + c)/(c^2 (1 + k^2))`` of ``dF/dphi`` at ``phi = 0``."""
    if not c > 0:
        raise ValueError(f"c must be positive, got {c!r}")
    k = np.asarray(k, dtype=float)
    out = 1.0 - (A + c) / (c * c * (1.0 + k * k))
    return float(out) if out.ndim == 0 else out


def w_norm(coeffs) -> float:
    """l1 coefficient norm ``|a_0|/2 + sum |a_k|`` (the sup-bounding norm)."""
    a = np.asarray(coeffs, dtype=float)
    return float(0.5 * abs(a[0]) + np.sum(np.abs(a[1:])))


@dataclass(frozen=True)
class WaveProblem:
    A: float
    c: float = 1.0
    n_modes: int = DEFAULT_MODES

    def __post_init__(self):
        if not self.A >= 0:
            raise ValueError(f"A must be non-negative, got {self.A!r}")
        if not self.c > 0:
            raise ValueError(f"c must be positive, got {self.c!r}")
        if self.n_modes < 8:
            raise ValueError(f"n_modes must be >= 8, got {self.n_modes!r}")

    @property
    def c_star(self) -> float:
        return bifurcation_point(self.A)


@dataclass
class WaveSolution:
    coeffs: np.ndarray
    c: float
    A: float
    residual_norm: float = float("nan")
    iterations: int = 0

    @property
    def s(self) -> float:
        return float(self.coeffs[1])

    @property
    def n_modes(self) -> int:
        return self.coeffs.size - 1

    def phi(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        k = np.arange(self.coeffs.size)
        cos = np.cos(np.multiply.outer(y, k))
        w = self.coeffs.copy()
        w[0] *= 0.5
        return cos @ w

    def psi(self, y) -> np.ndarray:
        ph = self.phi(y)
        _check_guard(ph, self.c)
        return self.c * self.A / (ph - self.c)


def trivial_solution(problem: WaveProblem, c: float | None = None) -> WaveSolution:
    return WaveSolution(np.zeros(problem.n_modes + 1), problem.c if c is None else c, problem.A, 0.0)


def _check_guard(phi_values: np.ndarray, c: float):
    top = float(np.max(phi_values))
    if top >= c - GUARD_MARGIN:
        raise SingularityGuard(f"max phi = {top:.12g} reaches the pole at c = {c:.12g}")


class _Collocation:
    """Synthesis/projection matrices between cosine coefficients and samples."""

    _cache: dict = {}

    def __new__(cls, n_modes: int):
        obj = cls._cache.get(n_modes)
        if obj is None:
            obj = super().__new__(cls)
            q = 4 * (n_modes + 1)
            y = 2.0 * np.pi * np.arange(q) / q
            cos = np.cos(np.multiply.outer(y, np.arange(n_modes + 1)))
            obj.y = y
            obj.synth = cos.copy()
            obj.synth[:, 0] *= 0.5
            obj.proj = (2.0 / q) * cos.T
            obj.kernel = kernel_coefficient(np.arange(n_modes + 1))
            cls._cache[n_modes] = obj
        return obj


def _unit_constant(n: int) -> np.ndarray:
    e = np.zeros(n + 1)
    e[0] = 2.0  # coefficient vector of the constant function 1
    return e


def residual_coeffs(coeffs: np.ndarray, c: float, A: float) -> np.ndarray:
    """Cosine coefficients of ``F(c, phi)``; oversampled 4x for the rational term."""
    a = np.asarray(coeffs, dtype=float)
    n = a.size - 1
    col = _Collocation(n)
    ph = col.synth @ a
    _check_guard(ph, c)
    quad = col.proj @ (ph * ph)
    rat = col.proj @ (c * A / (ph - c) - ph)
    return a - quad / (2.0 * c) + col.kernel * rat / (2.0 * c) + (A / c) * _unit_constant(n)


def residual_F(sol: WaveSolution, problem: WaveProblem | None = None) -> np.ndarray:
    A = sol.A if problem is None else problem.A
    return residual_coeffs(sol.coeffs, sol.c, A)


def jacobian_analytic(coeffs: np.ndarray, c: float, A: float) -> tuple[np.ndarray, np.ndarray]:
    """``(dF/da, dF/dc)`` from the exact linearisation about ``(c, phi)``."""
    a = np.asarray(coeffs, dtype=float)
    n = a.size - 1
    col = _Collocation(n)
    ph = col.synth @ a
    _check_guard(ph, c)
    d = ph - c
    w_quad = -ph / c
    w_conv = (-c * A / d**2 - 1.0) / (2.0 * c)
    Ja = np.eye(n + 1) + col.proj @ (w_quad[:, None] * col.synth)
    Ja += col.kernel[:, None] * (col.proj @ (w_conv[:, None] * col.synth))
    dc = col.proj @ (ph * ph) / (2.0 * c * c)
    dc += col.kernel * (col.proj @ (0.5 * A / d**2 + ph / (2.0 * c * c)))
    dc -= (A / (c * c)) * _unit_constant(n)
    return Ja, dc


def jacobian_fd(coeffs: np.ndarray, c: float, A: float, h: float = 1e-7) -> tuple[np.ndarray, np.ndarray]:
    """Central finite-difference counterpart of :func:`jacobian_analytic`."""
    a = np.asarray(coeffs, dtype=float)
    n = a.size - 1
    Ja = np.empty((n + 1, n + 1))
    for j in range(n + 1):
        e = np.zeros(n + 1)
        e[j] = h
        Ja[:, j] = (residual_coeffs(a + e, c, A) - residual_coeffs(a - e, c, A)) / (2 * h)
    dc = (residual_coeffs(a, c + h, A) - residual_coeffs(a, c - h, A)) / (2 * h)
    return Ja, dc


def newton_solve(guess: WaveSolution, problem: WaveProblem, constraint: str = "fix_speed",
                 s: float | None = None, tol: float = 1e-10, max_iter: int = 50,
                 max_halvings: int = 30, jacobian: str = "analytic") -> WaveSolution:
    """Damped Newton iteration for ``F(c, phi) = 0``.

    ``constraint="fix_speed"`` keeps ``c`` fixed; ``"fix_amplitude"`` pins
    ``a_1 = s`` and solves for ``c`` instead.  Convergence is declared when
    the W-norm of the residual drops below ``tol``.
    """
    A = problem.A
    n = problem.n_modes
    a = np.zeros(n + 1)
    m = min(n, guess.coeffs.size - 1)
    a[: m + 1] = guess.coeffs[: m + 1]
    c = float(guess.c)
    if constraint == "fix_amplitude":
        if s is None:
            s = float(a[1])
        a[1] = s
    elif constraint != "fix_speed":
        raise ValueError(f"unknown constraint {constraint!r}")
    jac = jacobian_analytic if jacobian == "analytic" else jacobian_fd

    F = residual_coeffs(a, c, A)
    res = w_norm(F)
    free = np.array([j for j in range(n + 1) if not (constraint == "fix_amplitude" and j == 1)])
    for it in range(1, max_iter + 1):
        if res < tol:
            return WaveSolution(a, c, A, res, it - 1)
        Ja, dc = jac(a, c, A)
        if constraint == "fix_speed":
            delta = np.linalg.solve(Ja, -F)
            da, dcc = delta, 0.0
        else:
            mat = np.column_stack([Ja[:, free], dc])
            sol = np.linalg.solve(mat, -F)
            da = np.zeros(n + 1)
            da[free] = sol[:-1]
            dcc = float(sol[-1])
        lam = 1.0
        for _ in range(max_halvings + 1):
            a_try = a + lam * da
            c_try = c + lam * dcc
            try:
                F_try = residual_coeffs(a_try, c_try, A) if c_try > 0 else None
            except SingularityGuard:
                F_try = None
            if F_try is not None and (w_norm(F_try) < res or w_norm(F_try) < tol):
                break
            lam *= 0.5
        else:
            raise NoConvergence(f"line search failed at iteration {it}", it, res)
        a, c, F = a_try, c_try, F_try
        res = w_norm(F)
    if res < tol:
        return WaveSolution(a, c, A, res, max_iter)
    raise NoConvergence(f"no convergence after {max_iter} iterations (residual {res:.3e})", max_iter, res)


@dataclass
class WaveBranch:
    A: float
    s: list = field(default_factory=list)
    c: list = field(default_factory=list)
    coeffs: list = field(default_factory=list)
    residuals: list = field(default_factory=list)
    error: str | None = None

    def solutions(self) -> list[WaveSolution]:
        return [WaveSolution(np.asarray(a), c, self.A, r) for a, c, r in zip(self.coeffs, self.c, self.residuals)]

    def tangency_ratio(self) -> np.ndarray:
        """``||phi_s - s cos y||_W / |s|`` for each nonzero ``s``."""
        out = []
        for s, a in zip(self.s, self.coeffs):
            if s == 0:
                out.append(0.0)
                continue
            d = np.array(a, dtype=float)
            d[1] -= s
            out.append(w_norm(d) / abs(s))
        return np.array(out)

    def __len__(self):
        return len(self.s)


def continue_branch(problem: WaveProblem, s_values, tol: float = 1e-10) -> WaveBranch:
    """Natural-parameter continuation in the amplitude ``s = a_1``.

    Each step is predicted by linear extrapolation from the two previous
    solutions (``s cos y`` at ``c*`` for the first) and corrected by Newton
    with the amplitude pinned.  The branch is truncated at the first failure.
    """
    s_values = [float(v) for v in s_values]
    diffs = np.diff(s_values)
    if diffs.size and not (np.all(diffs > 0) or np.all(diffs < 0)):
        raise ValueError("s_values must be strictly monotone")
    br = WaveBranch(problem.A)
    n = problem.n_modes
    cs = problem.c_star
    hist: list[tuple[float, np.ndarray, float]] = [(0.0, np.zeros(n + 1), cs)]
    for s in s_values:
        if s == 0.0:
            sol = trivial_solution(problem, cs)
        else:
            if len(hist) >= 2:
                (s0, a0, c0), (s1, a1, c1) = hist[-2], hist[-1]
                r = (s - s1) / (s1 - s0)
                a_guess = a1 + r * (a1 - a0)
                c_guess = c1 + r * (c1 - c0)
            else:
                a_guess = np.zeros(n + 1)
                c_guess = cs
            a_guess = a_guess.copy()
            a_guess[1] = s
            try:
                sol = newton_solve(WaveSolution(a_guess, c_guess, problem.A), problem,
                                   constraint="fix_amplitude", s=s, tol=tol)
            except (NoConvergence, SingularityGuard) as exc:
                br.error = f"s={s}: {exc}"
                break
        br.s.append(s)
        br.c.append(sol.c)
        br.coeffs.append(sol.coeffs.copy())
        br.residuals.append(sol.residual_norm)
        if s != 0.0:
            hist.append((s, sol.coeffs.copy(), sol.c))
    return br


def reconstruct_psi(sol: WaveSolution, grid: Grid | None = None) -> Field:
    """``psi = cA / (phi - c)`` sampled on ``grid`` (default ``N = 256`` on ``[-pi, pi)``)."""
    if grid is None:
        grid = Grid(np.pi, 256)
    return Field(grid, sol.psi(grid.x))


def psi_equation_residual(sol: WaveSolution, grid: Grid | None = None) -> float:
    """Max of ``|-c psi_y + (phi psi)_y|`` evaluated spectrally."""
    if grid is None:
        grid = Grid(np.pi, 256)
    ph = sol.phi(grid.x)
    ps = sol.psi(grid.x)
    r = -sol.c * grid.dx_op(ps) + grid.dx_op(ph * ps)
    return float(np.max(np.abs(r)))


def wave_initial_state(sol: WaveSolution, grid: Grid):
    from .state import State

    if not np.isclose(grid.half_period, np.pi):
        raise ValueError("travelling waves are 2*pi-periodic; use a grid with half_period = pi")
    return State(grid, sol.phi(grid.x), sol.psi(grid.x))


@dataclass
class WaveValidation:
    times: np.ndarray
    errors: np.ndarray
    status: str
    psi_min: float
    psi_max: float

    @property
    def max_error(self) -> float:
        return float(np.max(self.errors))


def validate_wave_series(sol: WaveSolution, t_end: float | None = None, n_points: int = 256,
                         dt: float = 1e-3, stride: int = 100) -> WaveValidation:
    """Evolve ``(phi, psi)`` in time and measure departure from rigid translation."""
    from .dynamics import SimConfig, simulate

    grid = Grid(np.pi, n_points)
    s0 = wave_initial_state(sol, grid)
    if t_end is None:
        t_end = 2.0 * np.pi / sol.c
    traj = simulate(s0, SimConfig(dt=dt, t_end=t_end, stride=stride))
    t = traj.times
    err = np.array([grid.l2_norm(s.u - grid.shift(s0.u, sol.c * s.t)) for s in traj.snapshots])
    return WaveValidation(t, err, traj.status.value, float(np.min(s0.rho_bar)), float(np.max(s0.rho_bar)))


def validate_wave_in_time(sol: WaveSolution, problem: WaveProblem | None = None, t_end: float | None = None,
                          n_points: int = 256, dt: float = 1e-3) -> float:
    """Largest L2 distance between ``u(t)`` and ``phi(. - c t)`` over the checkpoints."""
    return validate_wave_series(sol, t_end, n_points, dt).max_error
