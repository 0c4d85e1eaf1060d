"""Quick internal consistency suite used by ``fw selftest``."""
from __future__ import annotations

import time

import numpy as np

from . import waves
from .dynamics import SimConfig, simulate
from .spectral import Grid
from .state import State


def _multipliers(rng) -> tuple[bool, str]:
    g = Grid(np.pi, 256)
    worst = 0.0
    for n in range(g.n_points // 2):
        k = n
        c = np.cos(k * g.x)
        s = np.sin(k * g.x)
        a = k / (1 + k * k)
        worst = max(worst, np.max(np.abs(g.nonlocal_op(c) + a * s)), np.max(np.abs(g.nonlocal_op(s) - a * c)))
        worst = max(worst, np.max(np.abs(g.helmholtz_inverse_op(c) - c / (1 + k * k))))
        worst = max(worst, np.max(np.abs(g.second_helmholtz_op(c) + k * k / (1 + k * k) * c)))
    f = rng.standard_normal(g.n_points)
    ident = np.max(np.abs(g.second_helmholtz_op(f) - (g.helmholtz_inverse_op(f) - f)))
    ok = worst < 1e-12 and ident < 1e-12
    return ok, f"max symbol error {worst:.2e}, identity error {ident:.2e}"


def _conservation(rng) -> tuple[bool, str]:
    g = Grid(np.pi, 128)
    x = g.x
    amp = 0.05 + 0.05 * rng.random()
    s0 = State(g, amp * np.sin(x + rng.random()), 1.0 + amp * np.cos(2 * x))
    tr = simulate(s0, SimConfig(dt=2e-3, t_end=0.5, stride=50))
    r0, r1 = tr.records[0], tr.records[-1]
    du, dr = abs(r1.int_u - r0.int_u), abs(r1.int_rho_bar - r0.int_rho_bar)
    return du < 1e-8 and dr < 1e-8, f"|d int u| = {du:.2e}, |d int rho_bar| = {dr:.2e}"


def _dispersion(rng) -> tuple[bool, str]:
    A = 10.0 * rng.random(100)
    worst_m = worst_q = worst_f = 0.0
    for a in A:
        cs = waves.bifurcation_point(a)
        worst_m = max(worst_m, abs(waves.linearized_multiplier(1, cs, a)))
        worst_q = max(worst_q, abs(2 * cs * cs - a - cs))
    for c, a in zip(0.1 + 5 * rng.random(100), 10 * rng.random(100)):
        worst_f = max(worst_f, float(np.max(np.abs(waves.residual_coeffs(np.zeros(17), c, a)))))
    ok = worst_m < 1e-12 and worst_q < 1e-14 and worst_f < 1e-13
    return ok, f"multiplier {worst_m:.1e}, quadratic {worst_q:.1e}, F(c,0) {worst_f:.1e}"


SUITES = {
    "multipliers": _multipliers,
    "conservation": _conservation,
    "dispersion": _dispersion,
}


def run(seed: int = 0, echo=print) -> bool:
    rng = np.random.default_rng(seed)
    all_ok = True
    for name, fn in SUITES.items():
        t0 = time.perf_counter()
        ok, msg = fn(rng)
        all_ok &= ok
        echo(f"[{'PASS' if ok else 'FAIL'}] {name}: {msg} ({time.perf_counter() - t0:.2f}s)")
    return all_ok
