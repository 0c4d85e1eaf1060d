"""Figure rendering for the CLI report paths.

Every function writes a PNG next to the CSV/JSON artifacts and returns the
path.  The Agg backend is forced so no display is needed.
"""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .io import atomic_write_bytes  # noqa: E402

# Fixed metadata keeps repeated runs byte-identical.
_PNG_META = {"Software": None}

STYLE = {
    "figure.figsize": (7.0, 4.3),
    "figure.dpi": 100,
    "axes.grid": True,
    "grid.linewidth": 0.4,
    "grid.color": "0.85",
    "axes.spines.top": False,
    "axes.spines.right": False,
    "font.size": 10,
    "legend.frameon": False,
    "lines.linewidth": 1.3,
}


def _save(fig, path) -> Path:
    import io

    path = Path(path)
    buf = io.BytesIO()
    fig.savefig(buf, format="png", metadata=_PNG_META, bbox_inches="tight")
    plt.close(fig)
    atomic_write_bytes(path, buf.getvalue())
    return path


def plot_snapshots(traj, path, max_curves: int = 6) -> Path:
    snaps = traj.snapshots
    idx = np.unique(np.linspace(0, len(snaps) - 1, min(max_curves, len(snaps))).astype(int))
    cmap = plt.get_cmap("viridis")
    with plt.rc_context(STYLE):
        fig, (ax_u, ax_r) = plt.subplots(2, 1, sharex=True, figsize=(7.0, 5.5))
        for n, i in enumerate(idx):
            s = snaps[i]
            col = cmap(n / max(1, len(idx) - 1))
            ax_u.plot(s.grid.x, s.u, color=col, label=f"t = {s.t:.3g}")
            ax_r.plot(s.grid.x, s.rho_bar, color=col)
        ax_u.set_ylabel("u")
        ax_r.set_ylabel(r"$\bar\rho$")
        ax_r.set_xlabel("x")
        ax_u.legend(fontsize=8, ncol=2)
        return _save(fig, path)


def plot_diagnostics(traj, path) -> Path:
    recs = traj.records
    t = np.array([r.t for r in recs])
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(2, 2, figsize=(9.0, 6.0), sharex=True)
        axes[0, 0].plot(t, [r.min_slope for r in recs], label="inf u_x")
        axes[0, 0].plot(t, [r.max_slope for r in recs], label="sup u_x")
        axes[0, 0].set_ylabel("slope")
        axes[0, 0].legend()
        iu0, ir0 = recs[0].int_u, recs[0].int_rho_bar
        axes[0, 1].plot(t, [r.int_u - iu0 for r in recs], label=r"$\Delta\int u$")
        axes[0, 1].plot(t, [r.int_rho_bar - ir0 for r in recs], label=r"$\Delta\int\bar\rho$")
        axes[0, 1].set_ylabel("integral drift")
        axes[0, 1].legend()
        axes[1, 0].plot(t, [r.l2_u for r in recs], label=r"$\|u\|_{L^2}$")
        axes[1, 0].plot(t, [recs[0].l2_u + recs[0].l1_rho_bar * tt for tt in t], "--", label="growth bound")
        axes[1, 0].set_ylabel("L2 norm")
        axes[1, 0].set_xlabel("t")
        axes[1, 0].legend()
        axes[1, 1].semilogy(t, [max(r.energy_s2, 1e-300) for r in recs])
        axes[1, 1].set_ylabel(r"$E^2$")
        axes[1, 1].set_xlabel("t")
        fig.suptitle(f"status: {traj.status.value}", fontsize=10)
        return _save(fig, path)


def plot_paths(bundle, path) -> Path:
    with plt.rc_context(STYLE):
        fig, (ax_q, ax_j) = plt.subplots(1, 2, figsize=(9.0, 4.0))
        ax_q.plot(bundle.q, bundle.times, color="k", linewidth=0.6)
        ax_q.set_xlabel("q (unwrapped)")
        ax_q.set_ylabel("t")
        dev = bundle.gamma * bundle.qx - bundle.gamma[0]
        ax_j.plot(bundle.times, np.max(np.abs(dev), axis=1))
        ax_j.set_yscale("symlog", linthresh=1e-16)
        ax_j.set_xlabel("t")
        ax_j.set_ylabel(r"max $|\bar\rho(t,q)\,q_x - \bar\rho_0|$")
        return _save(fig, path)


def plot_branch(branch, path) -> Path:
    with plt.rc_context(STYLE):
        fig, (ax_c, ax_p) = plt.subplots(1, 2, figsize=(9.0, 4.0))
        ax_c.plot(branch.s, branch.c, "o-", markersize=3)
        ax_c.set_xlabel("amplitude s")
        ax_c.set_ylabel("speed c")
        y = np.linspace(-np.pi, np.pi, 401)
        sols = branch.solutions()
        pick = sols if len(sols) <= 5 else [sols[i] for i in np.linspace(0, len(sols) - 1, 5).astype(int)]
        for sol in pick:
            ax_p.plot(y, sol.phi(y), label=f"s = {sol.s:.3g}")
        ax_p.set_xlabel("y")
        ax_p.set_ylabel(r"$\phi$")
        ax_p.legend(fontsize=8)
        return _save(fig, path)


def plot_breaking(report, path) -> Path:
    t = np.asarray(report.times)
    obs = np.asarray(report.observed_min_slope, dtype=float)
    comp = np.array([np.nan if v is None else v for v in report.comparison_min_slope], dtype=float)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        ax.plot(t, obs, label="observed inf u_x")
        ax.plot(t, comp, "--", label="Riccati comparison")
        if report.bound is not None:
            ax.axvline(report.bound, color="r", linewidth=0.8, label="predicted bound")
        ax.set_yscale("symlog", linthresh=1.0)
        ax.set_xlabel("t")
        ax.set_ylabel("slope")
        ax.legend()
        return _save(fig, path)
