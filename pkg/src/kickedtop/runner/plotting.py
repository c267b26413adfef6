"""Optional SVG figures for result tables; data files never depend on them."""

from __future__ import annotations

import numpy as np

from ..errors import ConfigError


def _pyplot():
    try:
        import matplotlib
    except ImportError as exc:
        raise ConfigError("plotting needs matplotlib (pip install 'artifact[plot]')") from exc
    matplotlib.use("svg")
    import matplotlib.pyplot as plt
    return plt


def plot_table(table, kind: str, path: str):
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    cols = table.columns
    if kind == "phase-space":
        for w in np.unique(table.column("w"))[:1]:
            sel = table.column("w") == w
            theta, phi = table.column("theta")[sel], table.column("phi")[sel]
            nt, nf = np.unique(theta).size, np.unique(phi).size
            z = table.column("S_1_time_avg")[sel].reshape(nt, nf)
            mesh = ax.pcolormesh(np.unique(phi), np.unique(theta), z, shading="nearest")
            fig.colorbar(mesh, ax=ax, label="time-averaged S_1")
            ax.set_xlabel("phi")
            ax.set_ylabel("theta")
    elif kind == "spacing-stats":
        sel = table.column("w") == table.column("w")[0]
        lo, hi = table.column("s_lo")[sel], table.column("s_hi")[sel]
        ax.bar(lo, table.column("density")[sel], width=hi - lo, align="edge", alpha=0.5)
        c = 0.5 * (lo + hi)
        ax.plot(c, table.column("poisson")[sel], label="Poisson")
        ax.plot(c, table.column("coe")[sel], label="COE")
        ax.set_xlabel("s")
        ax.legend()
    else:
        x_name = "n" if "n" in cols else cols[0]
        y_name = next(c for c in cols if c not in ("N", "w", "theta0", "phi0", x_name))
        ax.plot(table.column(x_name), table.column(y_name), ".", ms=2)
        ax.set_xlabel(x_name)
        ax.set_ylabel(y_name)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
