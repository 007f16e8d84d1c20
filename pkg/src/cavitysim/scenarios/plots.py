"""Quicklook figure rendering for scenario reports.

Figures are a convenience layer over the CSV output; the delimited files
remain the deterministic record.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .runner import ScenarioResult, Table  # noqa: E402


def _save(fig, path: Path) -> Path:
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path


def _col(table: Table, name: str) -> np.ndarray:
    return table.rows[:, table.columns.index(name)]


def render(result: ScenarioResult, out: Path) -> list[Path]:
    fn = _RENDERERS.get(result.kind)
    if fn is None:
        return []
    return fn(result, out)


def _render_vardiff4(result: ScenarioResult, out: Path) -> list[Path]:
    t = result.table("vardiff4_timeseries")
    ts = _col(t, "t_s") * 1e6
    fig, axes = plt.subplots(2, 2, figsize=(9, 6))
    axes[0, 0].semilogy(ts, np.abs(_col(t, "u_per_s")), label="U")
    axes[0, 0].semilogy(ts, _col(t, "j_per_s"), label="J")
    axes[0, 0].set_xlabel("t (us)")
    axes[0, 0].set_ylabel("rate (1/s)")
    axes[0, 0].legend()
    axes[0, 1].plot(ts, _col(t, "f0_single_traj_full"))
    axes[0, 1].set_xlabel("t (us)")
    axes[0, 1].set_ylabel("F1 single trajectory")
    axes[1, 0].plot(ts, _col(t, "df0"), label="ensemble")
    axes[1, 0].plot(ts, _col(t, "f0_single_traj_full")
                    - _col(t, "f0_single_traj_bh"), alpha=0.6,
                    label="single trajectory")
    axes[1, 0].set_xlabel("t (us)")
    axes[1, 0].set_ylabel("dF1")
    axes[1, 0].legend()
    axes[1, 1].plot(ts, _col(t, "n0_bh"), label="n1")
    axes[1, 1].plot(ts, _col(t, "f0_bh"), label="F1")
    axes[1, 1].set_xlabel("t (us)")
    axes[1, 1].set_ylabel("effective model")
    axes[1, 1].legend()
    return [_save(fig, out / "vardiff4.png")]


def _render_photon_mott(result: ScenarioResult, out: Path) -> list[Path]:
    t = result.table("photon_mott_timeseries")
    ts = _col(t, "t_s") * 1e6
    fig, axes = plt.subplots(1, 2, figsize=(9, 3.2))
    axes[0].plot(ts, _col(t, "n0"))
    axes[0].set_xlabel("t (us)")
    axes[0].set_ylabel("photon number n1")
    axes[1].plot(ts, _col(t, "f0"))
    axes[1].set_xlabel("t (us)")
    axes[1].set_ylabel("fluctuation F1")
    return [_save(fig, out / "photon_mott.png")]


def _render_jc(result: ScenarioResult, out: Path) -> list[Path]:
    t = result.table("jc_fluctuations")
    fig, ax = plt.subplots(figsize=(5, 3.4))
    ax.semilogx(_col(t, "detuning_over_g"), _col(t, "f_mid"), "o-")
    ax.set_xlabel("detuning / g")
    ax.set_ylabel("number fluctuation F")
    return [_save(fig, out / "jc_fluctuations.png")]


def _render_grid(name: str, value_col: str, label: str):
    def renderer(result: ScenarioResult, out: Path) -> list[Path]:
        t = result.table(name)
        hop = _col(t, "hopping_per_s")
        mu = _col(t, "mu_per_s")
        val = _col(t, value_col)
        nh = len(np.unique(hop))
        nm = len(np.unique(mu))
        fig, ax = plt.subplots(figsize=(5.4, 4))
        pm = ax.pcolormesh(hop.reshape(nh, nm), mu.reshape(nh, nm),
                           val.reshape(nh, nm), shading="nearest")
        fig.colorbar(pm, ax=ax, label=label)
        ax.set_xlabel("hopping (1/s)")
        ax.set_ylabel("mu (1/s)")
        return [_save(fig, out / f"{name}.png")]

    return renderer


def _render_spin_run2(result: ScenarioResult, out: Path) -> list[Path]:
    t = result.table("spin_run2_timeseries")
    ts = _col(t, "t_s") * 1e6
    fig, axes = plt.subplots(1, 2, figsize=(9, 3.2))
    axes[0].plot(ts, _col(t, "p_a1_full"), label="full model")
    axes[0].plot(ts, _col(t, "p_dn1_effective"), "--", label="effective XYZ")
    axes[0].set_xlabel("t (us)")
    axes[0].set_ylabel("p(a1)")
    axes[0].legend()
    axes[1].semilogy(ts, np.maximum(_col(t, "max_e_occupation"), 1e-9),
                     label="excited")
    axes[1].semilogy(ts, np.maximum(_col(t, "max_photon_occupation"), 1e-9),
                     label="photon")
    axes[1].axhline(0.03, color="k", lw=0.8, ls=":")
    axes[1].set_xlabel("t (us)")
    axes[1].set_ylabel("occupation")
    axes[1].legend()
    return [_save(fig, out / "spin_run2.png")]


def _render_cluster(result: ScenarioResult, out: Path) -> list[Path]:
    t = result.table("cluster_zz_timeseries")
    ts = _col(t, "t_s") * 1e6
    fig, axes = plt.subplots(1, 2, figsize=(9, 3.2))
    axes[0].plot(ts, _col(t, "evn_effective") / np.log(2), label="effective")
    axes[0].plot(ts, _col(t, "evn_full") / np.log(2), "--", label="full")
    axes[0].set_xlabel("t (us)")
    axes[0].set_ylabel("E_vN / ln 2")
    axes[0].legend()
    axes[1].plot(ts, _col(t, "purity_spin_block"))
    axes[1].set_xlabel("t (us)")
    axes[1].set_ylabel("spin-block purity")
    return [_save(fig, out / "cluster_zz.png")]


def _render_glass(result: ScenarioResult, out: Path) -> list[Path]:
    t = result.table("glass_stats_curve")
    fig, ax = plt.subplots(figsize=(5.2, 3.4))
    means = _col(t, "mean_n")
    for nbar in np.unique(means):
        m = means == nbar
        ax.plot(_col(t, "delta_n")[m], _col(t, "rel_std")[m], "-",
                label=f"<N> = {int(nbar)}")
    ax.axhline(0.25 / np.sqrt(3), color="k", ls="--", lw=0.8,
               label="eps = 0.25")
    ax.set_xscale("log")
    ax.set_xlabel("delta N")
    ax.set_ylabel("std(U) / <U>")
    ax.legend()
    return [_save(fig, out / "glass_stats.png")]


def _render_migration(result: ScenarioResult, out: Path) -> list[Path]:
    t = result.table("migration_profile")
    ts = _col(t, "t")
    n_sites = sum(1 for c in t.columns if c.startswith("n")
                  and c[1:].isdigit())
    prof = np.column_stack([_col(t, f"n{l}") for l in range(n_sites)])
    fig, axes = plt.subplots(1, 2, figsize=(9, 3.2))
    pm = axes[0].pcolormesh(np.arange(n_sites), ts, prof, shading="nearest")
    fig.colorbar(pm, ax=axes[0], label="density")
    axes[0].set_xlabel("site")
    axes[0].set_ylabel("t")
    axes[1].plot(ts, _col(t, "mott_total"), label="Mott region")
    axes[1].plot(ts, _col(t, "sf_total"), label="superfluid region")
    axes[1].set_xlabel("t")
    axes[1].set_ylabel("total occupation")
    axes[1].legend()
    return [_save(fig, out / "migration.png")]


_RENDERERS = {
    "vardiff4": _render_vardiff4,
    "photon-mott": _render_photon_mott,
    "jc-fluctuations": _render_jc,
    "meanfield-lobes": _render_grid("meanfield_grid", "psi_abs", "|Psi|"),
    "density-plateaus": _render_grid("density_grid", "rho_exact", "rho"),
    "spin-run2": _render_spin_run2,
    "cluster-zz": _render_cluster,
    "glass-stats": _render_glass,
    "migration": _render_migration,
}
