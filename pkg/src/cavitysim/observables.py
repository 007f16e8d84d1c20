"""Diagnostic quantities: site statistics, visibility, entanglement, profiles.

Fluctuations from trajectory ensembles combine the quantum and trajectory
variance, F = mean<n^2> - (mean<n>)^2, which is what a master-equation F
would give; per-trajectory F series remain available for single-trajectory
panels.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .dynamics import EvolutionResult, MasterResult, TrajectoryResult
from .errors import GridMismatchError
from .hilbert import BasisSector, SparseOperator, StateVector


# ---------------------------------------------------------------------------
# site occupation statistics
# ---------------------------------------------------------------------------

@dataclass
class SiteStatistics:
    times: np.ndarray
    occupation: np.ndarray       # (n_sites, n_t)
    fluctuation: np.ndarray      # (n_sites, n_t)
    occupation_err: np.ndarray | None = None
    fluctuation_err: np.ndarray | None = None

    def site(self, l: int) -> tuple[np.ndarray, np.ndarray]:
        return self.occupation[l], self.fluctuation[l]


def counting_observables(counters: Sequence[SparseOperator],
                         prefix: str = "n") -> dict:
    """Named <n> and <n^2> observables for the trajectory engine."""
    obs = {}
    for l, op in enumerate(counters):
        obs[f"{prefix}{l}"] = op
        obs[f"{prefix}sq{l}"] = op @ op
    return obs


def counting_observables_td(counter_fns, times, prefix: str = "n") -> dict:
    """Time-dependent counters: one matrix per output time."""
    obs = {}
    for l, fn in enumerate(counter_fns):
        mats = [fn(t) for t in times]
        matsq = [m @ m for m in mats]
        obs[f"{prefix}{l}"] = lambda t, _m=dict(zip(times, mats)): _m[t]
        obs[f"{prefix}sq{l}"] = lambda t, _m=dict(zip(times, matsq)): _m[t]
    return obs


def site_statistics(source, counters: Sequence[SparseOperator] | None = None,
                    prefix: str = "n") -> SiteStatistics:
    """Mean occupation n_l and fluctuation F_l = <n_l^2> - <n_l>^2.

    ``source`` may be a StateVector, EvolutionResult, MasterResult, or
    TrajectoryResult (the latter must have been run with the observables from
    :func:`counting_observables`).
    """
    if isinstance(source, TrajectoryResult):
        n_sites = sum(1 for name in source.observable_names
                      if name.startswith(prefix)
                      and not name.startswith(f"{prefix}sq"))
        occ = np.zeros((n_sites, len(source.times)))
        fluc = np.zeros_like(occ)
        occ_err = np.zeros_like(occ)
        fluc_err = np.zeros_like(occ)
        for l in range(n_sites):
            n_mean, n_err = source.series(f"{prefix}{l}")
            nsq_mean, nsq_err = source.series(f"{prefix}sq{l}")
            occ[l] = n_mean
            fluc[l] = nsq_mean - n_mean ** 2
            occ_err[l] = n_err
            fluc_err[l] = np.sqrt(nsq_err ** 2 + (2 * n_mean * n_err) ** 2)
        return SiteStatistics(source.times, occ, fluc, occ_err, fluc_err)

    if counters is None:
        raise ValueError("counters required for state/density-matrix input")
    if isinstance(source, StateVector):
        psi = source.amplitudes
        occ = np.array([[np.vdot(psi, c.matrix @ psi).real] for c in counters])
        fl = np.array([[np.vdot(psi, (c.matrix @ (c.matrix @ psi))).real]
                       for c in counters]) - occ ** 2
        return SiteStatistics(np.zeros(1), occ, fl)
    if isinstance(source, EvolutionResult):
        occ = np.vstack([source.expectation(c) for c in counters])
        sq = np.vstack([source.expectation(c.matrix @ c.matrix)
                        for c in counters])
        return SiteStatistics(source.times, occ, sq - occ ** 2)
    if isinstance(source, MasterResult):
        occ = np.vstack([source.expectation(c) for c in counters])
        sq = np.vstack([source.expectation((c.matrix @ c.matrix).toarray())
                        for c in counters])
        return SiteStatistics(source.times, occ, sq - occ ** 2)
    raise TypeError(f"unsupported source {type(source)!r}")


def single_trajectory_statistics(traj: TrajectoryResult, trajectory: int,
                                 n_sites: int, prefix: str = "n"
                                 ) -> SiteStatistics:
    """Quantum statistics along one unravelled trajectory."""
    occ = np.vstack([traj.trajectory_series(trajectory, f"{prefix}{l}")
                     for l in range(n_sites)])
    sq = np.vstack([traj.trajectory_series(trajectory, f"{prefix}sq{l}")
                    for l in range(n_sites)])
    return SiteStatistics(traj.times, occ, sq - occ ** 2)


@dataclass
class EffectiveComparison:
    times: np.ndarray
    delta_occupation: np.ndarray
    delta_fluctuation: np.ndarray

    def max_abs(self, site: int) -> tuple[float, float]:
        return (float(np.max(np.abs(self.delta_occupation[site]))),
                float(np.max(np.abs(self.delta_fluctuation[site]))))


def compare_effective(full: SiteStatistics, effective: SiteStatistics
                      ) -> EffectiveComparison:
    """Pointwise differences delta n_l, delta F_l on a shared time grid."""
    if full.times.shape != effective.times.shape or \
            not np.allclose(full.times, effective.times, rtol=1e-12, atol=0.0):
        raise GridMismatchError("time grids differ")
    return EffectiveComparison(full.times,
                               full.occupation - effective.occupation,
                               full.fluctuation - effective.fluctuation)


# ---------------------------------------------------------------------------
# momentum-space visibility
# ---------------------------------------------------------------------------

@dataclass
class VisibilityReport:
    k_values: np.ndarray
    s_of_k: np.ndarray
    visibility: float


def momentum_visibility(correlations: np.ndarray, n_sites: int | None = None
                        ) -> VisibilityReport:
    """S(k) = (1/L) sum_jl exp(2 pi i (j-l)/L) <a_j^dag a_l> and its contrast."""
    c = np.asarray(correlations, dtype=np.complex128)
    if np.max(np.abs(c - c.conj().T)) > 1e-10 * max(np.max(np.abs(c)), 1.0):
        raise ValueError("correlation matrix must be hermitian")
    L = n_sites or c.shape[0]
    ms = np.arange(L)
    s = np.empty(L)
    js = np.arange(L)
    for m in ms:
        phase = np.exp(2j * np.pi * m * js / L)
        s[m] = (phase.conj() @ c @ phase).real / L
    smax, smin = float(np.max(s)), float(np.min(s))
    v = (smax - smin) / (smax + smin) if smax + smin != 0 else 0.0
    return VisibilityReport(2.0 * np.pi * ms / L, s, v)


def one_body_correlations(state: StateVector, annihilators:
                          Sequence[SparseOperator]) -> np.ndarray:
    """<a_j^dag a_l> matrix from embedded mode operators."""
    psi = state.amplitudes
    applied = [op.matrix @ psi for op in annihilators]
    L = len(annihilators)
    corr = np.empty((L, L), dtype=np.complex128)
    for j in range(L):
        for l in range(L):
            corr[j, l] = np.vdot(applied[j], applied[l])
    return corr


# ---------------------------------------------------------------------------
# entanglement
# ---------------------------------------------------------------------------

@dataclass
class EntanglementReport:
    entropy: float               # von Neumann, natural log
    entropy_log2: float
    purity: float
    schmidt_values: np.ndarray


def entanglement(state: np.ndarray | StateVector, dims: Sequence[int],
                 block: Sequence[int]) -> EntanglementReport:
    """Schmidt-based entropy and purity of a site bipartition of a pure state.

    ``dims`` are per-site local dimensions of a product space; ``block``
    lists the site indices forming the first subsystem.
    """
    psi = state.amplitudes if isinstance(state, StateVector) else state
    psi = np.asarray(psi, dtype=np.complex128)
    psi = psi / np.linalg.norm(psi)
    n_sites = len(dims)
    block = sorted(block)
    rest = [i for i in range(n_sites) if i not in block]
    tens = psi.reshape(dims)
    tens = np.transpose(tens, block + rest)
    da = int(np.prod([dims[i] for i in block]))
    db = int(np.prod([dims[i] for i in rest])) if rest else 1
    svals = np.linalg.svd(tens.reshape(da, db), compute_uv=False)
    p = svals ** 2
    p = p[p > 1e-300]
    entropy = float(-np.sum(p * np.log(p)))
    purity = float(np.sum(p ** 2))
    return EntanglementReport(entropy, entropy / np.log(2.0), purity, svals)


def reduced_density(psi: np.ndarray, dims: Sequence[int],
                    keep: Sequence[int]) -> np.ndarray:
    """Partial trace of a pure product-space state down to ``keep`` sites."""
    psi = np.asarray(psi, dtype=np.complex128)
    keep = sorted(keep)
    rest = [i for i in range(len(dims)) if i not in keep]
    tens = psi.reshape(dims)
    tens = np.transpose(tens, keep + rest)
    da = int(np.prod([dims[i] for i in keep]))
    db = int(np.prod([dims[i] for i in rest])) if rest else 1
    m = tens.reshape(da, db)
    return m @ m.conj().T


def matrix_entropy(rho: np.ndarray) -> float:
    """Von Neumann entropy (natural log) of a density matrix."""
    w = np.linalg.eigvalsh((rho + rho.conj().T) / 2.0)
    w = w[w > 1e-300]
    return float(-np.sum(w * np.log(w)))


def sector_to_product(state: StateVector) -> tuple[np.ndarray, list[int]]:
    """Embed a sector state into the full product space (small systems only).

    Site-local dimensions follow each site's admissible config list, so
    shared-cap constraints keep the product dimensions modest.
    """
    sector = state.sector
    local_configs = [s.configs() for s in sector.spaces]
    dims = [len(c) for c in local_configs]
    index_maps = [{c: i for i, c in enumerate(cfgs)} for cfgs in local_configs]
    full = np.zeros(int(np.prod(dims)), dtype=np.complex128)
    for amp, cfg in zip(state.amplitudes, sector.configs):
        idx = 0
        for site, imap in enumerate(index_maps):
            idx = idx * dims[site] + imap[sector.site_config(cfg, site)]
        full[idx] = amp
    return full, dims


# ---------------------------------------------------------------------------
# density profiles
# ---------------------------------------------------------------------------

def density_profile(source: EvolutionResult | MasterResult,
                    counters: Sequence[SparseOperator]) -> np.ndarray:
    """Matrix (time x site) of mean occupations."""
    return np.vstack([source.expectation(c) for c in counters]).T


# ---------------------------------------------------------------------------
# dominant-frequency extraction
# ---------------------------------------------------------------------------

def fit_dominant_frequency(times: np.ndarray, signal: np.ndarray,
                           omega_range: tuple[float, float] | None = None,
                           n_scan: int = 600) -> tuple[float, float]:
    """Angular frequency of the dominant oscillation of a real series.

    Least-squares fit of a + b cos(w t) + c sin(w t) over a scanned frequency
    grid followed by a golden-section refinement; robust down to roughly one
    oscillation period.  Returns (omega, fitted amplitude).
    """
    t = np.asarray(times, dtype=float)
    y = np.asarray(signal, dtype=float)
    span = t[-1] - t[0]
    if omega_range is None:
        omega_range = (2.0 * np.pi / span * 0.25, np.pi / np.mean(np.diff(t)))

    def residual(w):
        basis = np.column_stack([np.ones_like(t), np.cos(w * t),
                                 np.sin(w * t)])
        coef, res, _, _ = np.linalg.lstsq(basis, y, rcond=None)
        r = y - basis @ coef
        return float(r @ r), coef

    ws = np.linspace(omega_range[0], omega_range[1], n_scan)
    costs = np.array([residual(w)[0] for w in ws])
    k = int(np.argmin(costs))
    lo = ws[max(k - 1, 0)]
    hi = ws[min(k + 1, len(ws) - 1)]
    gr = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - gr * (b - a)
    d = a + gr * (b - a)
    fc, _ = residual(c)
    fd, _ = residual(d)
    for _ in range(80):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - gr * (b - a)
            fc, _ = residual(c)
        else:
            a, c, fc = c, d, fd
            d = a + gr * (b - a)
            fd, _ = residual(d)
    w_best = 0.5 * (a + b)
    _, coef = residual(w_best)
    return w_best, float(np.hypot(coef[1], coef[2]))
