"""Time evolution engines.

Unitary propagation of (time-dependent) sparse Hamiltonians with a midpoint
Lanczos exponential stepper, quantum-jump Monte Carlo trajectories with
norm-threshold jump detection and bisected jump times, a dense master
equation oracle for tiny systems, and Trotter sequencing of alternating
Hamiltonians.

Trajectories reuse a cached no-jump pilot evolution: each trajectory draws
its first norm threshold, and only those that actually jump re-propagate
from the nearest stored checkpoint.  The adaptive step size depends on time
only, so restarted segments re-trace the pilot's grid.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp

from . import _kernels as K
from .errors import (
    DimensionCapError,
    StiffnessBudgetError,
    ZeroNormCollapseError,
)
from .hilbert import BasisSector, SparseOperator, StateVector, block_embed, \
    direct_sum_sectors
from .models import (
    CollapseChannel,
    DriveCoefficient,
    DriveTerm,
    GateEnvelope,
    RampSchedule,
    SampledEnvelope,
    TimeDependentHamiltonian,
    envelope_max,
    envelope_value,
)

DENSE_EIG_CAP = 2048


# ---------------------------------------------------------------------------
# plans and results
# ---------------------------------------------------------------------------

@dataclass
class EvolutionPlan:
    """Time grid and integrator settings for one evolution run."""

    t_start: float
    t_end: float
    n_out: int = 201
    output_times: np.ndarray | None = None
    integrator: str = "krylov-expm"       # or "rk-adaptive"
    krylov_dim: int = 30
    phase_budget: float = 8.0             # target ||H|| dt per step (rad)
    carrier_divisor: float = 20.0         # steps per fastest carrier period
    max_steps: int = 50_000_000
    checkpoint_every: int = 256
    bound_bins: int = 1024
    master_dim_cap: int = 400
    rtol: float = 1e-10

    def __post_init__(self):
        if self.t_end <= self.t_start:
            raise ValueError("t_end must exceed t_start")
        if self.phase_budget <= 0:
            raise ValueError("phase budget must be positive")

    def times(self) -> np.ndarray:
        if self.output_times is not None:
            ts = np.asarray(self.output_times, dtype=float)
            if np.any(np.diff(ts) < 0):
                raise ValueError("output times must be sorted")
            return ts
        return np.linspace(self.t_start, self.t_end, self.n_out)


@dataclass
class EvolutionResult:
    times: np.ndarray
    states: np.ndarray            # (n_out, dim), unnormalized amplitudes
    norms2: np.ndarray
    sector: BasisSector
    n_steps: int = 0

    def state(self, i: int) -> StateVector:
        return StateVector(self.sector, self.states[i])

    def expectation(self, op: SparseOperator | sp.spmatrix,
                    normalized: bool = True) -> np.ndarray:
        mat = op.matrix if isinstance(op, SparseOperator) else op
        vals = np.array([np.vdot(psi, mat @ psi).real for psi in self.states])
        if normalized:
            vals = vals / np.maximum(self.norms2, 1e-300)
        return vals


@dataclass
class TrajectoryResult:
    """Per-time observable statistics across quantum-jump trajectories."""

    times: np.ndarray
    observable_names: tuple[str, ...]
    per_trajectory: np.ndarray    # (n_traj, n_obs, n_out)
    jump_log: list                # (trajectory, time, channel label)
    seed: int
    n_trajectories: int

    @property
    def mean(self) -> np.ndarray:
        return self.per_trajectory.mean(axis=0)

    @property
    def stderr(self) -> np.ndarray:
        n = self.per_trajectory.shape[0]
        if n < 2:
            return np.zeros_like(self.mean)
        return self.per_trajectory.std(axis=0, ddof=1) / np.sqrt(n)

    def series(self, name: str) -> tuple[np.ndarray, np.ndarray]:
        i = self.observable_names.index(name)
        return self.mean[i], self.stderr[i]

    def trajectory_series(self, traj: int, name: str) -> np.ndarray:
        i = self.observable_names.index(name)
        return self.per_trajectory[traj, i]


@dataclass
class MasterResult:
    times: np.ndarray
    rhos: np.ndarray              # (n_out, dim, dim)
    trace_deviation: float
    min_eigenvalue: float

    def expectation(self, op: SparseOperator | sp.spmatrix | np.ndarray
                    ) -> np.ndarray:
        if isinstance(op, SparseOperator):
            mat = op.to_dense()
        elif sp.issparse(op):
            mat = op.toarray()
        else:
            mat = np.asarray(op)
        return np.array([np.trace(mat @ r).real for r in self.rhos])


@dataclass(frozen=True)
class TrotterPlan:
    ham_a: SparseOperator
    ham_b: SparseOperator
    dt: float
    t_total: float
    order: int = 1

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        cycles = self.t_total / (2.0 * self.dt)
        if abs(cycles - round(cycles)) > 1e-9:
            raise ValueError("t_total must be an integer number of cycles")
        if self.order not in (1, 2):
            raise ValueError("order must be 1 or 2")


# ---------------------------------------------------------------------------
# system compilation
# ---------------------------------------------------------------------------

_ENV_CODES = {"const": K.ENV_CONST, "linear": K.ENV_LINEAR,
              "tanh": K.ENV_TANH}


class _EnvTable:
    """Flattens envelope objects into the kernel's parallel arrays."""

    def __init__(self):
        self.kind, self.a, self.b, self.t0, self.dur = [], [], [], [], []
        self.off, self.length = [], []
        self.pool: list[float] = []

    def add(self, env) -> None:
        if isinstance(env, RampSchedule):
            self.kind.append(_ENV_CODES[env.shape])
            self.a.append(env.start)
            self.b.append(env.end)
            self.t0.append(env.t_start)
            self.dur.append(env.duration)
            self.off.append(0)
            self.length.append(0)
        elif isinstance(env, SampledEnvelope):
            self.kind.append(K.ENV_SAMPLED)
            self.a.append(0.0)
            self.b.append(0.0)
            self.t0.append(env.t0)
            self.dur.append(env.dt)
            self.off.append(len(self.pool))
            self.length.append(len(env.values))
            self.pool.extend(float(v) for v in env.values)
        elif isinstance(env, GateEnvelope):
            self.kind.append(K.ENV_GATE)
            self.a.append(env.value)
            self.b.append(float(env.parity))
            self.t0.append(env.t0)
            self.dur.append(env.slice_dt)
            self.off.append(0)
            self.length.append(0)
        elif callable(env):
            raise TypeError("sample callable envelopes with "
                            "SampledEnvelope.from_function first")
        else:
            self.kind.append(K.ENV_CONST)
            self.a.append(float(env))
            self.b.append(0.0)
            self.t0.append(0.0)
            self.dur.append(1.0)
            self.off.append(0)
            self.length.append(0)

    def arrays(self):
        return (np.asarray(self.kind, dtype=np.int64),
                np.asarray(self.a, dtype=np.float64),
                np.asarray(self.b, dtype=np.float64),
                np.asarray(self.t0, dtype=np.float64),
                np.asarray(self.dur, dtype=np.float64),
                np.asarray(self.off, dtype=np.int64),
                np.asarray(self.length, dtype=np.int64))


def _coo_concat(mats: Sequence[sp.spmatrix]):
    rows, cols, vals, off = [], [], [], [0]
    for m in mats:
        c = sp.coo_matrix(m)
        order = np.lexsort((c.col, c.row))
        rows.append(c.row[order])
        cols.append(c.col[order])
        vals.append(c.data[order])
        off.append(off[-1] + c.nnz)
    if mats:
        return (np.concatenate(rows).astype(np.int64),
                np.concatenate(cols).astype(np.int64),
                np.concatenate(vals).astype(np.complex128),
                np.asarray(off, dtype=np.int64))
    return (np.zeros(0, np.int64), np.zeros(0, np.int64),
            np.zeros(0, np.complex128), np.zeros(1, np.int64))


class CompiledSystem:
    """Kernel-ready arrays for one Hamiltonian + collapse-channel set."""

    def __init__(self, ham: TimeDependentHamiltonian,
                 channels: Sequence[CollapseChannel], plan: EvolutionPlan):
        self.ham = ham
        self.channels = tuple(channels)
        self.plan = plan
        self.dim = ham.static.shape[0]

        csr = ham.static.matrix.tocsr()
        csr.sort_indices()
        self.sp_indptr = csr.indptr.astype(np.int64)
        self.sp_indices = csr.indices.astype(np.int64)
        self.sp_data = csr.data.astype(np.complex128)

        drive_env = _EnvTable()
        self.d_omega = np.array([d.coeff.carrier for d in ham.drives],
                                dtype=np.float64)
        self.d_scale = np.array([d.coeff.scale for d in ham.drives],
                                dtype=np.complex128)
        for d in ham.drives:
            drive_env.add(d.coeff.envelope)
        (self.d_env_kind, self.d_env_a, self.d_env_b, self.d_env_t0,
         self.d_env_dur, self.d_env_off, self.d_env_len) = drive_env.arrays()
        self.d_rows, self.d_cols, self.d_vals, self.d_off = _coo_concat(
            [d.op.matrix for d in ham.drives])

        rate_env = _EnvTable()
        kdiags = []
        jump_mats = []
        for ch in channels:
            rate_env.add(ch.rate)
            ctc = (ch.op.matrix.getH() @ ch.op.matrix).tocsr()
            offdiag = ctc - sp.diags(ctc.diagonal())
            if offdiag.nnz and abs(offdiag).max() > 1e-12:
                raise NotImplementedError(
                    "collapse operators must have diagonal C^dag C in this "
                    "basis (lowering-type jump operators)")
            kdiags.append(ctc.diagonal().real)
            jump_mats.append(ch.op.matrix)
        (self.r_kind, self.r_a, self.r_b, self.r_t0, self.r_dur,
         self.r_off, self.r_len) = rate_env.arrays()
        self.kdiag = (np.vstack(kdiags) if kdiags
                      else np.zeros((0, self.dim)))
        self.j_rows, self.j_cols, self.j_vals, self.j_off = _coo_concat(
            jump_mats)
        # shared pool: drive envelopes first, rate envelopes shifted
        pool = drive_env.pool + rate_env.pool
        self.env_pool = np.asarray(pool if pool else [0.0], dtype=np.float64)
        self.r_off = self.r_off + len(drive_env.pool)

        # carrier-resolution step cap
        w_max = float(np.max(np.abs(self.d_omega))) if len(self.d_omega) \
            else 0.0
        self.dt_phase = (2.0 * np.pi / plan.carrier_divisor / w_max
                         if w_max > 0 else np.inf)

        # time-binned norm bound for the Krylov step rule
        t0, t1 = plan.t_start, plan.t_end
        nb = plan.bound_bins
        self.bound_t0 = t0
        self.bound_dt = (t1 - t0) / nb
        static_bound = _row_norm_bound(csr)
        term_bounds = [_row_norm_bound(d.op.matrix) for d in ham.drives]
        edges = np.linspace(t0, t1, nb + 1)
        prof = np.full(nb, static_bound)
        for d, tb in zip(ham.drives, term_bounds):
            amp = np.maximum(
                np.abs([envelope_value(d.coeff.envelope, t) for t in edges[:-1]]),
                np.abs([envelope_value(d.coeff.envelope, t) for t in edges[1:]]))
            if isinstance(d.coeff.envelope, GateEnvelope):
                amp = np.full(nb, abs(d.coeff.envelope.value))
            prof = prof + 2.0 * abs(d.coeff.scale) * amp * tb
        self.bound_vals = prof * 1.05

        gates = [d.coeff.envelope for d in ham.drives
                 if isinstance(d.coeff.envelope, GateEnvelope)]
        self.has_gate = bool(gates)
        self.gate_t0 = gates[0].t0 if gates else 0.0
        self.gate_dur = gates[0].slice_dt if gates else 1.0

    def estimate_steps(self, t0: float, t1: float) -> int:
        nb = len(self.bound_vals)
        dt_bins = self.bound_dt
        total = 0.0
        for i in range(nb):
            b0 = self.bound_t0 + i * dt_bins
            if b0 + dt_bins < t0 or b0 > t1:
                continue
            dt_i = min(self.dt_phase,
                       self.plan.phase_budget / max(self.bound_vals[i], 1e-300))
            total += dt_bins / dt_i
        if self.has_gate:
            total += (t1 - t0) / self.gate_dur
        return int(total) + 16

    def workspace(self):
        m = min(self.plan.krylov_dim, self.dim)
        return (np.zeros((m + 1, self.dim), dtype=np.complex128),
                np.zeros(m), np.zeros(m), np.zeros((m, m)),
                np.zeros(m, dtype=np.complex128),
                np.zeros(self.dim, dtype=np.complex128),
                np.zeros(self.dim, dtype=np.complex128))

    def run(self, psi: np.ndarray, t0: float, t1: float,
            out_times: np.ndarray,
            threshold: float = -1.0, rng_seed: int = 0,
            do_jumps: bool = False, record_trace: bool = False,
            trace_capacity: int = 0, max_jumps: int = 4096):
        n_out = len(out_times)
        out_psi = np.zeros((n_out, self.dim), dtype=np.complex128)
        out_norm2 = np.zeros(n_out)
        out_filled = np.zeros(n_out, dtype=np.int64)
        jump_times = np.zeros(max_jumps)
        jump_channels = np.zeros(max_jumps, dtype=np.int64)
        if record_trace:
            cap = trace_capacity
            n_ck = cap // self.plan.checkpoint_every + 2
        else:
            cap, n_ck = 0, 1
        trace_t = np.zeros(max(cap, 1))
        trace_norm2 = np.zeros(max(cap, 1))
        ckpt_psi = np.zeros((n_ck, self.dim), dtype=np.complex128)
        ckpt_t = np.zeros(n_ck)
        counts = np.zeros(4, dtype=np.int64)
        work = self.workspace()
        m = min(self.plan.krylov_dim, self.dim)
        status = K.run_segment(
            psi, t0, t1, out_times, out_psi, out_norm2, out_filled,
            self.sp_indptr, self.sp_indices, self.sp_data,
            self.d_rows, self.d_cols, self.d_vals, self.d_off,
            self.d_env_kind, self.d_env_a, self.d_env_b, self.d_env_t0,
            self.d_env_dur, self.d_env_off, self.d_env_len, self.env_pool,
            self.d_omega, self.d_scale,
            self.kdiag, self.r_kind, self.r_a, self.r_b, self.r_t0,
            self.r_dur, self.r_off, self.r_len,
            self.j_rows, self.j_cols, self.j_vals, self.j_off,
            self.dt_phase, self.plan.phase_budget,
            self.bound_t0, self.bound_dt, self.bound_vals,
            self.gate_t0, self.gate_dur, self.has_gate,
            m, self.plan.max_steps,
            threshold, rng_seed, do_jumps,
            jump_times, jump_channels,
            trace_t, trace_norm2, ckpt_psi, ckpt_t,
            self.plan.checkpoint_every, record_trace,
            *work, counts)
        if status == K.ERR_ZERO_NORM_COLLAPSE:
            raise ZeroNormCollapseError(
                "all collapse channels have zero rate at a jump event")
        if status == K.ERR_MAX_STEPS:
            raise StiffnessBudgetError(
                f"step cap {self.plan.max_steps} exceeded; consider frequency "
                f"rescaling or a larger phase budget")
        if status == K.ERR_JUMP_OVERFLOW:
            raise RuntimeError("jump record capacity exceeded")
        n_j, n_tr, n_ck_used, n_steps = counts
        return {
            "psi": psi, "out_psi": out_psi, "out_norm2": out_norm2,
            "out_filled": out_filled,
            "jump_times": jump_times[:n_j],
            "jump_channels": jump_channels[:n_j],
            "trace_t": trace_t[:n_tr], "trace_norm2": trace_norm2[:n_tr],
            "ckpt_psi": ckpt_psi[:n_ck_used], "ckpt_t": ckpt_t[:n_ck_used],
            "n_steps": int(n_steps),
        }


def _row_norm_bound(mat: sp.spmatrix) -> float:
    if mat.nnz == 0:
        return 0.0
    a = abs(mat)
    return float(max(a.sum(axis=0).max(), a.sum(axis=1).max()))


# ---------------------------------------------------------------------------
# unitary evolution
# ---------------------------------------------------------------------------

def evolve_unitary(ham: TimeDependentHamiltonian | SparseOperator,
                   psi0: StateVector, plan: EvolutionPlan) -> EvolutionResult:
    """Propagate a pure state; norm is preserved by construction."""
    if isinstance(ham, SparseOperator):
        ham = TimeDependentHamiltonian.wrap(ham)
    sector = psi0.sector
    times = plan.times()
    if ham.is_static() and ham.static.shape[0] <= DENSE_EIG_CAP \
            and plan.integrator == "krylov-expm":
        evals, evecs = np.linalg.eigh(ham.static.to_dense())
        c0 = evecs.conj().T @ psi0.amplitudes
        states = np.empty((len(times), sector.dim), dtype=np.complex128)
        for i, t in enumerate(times):
            states[i] = evecs @ (np.exp(-1j * evals * (t - plan.t_start)) * c0)
        return EvolutionResult(times, states, np.full(len(times),
                               np.linalg.norm(psi0.amplitudes) ** 2), sector)
    if plan.integrator == "rk-adaptive":
        return _evolve_rk(ham, psi0, plan)
    system = CompiledSystem(ham, (), plan)
    est = system.estimate_steps(plan.t_start, plan.t_end)
    if est > plan.max_steps:
        raise StiffnessBudgetError(
            f"estimated {est} steps exceed the cap {plan.max_steps}; "
            f"consider frequency rescaling")
    psi = psi0.amplitudes.copy()
    res = system.run(psi, plan.t_start, plan.t_end, times)
    return EvolutionResult(times, res["out_psi"], res["out_norm2"], sector,
                           res["n_steps"])


def _evolve_rk(ham: TimeDependentHamiltonian, psi0: StateVector,
               plan: EvolutionPlan) -> EvolutionResult:
    from scipy.integrate import solve_ivp
    times = plan.times()
    static = ham.static.matrix
    mats = [d.op.matrix for d in ham.drives]
    dags = [m.getH().tocsr() for m in mats]

    def rhs(t, y):
        out = static @ y
        for d, m_, md in zip(ham.drives, mats, dags):
            c = complex(d.coeff.value(t))
            out = out + c * (m_ @ y) + np.conj(c) * (md @ y)
        return -1j * out

    sol = solve_ivp(rhs, (plan.t_start, plan.t_end), psi0.amplitudes,
                    t_eval=times, rtol=plan.rtol, atol=plan.rtol * 1e-2,
                    method="DOP853")
    states = sol.y.T.astype(np.complex128)
    return EvolutionResult(times, states,
                           np.sum(np.abs(states) ** 2, axis=1), psi0.sector)


# ---------------------------------------------------------------------------
# quantum-jump trajectories
# ---------------------------------------------------------------------------

ObservableSpec = SparseOperator | sp.spmatrix | Callable[[float], sp.spmatrix]


def _observable_matrices(observables: dict[str, ObservableSpec],
                         times: np.ndarray):
    mats = {}
    for name, spec in observables.items():
        if isinstance(spec, SparseOperator):
            mats[name] = [spec.matrix] * len(times)
        elif sp.issparse(spec):
            mats[name] = [spec] * len(times)
        elif isinstance(spec, (list, tuple)):
            if len(spec) != len(times):
                raise ValueError(f"observable {name}: need one matrix per "
                                 f"output time")
            mats[name] = [m.matrix if isinstance(m, SparseOperator) else m
                          for m in spec]
        else:
            mats[name] = [sp.csr_matrix(spec(t)) for t in times]
    return mats


def _expectations(psi_series, norm2_series, mats, names) -> np.ndarray:
    n_obs = len(names)
    n_t = len(norm2_series)
    out = np.zeros((n_obs, n_t))
    for i, name in enumerate(names):
        per_time = mats[name]
        for k in range(n_t):
            psi = psi_series[k]
            nrm2 = norm2_series[k]
            if nrm2 <= 0:
                continue
            out[i, k] = np.vdot(psi, per_time[k] @ psi).real / nrm2
    return out


def n_workers() -> int:
    env = os.environ.get("CAVITYSIM_WORKERS", "")
    if env.strip():
        return max(1, int(env))
    return 1


def evolve_trajectories(ham: TimeDependentHamiltonian | SparseOperator,
                        channels: Sequence[CollapseChannel],
                        psi0: StateVector, plan: EvolutionPlan,
                        n_traj: int, seed: int,
                        observables: dict[str, ObservableSpec]
                        ) -> TrajectoryResult:
    """Monte Carlo wavefunction ensemble with deterministic child seeding.

    Trajectory i draws its thresholds from a child RNG of (seed, i); results
    are bit-reproducible for a fixed plan and trajectory count regardless of
    worker scheduling.
    """
    if isinstance(ham, SparseOperator):
        ham = TimeDependentHamiltonian.wrap(ham)
    if not channels:
        res = evolve_unitary(ham, psi0, plan)
        times = res.times
        mats = _observable_matrices(observables, times)
        names = tuple(observables.keys())
        vals = _expectations(res.states, res.norms2, mats, names)
        per = np.broadcast_to(vals, (n_traj,) + vals.shape).copy()
        return TrajectoryResult(times, names, per, [], seed, n_traj)

    system = CompiledSystem(ham, channels, plan)
    times = plan.times()
    est = system.estimate_steps(plan.t_start, plan.t_end)
    if est > plan.max_steps:
        raise StiffnessBudgetError(
            f"estimated {est} steps exceed the cap {plan.max_steps}")

    # pilot no-jump run with norm trace and checkpoints
    psi = psi0.amplitudes.copy()
    pilot = system.run(psi, plan.t_start, plan.t_end, times,
                       record_trace=True, trace_capacity=int(est * 1.3) + 64)
    mats = _observable_matrices(observables, times)
    names = tuple(observables.keys())
    pilot_vals = _expectations(pilot["out_psi"], pilot["out_norm2"], mats,
                               names)

    per_traj = np.zeros((n_traj, len(names), len(times)))
    jump_log: list[tuple[int, float, str]] = []
    labels = [ch.label or f"channel-{i}" for i, ch in enumerate(channels)]

    args = [(i, seed) for i in range(n_traj)]
    workers = n_workers()
    runner = _TrajectoryRunner(system, psi0.amplitudes, plan, times, pilot,
                               mats, names, pilot_vals)
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(runner, args, chunksize=8))
    else:
        results = [runner(a) for a in args]
    for i, (vals, jumps) in enumerate(results):
        per_traj[i] = vals
        for t_j, c_j in jumps:
            jump_log.append((i, float(t_j), labels[int(c_j)]))
    return TrajectoryResult(times, names, per_traj, jump_log, seed, n_traj)


class _TrajectoryRunner:
    """Callable executing one trajectory; picklable for worker pools."""

    def __init__(self, system, psi0, plan, times, pilot, mats, names,
                 pilot_vals):
        self.system = system
        self.psi0 = psi0
        self.plan = plan
        self.times = times
        self.pilot = pilot
        self.mats = mats
        self.names = names
        self.pilot_vals = pilot_vals

    def __call__(self, arg):
        i, seed = arg
        ss = np.random.SeedSequence(entropy=seed, spawn_key=(i,))
        rng = np.random.Generator(np.random.PCG64(ss))
        r1 = rng.random()
        kernel_seed = int(ss.generate_state(1)[0] % np.uint32(2 ** 31 - 1))
        trace = self.pilot["trace_norm2"]
        below = trace < r1
        if not np.any(below):
            return self.pilot_vals.copy(), []
        hit = int(np.argmax(below))
        # restart from the last checkpoint at or before the crossing step start
        t_step_start = (self.pilot["trace_t"][hit - 1] if hit > 0
                        else self.plan.t_start)
        ck_t = self.pilot["ckpt_t"]
        k = max(int(np.searchsorted(ck_t, t_step_start, side="right") - 1), 0)
        psi = self.pilot["ckpt_psi"][k].copy()
        t0 = ck_t[k]
        res = self.system.run(psi, t0, self.plan.t_end, self.times,
                              threshold=r1, rng_seed=kernel_seed,
                              do_jumps=True)
        filled = res["out_filled"].astype(bool)
        psi_series = res["out_psi"]
        norm2 = res["out_norm2"].copy()
        # outputs before the restart come from the shared pilot evolution
        psi_full = psi_series.copy()
        psi_full[~filled] = self.pilot["out_psi"][~filled]
        norm2[~filled] = self.pilot["out_norm2"][~filled]
        vals = _expectations(psi_full, norm2, self.mats, self.names)
        jumps = list(zip(res["jump_times"], res["jump_channels"]))
        return vals, jumps


# ---------------------------------------------------------------------------
# dense master equation oracle
# ---------------------------------------------------------------------------

def evolve_master(ham: TimeDependentHamiltonian | SparseOperator,
                  channels: Sequence[CollapseChannel],
                  rho0: np.ndarray | StateVector, plan: EvolutionPlan
                  ) -> MasterResult:
    """Dense Lindblad integration for small systems (correctness oracle)."""
    from scipy.integrate import solve_ivp
    if isinstance(ham, SparseOperator):
        ham = TimeDependentHamiltonian.wrap(ham)
    dim = ham.static.shape[0]
    if dim > plan.master_dim_cap:
        raise DimensionCapError(
            f"dimension {dim} exceeds the dense master-equation cap "
            f"{plan.master_dim_cap}")
    if isinstance(rho0, StateVector):
        v = rho0.amplitudes
        rho0 = np.outer(v, v.conj())
    rho0 = np.asarray(rho0, dtype=np.complex128)

    h_static = ham.static.to_dense()
    drive_mats = [d.op.to_dense() for d in ham.drives]
    c_mats = [ch.op.to_dense() for ch in channels]
    ctc = [m.conj().T @ m for m in c_mats]

    def rhs(t, y):
        rho = y.reshape(dim, dim)
        h = h_static
        for d, m in zip(ham.drives, drive_mats):
            c = complex(d.coeff.value(t))
            h = h + c * m + np.conj(c) * m.conj().T
        drho = -1j * (h @ rho - rho @ h)
        for ch, cm, cc in zip(channels, c_mats, ctc):
            rate = ch.rate_value(t)
            if rate == 0.0:
                continue
            drho = drho + rate * (cm @ rho @ cm.conj().T
                                  - 0.5 * (cc @ rho + rho @ cc))
        return drho.ravel()

    times = plan.times()
    sol = solve_ivp(rhs, (plan.t_start, plan.t_end), rho0.ravel(),
                    t_eval=times, rtol=plan.rtol, atol=plan.rtol * 1e-2,
                    method="DOP853")
    rhos = sol.y.T.reshape(len(times), dim, dim)
    traces = np.array([np.trace(r).real for r in rhos])
    min_eig = min(float(np.linalg.eigvalsh((r + r.conj().T) / 2)[0])
                  for r in rhos[:: max(1, len(rhos) // 8)])
    return MasterResult(times, rhos, float(np.max(np.abs(traces - 1.0))),
                        min_eig)


# ---------------------------------------------------------------------------
# Trotter sequencing
# ---------------------------------------------------------------------------

def trotter_evolve(tplan: TrotterPlan, psi0: StateVector,
                   n_out_cycles: int | None = None
                   ) -> EvolutionResult:
    """Alternate exact slice propagators of two static Hamiltonians."""
    ea, va = np.linalg.eigh(tplan.ham_a.to_dense())
    eb, vb = np.linalg.eigh(tplan.ham_b.to_dense())

    def apply(vmat, evals, tau, vec):
        return vmat @ (np.exp(-1j * evals * tau) * (vmat.conj().T @ vec))

    n_cycles = int(round(tplan.t_total / (2.0 * tplan.dt)))
    stride = max(1, n_cycles // (n_out_cycles or n_cycles))
    psi = psi0.amplitudes.copy()
    times = [0.0]
    states = [psi.copy()]
    for c in range(1, n_cycles + 1):
        if tplan.order == 1:
            psi = apply(va, ea, tplan.dt, psi)
            psi = apply(vb, eb, tplan.dt, psi)
        else:
            psi = apply(va, ea, tplan.dt / 2.0, psi)
            psi = apply(vb, eb, tplan.dt, psi)
            psi = apply(va, ea, tplan.dt / 2.0, psi)
        if c % stride == 0 or c == n_cycles:
            times.append(2.0 * tplan.dt * c)
            states.append(psi.copy())
    states = np.array(states)
    return EvolutionResult(np.array(times), states,
                           np.sum(np.abs(states) ** 2, axis=1), psi0.sector)


# ---------------------------------------------------------------------------
# adiabatic polariton-to-atom mapping
# ---------------------------------------------------------------------------

@dataclass
class AdiabaticMapResult:
    final_state: StateVector
    transfer_fidelity: float
    adiabaticity_margin: float
    result: EvolutionResult


def adiabatic_map(params, lattice, sector: BasisSector, psi0: StateVector,
                  plan: EvolutionPlan) -> AdiabaticMapResult:
    """Ramp the drive to zero, mapping dark polaritons onto level-2 atoms.

    Reports the population left in pure atomic level-2 configurations and the
    worst-case adiabaticity margin max_t [g Omega'(t) / B(t)^2] / min|mu_pm|.
    """
    from .models import build_eit_array

    ham, _ = build_eit_array(params, lattice, sector)
    res = evolve_unitary(ham, psi0, plan)
    # projector onto photon = n3 = n4 = 0
    mask = np.ones(sector.dim, dtype=bool)
    for site in range(lattice.n_sites):
        mask &= (sector.occupations(site, "a") == 0)
        mask &= (sector.occupations(site, "n3") == 0)
        mask &= (sector.occupations(site, "n4") == 0)
    psi_f = res.states[-1] / np.sqrt(max(res.norms2[-1], 1e-300))
    fidelity = float(np.sum(np.abs(psi_f[mask]) ** 2))

    g = params.g
    ts = np.linspace(plan.t_start, plan.t_end, 1025)
    omegas = np.array([float(envelope_value(params.omega, t)) for t in ts])
    dod = np.gradient(omegas, ts)
    margin = 0.0
    for om, od in zip(omegas, dod):
        b2 = g * g + om * om
        from .effective import polariton_transform
        pb = polariton_transform(params, om)
        mu_min = min(abs(pb.mu_plus), abs(pb.mu_minus))
        if mu_min > 0:
            margin = max(margin, g * abs(od) / b2 / mu_min)
    return AdiabaticMapResult(StateVector(sector, psi_f), fidelity, margin,
                              res)


# ---------------------------------------------------------------------------
# sector-ladder assembly for dissipative number-conserving models
# ---------------------------------------------------------------------------

@dataclass
class LadderModel:
    """Direct sum of fixed-weight sectors with cross-sector jump operators."""

    combined: BasisSector
    slices: list
    sectors: list
    hamiltonian: TimeDependentHamiltonian
    channels: list


def assemble_ladder(sectors: Sequence[BasisSector],
                    ham_builder: Callable[[BasisSector],
                                          TimeDependentHamiltonian],
                    channel_builder: Callable[[BasisSector, BasisSector],
                                              Sequence[CollapseChannel]]
                    ) -> LadderModel:
    """Stack sectors N, N-1, ... with decay channels connecting neighbours.

    ``ham_builder`` must produce the same drive-term list on every sector.
    """
    combined, slices = direct_sum_sectors(sectors)
    hams = [ham_builder(s) for s in sectors]
    static = SparseOperator.zeros(combined, hermitian=True)
    for h, sl in zip(hams, slices):
        static = static + block_embed(h.static, combined, sl, sl)
    drives = []
    n_drives = len(hams[0].drives)
    for m in range(n_drives):
        op = SparseOperator.zeros(combined)
        for h, sl in zip(hams, slices):
            op = op + block_embed(h.drives[m].op, combined, sl, sl)
        drives.append(DriveTerm(op, hams[0].drives[m].coeff))
    channels = []
    for upper in range(len(sectors) - 1):
        chs = channel_builder(sectors[upper], sectors[upper + 1])
        for ch in chs:
            channels.append(CollapseChannel(
                block_embed(ch.op, combined, slices[upper],
                            slices[upper + 1]),
                ch.rate, ch.label))
    return LadderModel(combined, list(slices), list(sectors),
                       TimeDependentHamiltonian(static, drives), channels)


def ladder_observable(model: LadderModel,
                      op_builder: Callable[[BasisSector], SparseOperator]
                      ) -> SparseOperator:
    out = SparseOperator.zeros(model.combined)
    for s, sl in zip(model.sectors, model.slices):
        out = out + block_embed(op_builder(s), model.combined, sl, sl)
    return out


def embed_top_state(model: LadderModel, psi: StateVector) -> StateVector:
    amps = np.zeros(model.combined.dim, dtype=np.complex128)
    amps[model.slices[0]] = psi.amplitudes
    return StateVector(model.combined, amps)
