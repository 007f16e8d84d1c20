"""Sparse Hamiltonians and collapse channels for every supported model family.

Builders are pure functions of their parameter sets: the same inputs produce
bit-identical sparse matrices.  Time-dependent models are returned as a
static part plus drive terms ``c(t) A + c*(t) A^dag`` with explicit carrier
frequencies, so integrators can bound the fastest oscillation present.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from . import hilbert as hb
from .errors import FrameError, WeightMismatchError
from .hilbert import (
    BasisSector,
    LatticeSpec,
    LocalSpace,
    SparseOperator,
    boson_annihilate,
    boson_create,
    boson_number,
    dicke_lower_bare,
    dicke_raise_bare,
    dicke_transition,
    embed_operator,
    embed_product,
    level_projector,
    level_transition,
)

TWO_PI = 2.0 * math.pi


# ---------------------------------------------------------------------------
# schedules and drive coefficients
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RampSchedule:
    """Monotone ramp between two values; evaluation clamps to the endpoints."""

    start: float
    end: float
    duration: float
    shape: str = "linear"
    t_start: float = 0.0

    def __post_init__(self):
        if self.duration <= 0:
            raise ValueError("ramp duration must be > 0")
        if self.shape not in ("linear", "tanh"):
            raise ValueError(f"unknown ramp shape {self.shape!r}")

    def value(self, t):
        x = np.clip((np.asarray(t, dtype=float) - self.t_start) / self.duration,
                    0.0, 1.0)
        if self.shape == "linear":
            s = x
        else:
            a = 2.5
            s = (np.tanh(a * (2 * x - 1)) + np.tanh(a)) / (2 * np.tanh(a))
        return self.start + (self.end - self.start) * s

    def rate_bound(self) -> float:
        """Upper bound on |d value/dt|."""
        span = abs(self.end - self.start) / self.duration
        return span if self.shape == "linear" else 2.5 * span

    @property
    def max_abs(self) -> float:
        return max(abs(self.start), abs(self.end))


@dataclass(frozen=True, eq=False)
class SampledEnvelope:
    """Uniform-grid samples with linear interpolation, clamped outside."""

    t0: float
    dt: float
    values: np.ndarray

    def value(self, t):
        x = (np.asarray(t, dtype=float) - self.t0) / self.dt
        return np.interp(x, np.arange(len(self.values)), self.values)

    @staticmethod
    def from_function(fn, t0: float, t1: float, n: int = 4097
                      ) -> "SampledEnvelope":
        ts = np.linspace(t0, t1, n)
        return SampledEnvelope(t0, ts[1] - ts[0],
                               np.array([float(fn(t)) for t in ts]))


@dataclass(frozen=True)
class GateEnvelope:
    """Square-wave gating: ``value`` during slices of the given parity.

    Slice k covers [t0 + k dt, t0 + (k+1) dt); parity 0 gates even slices.
    Used to alternate drive-laser sets in Trotter sequences.
    """

    value: float
    t0: float
    slice_dt: float
    parity: int = 0

    def value_at(self, t):
        if t < self.t0:
            return 0.0
        k = int((t - self.t0) / self.slice_dt)
        return self.value if k % 2 == self.parity else 0.0


Envelope = float | RampSchedule | SampledEnvelope | GateEnvelope \
    | Callable[[float], float]


def envelope_value(env: Envelope, t):
    if isinstance(env, (RampSchedule, SampledEnvelope)):
        return env.value(t)
    if isinstance(env, GateEnvelope):
        return env.value_at(t)
    if callable(env):
        return env(t)
    return env


def envelope_max(env: Envelope, t0: float, t1: float) -> float:
    if isinstance(env, RampSchedule):
        return env.max_abs
    if isinstance(env, SampledEnvelope):
        return float(np.max(np.abs(env.values)))
    if isinstance(env, GateEnvelope):
        return abs(env.value)
    if callable(env):
        ts = np.linspace(t0, t1, 257)
        return float(np.max(np.abs([env(t) for t in ts])))
    return abs(env)


def envelope_rate_bound(env: Envelope, t0: float, t1: float) -> float:
    if isinstance(env, RampSchedule):
        return env.rate_bound()
    if isinstance(env, SampledEnvelope):
        return float(np.max(np.abs(np.diff(env.values))) / env.dt)
    if isinstance(env, GateEnvelope):
        return 0.0
    if callable(env):
        ts = np.linspace(t0, t1, 513)
        vs = np.array([env(t) for t in ts])
        return float(np.max(np.abs(np.diff(vs))) / (ts[1] - ts[0]))
    return 0.0


@dataclass(frozen=True)
class DriveCoefficient:
    """Complex scalar coefficient  scale * envelope(t) * exp(i carrier t)."""

    envelope: Envelope = 1.0
    carrier: float = 0.0
    scale: complex = 1.0

    def value(self, t) -> complex:
        return (self.scale * envelope_value(self.envelope, t)
                * np.exp(1j * self.carrier * np.asarray(t, dtype=float)))

    def max_abs(self, t0: float, t1: float) -> float:
        return abs(self.scale) * envelope_max(self.envelope, t0, t1)


@dataclass(frozen=True)
class DriveTerm:
    op: SparseOperator
    coeff: DriveCoefficient


class TimeDependentHamiltonian:
    """Static hermitian part plus drive terms c(t) A + c*(t) A^dag."""

    def __init__(self, static: SparseOperator, drives: Sequence[DriveTerm] = ()):
        self.static = static
        self.drives = tuple(drives)
        self.sector = static.domain

    def __call__(self, t: float) -> SparseOperator:
        mat = self.static.matrix.copy()
        for term in self.drives:
            c = complex(term.coeff.value(t))
            mat = mat + c * term.op.matrix + np.conj(c) * term.op.matrix.getH()
        return SparseOperator(self.sector, self.sector, mat)

    def max_carrier(self) -> float:
        return max((abs(t.coeff.carrier) for t in self.drives), default=0.0)

    def is_static(self) -> bool:
        return not self.drives

    @staticmethod
    def wrap(op: SparseOperator) -> "TimeDependentHamiltonian":
        return TimeDependentHamiltonian(op, ())


@dataclass(frozen=True)
class CollapseChannel:
    """Dissipation channel; the jump operator at time t is sqrt(rate(t)) op."""

    op: SparseOperator
    rate: Envelope
    label: str = ""

    def rate_value(self, t: float) -> float:
        return float(envelope_value(self.rate, t))

    def op_at(self, t: float) -> SparseOperator:
        return float(np.sqrt(self.rate_value(t))) * self.op


# ---------------------------------------------------------------------------
# parameter sets (tagged union of model families)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EITParams:
    """Microscopic constants of the driven four-level scheme, all in s^-1."""

    g13: float
    g24: float
    omega: Envelope            # Rabi frequency of the driving laser
    delta: float = 0.0         # one-photon detuning of level 3
    Delta: float = 0.0         # detuning of level 4
    epsilon: float = 0.0       # two-photon detuning of level 2
    n_atoms: int = 1
    omega_c: float = 0.0
    j_c: float = 0.0           # photon tunnelling 2 omega_c alpha
    kappa: float = 0.0
    gamma3: float = 0.0
    gamma4: float = 0.0

    @staticmethod
    def with_alpha(alpha: float, omega_c: float, **kw) -> "EITParams":
        return EITParams(omega_c=omega_c, j_c=2.0 * omega_c * alpha, **kw)

    def at_omega(self, omega: float) -> "EITParams":
        return replace(self, omega=float(omega))

    @property
    def g(self) -> float:
        return math.sqrt(self.n_atoms) * self.g13


@dataclass(frozen=True)
class JCLatticeParams:
    omega_c: float
    detuning: float            # Delta = omega_0 - omega_c
    g: float
    hopping: float             # photon tunnelling J (enters with minus sign)
    kappa: float = 0.0
    gamma: float = 0.0
    atoms_per_cavity: int = 1

    @property
    def omega_0(self) -> float:
        return self.omega_c + self.detuning


@dataclass(frozen=True)
class BHRegion:
    sites: tuple[int, ...]
    mu: float
    hopping: float
    interaction: float


@dataclass(frozen=True)
class BHParams:
    mu: float = 0.0
    hopping: float = 0.0
    interaction: float = 0.0
    regions: tuple[BHRegion, ...] = ()
    inter_hopping: float = 0.0

    def site_params(self, site: int) -> tuple[float, float]:
        for r in self.regions:
            if site in r.sites:
                return r.mu, r.interaction
        return self.mu, self.interaction

    def edge_hopping(self, i: int, j: int) -> float:
        if not self.regions:
            return self.hopping
        ri = [k for k, r in enumerate(self.regions) if i in r.sites]
        rj = [k for k, r in enumerate(self.regions) if j in r.sites]
        if ri and rj:
            return self.regions[ri[0]].hopping if ri == rj else self.inter_hopping
        return self.hopping


@dataclass(frozen=True)
class TwoCompBHParams:
    mu_b: float
    mu_c: float
    u_b: float
    u_c: float
    u_bc: float
    j_bb: float
    j_cc: float
    j_bc: float


@dataclass(frozen=True)
class KerrParams:
    interaction: float = 0.0     # photonic U
    loss: float = 0.0            # effective Gamma
    hopping: float = 0.0
    # microscopic Lambda-scheme constants (validation builder)
    g: float = 0.0
    lambda_raman: float = 0.0
    delta1: float = 0.0
    delta2: float = 0.0
    n_atoms: int = 1


@dataclass(frozen=True)
class SpinDriveParams:
    """Microscopic constants for the driven Lambda-atom spin schemes (s^-1)."""

    omega_e: float
    omega_ab: float
    g_a: float
    g_b: float
    omega_c: float
    j_c: float
    # xy stage lasers
    omega_laser_a: float = 0.0
    omega_laser_b: float = 0.0
    rabi_a: float = 0.0
    rabi_b: float = 0.0
    # zz stage lasers
    omega_laser_zz: float = 0.0
    nu_laser: float = 0.0
    rabi_zz_a: float = 0.0
    rabi_zz_b: float = 0.0
    lambda_a: float = 0.0
    lambda_b: float = 0.0
    gamma_e: float = 0.0
    gamma_c: float = 0.0

    @property
    def delta1(self) -> float:
        """Two-photon offset of the xy lasers from the bare splitting."""
        return self.omega_ab - (self.omega_laser_a - self.omega_laser_b) / 2.0

    # xy-stage detunings
    @property
    def det_a(self) -> float:
        return self.omega_e - self.omega_laser_a

    @property
    def det_b(self) -> float:
        return self.omega_e - self.omega_laser_b - (self.omega_ab - self.delta1)

    @property
    def det_cav_a(self) -> float:
        return self.omega_e - self.omega_c

    @property
    def det_cav_b(self) -> float:
        return self.omega_e - self.omega_c - (self.omega_ab - self.delta1)

    # zz-stage detunings
    @property
    def det_zz_a(self) -> float:
        return self.omega_e - self.omega_laser_zz

    @property
    def det_zz_b(self) -> float:
        return self.omega_e - self.omega_laser_zz - self.omega_ab

    @property
    def det_nu_a(self) -> float:
        return self.omega_e - self.nu_laser

    @property
    def det_nu_b(self) -> float:
        return self.omega_e - self.nu_laser - self.omega_ab

    @property
    def det_cav_zz_b(self) -> float:
        return self.omega_e - self.omega_c - self.omega_ab

    @staticmethod
    def from_detunings(omega_e, omega_ab, det_a, delta1, omega_c, j_c, **kw
                       ) -> "SpinDriveParams":
        """Resolve laser frequencies from (det_a, delta1) as quoted in figures."""
        wa = omega_e - det_a
        wb = wa - 2.0 * (omega_ab - delta1)
        return SpinDriveParams(omega_e=omega_e, omega_ab=omega_ab,
                               omega_laser_a=wa, omega_laser_b=wb,
                               omega_c=omega_c, j_c=j_c, **kw)

    def rescaled(self, s: float) -> "SpinDriveParams":
        """Multiply every frequency and rate by s (dimensionless ratios kept)."""
        kw = {f: getattr(self, f) * s for f in (
            "omega_e", "omega_ab", "g_a", "g_b", "omega_c", "j_c",
            "omega_laser_a", "omega_laser_b", "rabi_a", "rabi_b",
            "omega_laser_zz", "nu_laser", "rabi_zz_a", "rabi_zz_b",
            "lambda_a", "lambda_b", "gamma_e", "gamma_c")}
        return SpinDriveParams(**kw)


@dataclass(frozen=True)
class SpinXYZParams:
    b_field: float
    jx: float
    jy: float
    jz: float


@dataclass(frozen=True)
class PolarizationParams:
    j_planar: float
    j_z: float


# ---------------------------------------------------------------------------
# shared helpers
# ---------------------------------------------------------------------------

def weight_operator(sector: BasisSector) -> SparseOperator:
    """Diagonal operator counting the total excitation weight per config."""
    import scipy.sparse as sp
    w = np.array([sector.weight_of(c) for c in sector.configs], dtype=float)
    return SparseOperator(sector, sector, sp.diags(w, format="csr"), True)


def _photon_mode_name(space: LocalSpace) -> str:
    for m in space.modes:
        if isinstance(m, hb.BosonMode) and m.name in ("a", "ph"):
            return m.name
    raise ValueError("no photon mode found on site")


def photon_hop_term(sector: BasisSector, lattice: LatticeSpec,
                    mode: str | None = None) -> SparseOperator:
    """sum_<R,R'> (a_R^dag a_R' + h.c.) over lattice edges."""
    mode = mode or _photon_mode_name(sector.spaces[0])
    op = SparseOperator.zeros(sector)
    for i, j in lattice.edges:
        hop = embed_product([boson_create(sector.spaces[i], i, mode),
                             boson_annihilate(sector.spaces[j], j, mode)], sector)
        op = op + hop + hop.dag()
    return op


def build_photon_hopping(sector: BasisSector, lattice: LatticeSpec,
                         omega_c: float, alpha: float,
                         frame: str = "rotating") -> SparseOperator:
    """Free photon array: tunnelling at J_C = 2 omega_C alpha.

    The lab frame keeps omega_C sum(n + 1/2); the rotating frame keeps only
    the hopping (counter-rotating terms are dropped throughout).
    """
    import scipy.sparse as sp
    if frame not in ("lab", "rotating"):
        raise ValueError(f"unknown frame {frame!r}")
    j_c = 2.0 * omega_c * alpha
    mode = _photon_mode_name(sector.spaces[0])
    h = (j_c * photon_hop_term(sector, lattice, mode)).matrix
    if frame == "lab":
        for site in range(lattice.n_sites):
            w_c = lattice.override(site, "omega_c", omega_c)
            n = sector.occupations(site, mode).astype(float)
            h = h + sp.diags(w_c * (n + 0.5), format="csr")
    return SparseOperator(sector, sector, h).assert_hermitian()


# ---------------------------------------------------------------------------
# EIT polariton array
# ---------------------------------------------------------------------------

def build_eit_array(params: EITParams, lattice: LatticeSpec, sector: BasisSector,
                    mode_repr: str = "bosonic-limit"
                    ) -> tuple[TimeDependentHamiltonian, list[CollapseChannel]]:
    """Driven four-level array in the rotating frame of the cavity resonance.

    Per site:  eps n2 + delta n3 + (Delta + eps) n4
               + Omega(t) sum_j s23 + g13 sum_j s13 a^dag + g24 sum_j s24 a^dag
               + h.c., plus photon tunnelling J_C between neighbours.
    """
    import scipy.sparse as sp
    spaces = sector.spaces
    for s in spaces:
        if s.modes[s.mode_index("n4")].weight != 2:
            raise WeightMismatchError("level-4 occupations must carry weight 2")

    diag = np.zeros(sector.dim)
    for site in range(lattice.n_sites):
        eps = lattice.override(site, "epsilon", params.epsilon)
        delt = lattice.override(site, "delta", params.delta)
        Delta = lattice.override(site, "Delta", params.Delta)
        diag += (eps * sector.occupations(site, "n2")
                 + delt * sector.occupations(site, "n3")
                 + (Delta + eps) * sector.occupations(site, "n4"))
    static = sp.diags(diag, format="csr", dtype=np.complex128)

    omega23 = SparseOperator.zeros(sector)
    for site in range(lattice.n_sites):
        sp_site = spaces[site]
        # g13 a^dag sum_j sigma_13^j  (photon created, level-3 lowered)
        g13_term = embed_product(
            [boson_create(sp_site, site, "a"), dicke_lower_bare(sp_site, site, "n3")],
            sector, coeff=params.g13)
        # g24 a^dag sum_j sigma_24^j  (photon created, 4 -> 2)
        g24_term = embed_product(
            [boson_create(sp_site, site, "a"),
             dicke_transition(sp_site, site, "n2", "n4")],
            sector, coeff=params.g24)
        static = static + (g13_term.matrix + g13_term.matrix.getH()
                           + g24_term.matrix + g24_term.matrix.getH())
        # Omega sum_j sigma_23^j  (3 -> 2), possibly ramped
        omega23 = omega23 + embed_operator(
            dicke_transition(sp_site, site, "n2", "n3"), sector)

    static = static + (params.j_c * photon_hop_term(sector, lattice, "a")).matrix
    static_op = SparseOperator(sector, sector, static).assert_hermitian(1e-10)

    drives: list[DriveTerm] = []
    if isinstance(params.omega, RampSchedule) or callable(params.omega):
        drives.append(DriveTerm(omega23, DriveCoefficient(params.omega)))
        ham = TimeDependentHamiltonian(static_op, drives)
    else:
        full = static_op.matrix + params.omega * (omega23.matrix
                                                  + omega23.matrix.getH())
        ham = TimeDependentHamiltonian(
            SparseOperator(sector, sector, full).assert_hermitian(1e-10))

    channels = eit_collapse_channels(params, lattice, sector, sector) \
        if sector.n_total is None else []
    return ham, channels


def eit_collapse_channels(params: EITParams, lattice: LatticeSpec,
                          domain: BasisSector, codomain: BasisSector
                          ) -> list[CollapseChannel]:
    """Photon loss at kappa plus spontaneous emission from levels 3 and 4.

    Level 3 decays to level 1 and level 4 to level 2 (the dipole-coupled
    ground states); emission operators are the collective lowerings, which
    for the tiny excited-level occupations used here reproduce per-excitation
    rates gamma3 n3 and ~gamma4 n4.
    """
    channels = []
    for site in range(lattice.n_sites):
        s = domain.spaces[site]
        if params.kappa > 0:
            channels.append(CollapseChannel(
                embed_operator(boson_annihilate(s, site, "a"), domain, codomain),
                2.0 * params.kappa, f"photon-loss[{site}]"))
        if params.gamma3 > 0:
            channels.append(CollapseChannel(
                embed_operator(boson_annihilate(s, site, "n3"), domain, codomain),
                params.gamma3, f"gamma3[{site}]"))
        if params.gamma4 > 0:
            channels.append(CollapseChannel(
                embed_operator(dicke_transition(s, site, "n2", "n4"),
                               domain, codomain),
                params.gamma4, f"gamma4[{site}]"))
    return channels


def dark_polariton_site_state(params: EITParams, omega_now: float,
                              space: LocalSpace) -> dict[tuple[int, ...], complex]:
    """Local one-excitation dark-polariton state (g S12+ - Omega a+)|0>/B."""
    g = params.g
    b = math.hypot(g, omega_now)
    zero = tuple(0 for _ in space.modes)
    ph = list(zero)
    ph[space.mode_index("a")] = 1
    at = list(zero)
    at[space.mode_index("n2")] = 1
    return {tuple(at): g / b, tuple(ph): -omega_now / b,
            zero: 0.0}


# ---------------------------------------------------------------------------
# Jaynes-Cummings lattice
# ---------------------------------------------------------------------------

def _jc_site_terms(space: LocalSpace, site: int, sector: BasisSector,
                   params: JCLatticeParams) -> "object":
    import scipy.sparse as sp
    n_ph = sector.occupations(site, "a").astype(float)
    if params.atoms_per_cavity == 1:
        n_e = (sector.occupations(site, "atom") == 1).astype(float)
        raise_op = level_transition(space, site, "atom", "e", "g")
    else:
        n_e = sector.occupations(site, "e").astype(float)
        raise_op = dicke_raise_bare(space, site, "e")
    omega_c = params.omega_c
    h = sp.diags(omega_c * n_ph + params.omega_0 * n_e, format="csr",
                 dtype=np.complex128)
    # g (a sigma^+ + a^dag sigma^-)
    coupling = embed_product([raise_op, boson_annihilate(space, site, "a")],
                             sector, coeff=params.g)
    return h + coupling.matrix + coupling.matrix.getH()


def build_jc_lattice(params: JCLatticeParams, lattice: LatticeSpec,
                     sector: BasisSector
                     ) -> tuple[SparseOperator, list[CollapseChannel]]:
    """sum_R H^JC_R - J sum_<R,R'> (a^dag_R a_R' + h.c.) with kappa/gamma decay."""
    import scipy.sparse as sp
    h = sp.csr_matrix((sector.dim, sector.dim), dtype=np.complex128)
    for site in range(lattice.n_sites):
        h = h + _jc_site_terms(sector.spaces[site], site, sector, params)
    h = h - (params.hopping * photon_hop_term(sector, lattice, "a")).matrix
    op = SparseOperator(sector, sector, h).assert_hermitian(1e-10)
    channels = jc_collapse_channels(params, lattice, sector, sector) \
        if sector.n_total is None else []
    return op, channels


def jc_collapse_channels(params: JCLatticeParams, lattice: LatticeSpec,
                         domain: BasisSector, codomain: BasisSector
                         ) -> list[CollapseChannel]:
    channels = []
    for site in range(lattice.n_sites):
        s = domain.spaces[site]
        if params.kappa > 0:
            channels.append(CollapseChannel(
                embed_operator(boson_annihilate(s, site, "a"), domain, codomain),
                2.0 * params.kappa, f"photon-loss[{site}]"))
        if params.gamma > 0:
            if params.atoms_per_cavity == 1:
                low = level_transition(s, site, "atom", "g", "e")
            else:
                low = boson_annihilate(s, site, "e")
            channels.append(CollapseChannel(
                embed_operator(low, domain, codomain),
                params.gamma, f"emission[{site}]"))
    return channels


def jc_counting_operator(sector: BasisSector, site: int,
                         atoms_per_cavity: int = 1) -> SparseOperator:
    """Excitation counter N_l = a_l^dag a_l + |e_l><e_l| (order parameter input)."""
    import scipy.sparse as sp
    n = sector.occupations(site, "a").astype(float)
    if atoms_per_cavity == 1:
        n = n + (sector.occupations(site, "atom") == 1).astype(float)
    else:
        n = n + sector.occupations(site, "e").astype(float)
    return SparseOperator(sector, sector, sp.diags(n, format="csr"), True)


# ---------------------------------------------------------------------------
# Bose-Hubbard family
# ---------------------------------------------------------------------------

def build_bose_hubbard(params: BHParams, lattice: LatticeSpec,
                       sector: BasisSector, mode: str | None = None
                       ) -> SparseOperator:
    """mu sum n - J sum (b^dag b' + h.c.) + U sum n(n-1); two-region variant
    applies per-region constants with a boundary coupling."""
    import scipy.sparse as sp
    mode = mode or _photon_mode_name(sector.spaces[0])
    diag = np.zeros(sector.dim)
    for site in range(lattice.n_sites):
        mu, u = params.site_params(site)
        mu = lattice.override(site, "mu", mu)
        u = lattice.override(site, "interaction", u)
        n = sector.occupations(site, mode).astype(float)
        diag += mu * n + u * n * (n - 1.0)
    h = sp.diags(diag, format="csr", dtype=np.complex128)
    for i, j in lattice.edges:
        hop = embed_product([boson_create(sector.spaces[i], i, mode),
                             boson_annihilate(sector.spaces[j], j, mode)],
                            sector, coeff=-params.edge_hopping(i, j))
        h = h + hop.matrix + hop.matrix.getH()
    return SparseOperator(sector, sector, h).assert_hermitian(1e-10)


def two_component_site() -> LocalSpace:
    return LocalSpace((hb.BosonMode("b", 4, 1), hb.BosonMode("c", 4, 1)),
                      name="two-comp")


def build_two_component_bh(params: TwoCompBHParams, lattice: LatticeSpec,
                           sector: BasisSector) -> SparseOperator:
    """Two bosonic species with cross-tunnelling and cross-interaction."""
    import scipy.sparse as sp
    nb = np.vstack([sector.occupations(s, "b") for s in range(lattice.n_sites)]
                   ).astype(float)
    nc = np.vstack([sector.occupations(s, "c") for s in range(lattice.n_sites)]
                   ).astype(float)
    diag = (params.mu_b * nb.sum(axis=0) + params.mu_c * nc.sum(axis=0)
            + params.u_b * (nb * (nb - 1)).sum(axis=0)
            + params.u_c * (nc * (nc - 1)).sum(axis=0)
            + params.u_bc * (nb * nc).sum(axis=0))
    h = sp.diags(diag, format="csr", dtype=np.complex128)
    hop_j = {("b", "b"): params.j_bb, ("c", "c"): params.j_cc,
             ("b", "c"): params.j_bc, ("c", "b"): params.j_bc}
    for i, j in lattice.edges:
        for (mi, mj), jv in hop_j.items():
            if jv == 0.0:
                continue
            hop = embed_product([boson_create(sector.spaces[i], i, mi),
                                 boson_annihilate(sector.spaces[j], j, mj)],
                                sector, coeff=-jv)
            h = h + hop.matrix + hop.matrix.getH()
    return SparseOperator(sector, sector, h).assert_hermitian(1e-10)


# ---------------------------------------------------------------------------
# photonic Kerr models
# ---------------------------------------------------------------------------

def build_kerr_model(params: KerrParams, lattice: LatticeSpec,
                     sector: BasisSector, form: str = "effective",
                     mode: str | None = None
                     ) -> tuple[TimeDependentHamiltonian, list[CollapseChannel]]:
    """Photon-only Kerr lattice, or the microscopic Lambda-scheme drive.

    ``effective``: U sum n(n-1) - J sum (a^dag a' + h.c.), photon loss Gamma.
    ``lambda-effective``: chi (a^dag a)^2 with chi from the Raman constants.
    ``lambda-micro``: the interaction-picture two-laser drive for validation.
    """
    import scipy.sparse as sp
    if form in ("effective", "lambda-effective"):
        mode = mode or _photon_mode_name(sector.spaces[0])
        n = np.vstack([sector.occupations(s, mode)
                       for s in range(lattice.n_sites)]).astype(float)
        if form == "effective":
            diag = params.interaction * (n * (n - 1)).sum(axis=0)
        else:
            diag = lambda_kerr_strength(params) * (n * n).sum(axis=0)
        h = sp.diags(diag, format="csr", dtype=np.complex128)
        if params.hopping:
            h = h - (params.hopping * photon_hop_term(sector, lattice, mode)).matrix
        ham = TimeDependentHamiltonian(
            SparseOperator(sector, sector, h).assert_hermitian(1e-10))
        channels = []
        if params.loss > 0 and sector.n_total is None:
            for site in range(lattice.n_sites):
                channels.append(CollapseChannel(
                    embed_operator(boson_annihilate(sector.spaces[site], site,
                                                    mode), sector),
                    2.0 * params.loss, f"photon-loss[{site}]"))
        return ham, channels

    if form != "lambda-micro":
        raise ValueError(f"unknown Kerr form {form!r}")
    # H = g e^{-i Delta_1 t} a S20 + sqrt(2) Lambda e^{-i Delta_2 t} S2+ + h.c.
    # with S20 = sum_k |2><0|_k and S2+ = sum_k |2><+|_k, |+> = (|0>+|1>)/sqrt2.
    drives = []
    s20 = SparseOperator.zeros(sector)
    s2p = SparseOperator.zeros(sector)
    for site in range(lattice.n_sites):
        s = sector.spaces[site]
        raise20 = dicke_raise_bare(s, site, "n2")   # sum |2><0|
        s20 = s20 + embed_product([raise20, boson_annihilate(s, site, "a")],
                                  sector)
        s2p = s2p + embed_operator(raise20, sector, coeff=1.0 / math.sqrt(2.0))
        s2p = s2p + embed_operator(dicke_transition(s, site, "n2", "n1"),
                                   sector, coeff=1.0 / math.sqrt(2.0))
    drives.append(DriveTerm(s20, DriveCoefficient(params.g, -params.delta1)))
    drives.append(DriveTerm(s2p, DriveCoefficient(math.sqrt(2.0)
                                                  * params.lambda_raman,
                                                  -params.delta2)))
    static = SparseOperator.zeros(sector, hermitian=True)
    return TimeDependentHamiltonian(static, drives), []


def lambda_scheme_site(photon_cutoff: int, n_atoms: int,
                       atom_cutoff: int | None = None,
                       exact: bool = True) -> LocalSpace:
    """Photon plus collective occupations of Raman level 1 and excited level 2.

    Level 0 is the implicit collective ground; the drive does not conserve
    cavity excitations, so all atomic levels carry weight zero and sectors
    over this space are enumerated unrestricted.
    """
    c = atom_cutoff if atom_cutoff is not None else n_atoms
    modes = (hb.BosonMode("a", photon_cutoff, 1),
             hb.BosonMode("n1", c, 0),
             hb.BosonMode("n2", c, 0))
    return LocalSpace(modes, name="lambda-kerr",
                      dicke=hb.DickeGroup((1, 2), n_atoms, exact=exact))


def lambda_kerr_strength(params: KerrParams) -> float:
    """Kerr coefficient (sqrt(N) g^2 / 2 Delta_1 Theta)(sqrt(N) g / 2 Delta_1) g
    with Theta = 2 Lambda^2 / Delta_2."""
    theta = 2.0 * params.lambda_raman ** 2 / params.delta2
    rn = math.sqrt(params.n_atoms)
    return (rn * params.g ** 2 / (2.0 * params.delta1 * theta)
            * (rn * params.g / (2.0 * params.delta1)) * params.g)


# ---------------------------------------------------------------------------
# driven spin models
# ---------------------------------------------------------------------------

def build_spin_drive(params: SpinDriveParams, lattice: LatticeSpec,
                     sector: BasisSector, which: str = "xy",
                     delta1_frame: bool | None = None
                     ) -> tuple[TimeDependentHamiltonian, list[CollapseChannel]]:
    """Microscopic laser drives generating effective XX/YY or ZZ couplings.

    The xy stage lives in the interaction picture that absorbs the two-photon
    offset delta1 into level b (its remnant appears as a static delta1 |b><b|
    term); the zz stage uses the bare atomic frame unless ``delta1_frame`` is
    forced, which keeps both stages in one frame for Trotter sequencing.
    """
    import scipy.sparse as sp
    if which not in ("xy", "zz"):
        raise ValueError("which must be 'xy' or 'zz'")
    in_delta1_frame = which == "xy" if delta1_frame is None else delta1_frame
    d1 = params.delta1

    diag = np.zeros(sector.dim)
    if in_delta1_frame:
        for site in range(lattice.n_sites):
            diag += d1 * (sector.occupations(site, "atom") == 1).astype(float)
    static = sp.diags(diag, format="csr", dtype=np.complex128)
    static = static + (params.j_c * photon_hop_term(sector, lattice, "ph")).matrix
    static_op = SparseOperator(sector, sector, static).assert_hermitian(1e-10)

    shift = d1 if (in_delta1_frame and which == "zz") else 0.0

    ea_ops = SparseOperator.zeros(sector)   # sum_j |e><a|_j
    eb_ops = SparseOperator.zeros(sector)   # sum_j |e><b|_j
    ea_ph = SparseOperator.zeros(sector)    # sum_j a_j |e><a|_j
    eb_ph = SparseOperator.zeros(sector)
    for site in range(lattice.n_sites):
        s = sector.spaces[site]
        ea = level_transition(s, site, "atom", "e", "a")
        eb = level_transition(s, site, "atom", "e", "b")
        ea_ops = ea_ops + embed_operator(ea, sector)
        eb_ops = eb_ops + embed_operator(eb, sector)
        ea_ph = ea_ph + embed_product([ea, boson_annihilate(s, site, "ph")], sector)
        eb_ph = eb_ph + embed_product([eb, boson_annihilate(s, site, "ph")], sector)

    drives = []
    if which == "xy":
        pairs = [
            (ea_ops, params.rabi_a / 2.0, params.det_a),
            (eb_ops, params.rabi_b / 2.0, params.det_b),
            (ea_ph, params.g_a, params.det_cav_a),
            (eb_ph, params.g_b, params.det_cav_b),
        ]
    else:
        pairs = [
            (ea_ops, params.rabi_zz_a / 2.0, params.det_zz_a),
            (eb_ops, params.rabi_zz_b / 2.0, params.det_zz_b + shift),
            (ea_ops, params.lambda_a / 2.0, params.det_nu_a),
            (eb_ops, params.lambda_b / 2.0, params.det_nu_b + shift),
            (ea_ph, params.g_a, params.det_cav_a),
            (eb_ph, params.g_b, params.det_cav_zz_b + shift),
        ]
    for op, amp, carrier in pairs:
        if amp == 0.0:
            continue
        if abs(carrier) > 0.1 * abs(params.omega_e):
            raise FrameError(
                f"drive carrier {carrier:.3e} is comparable to the optical "
                f"scale {params.omega_e:.3e}: a term with an absolute optical "
                f"frequency survived the frame choice")
        drives.append(DriveTerm(op, DriveCoefficient(amp, carrier)))

    ham = TimeDependentHamiltonian(static_op, drives)
    channels = []
    for site in range(lattice.n_sites):
        s = sector.spaces[site]
        if params.gamma_e > 0:
            for tgt in ("a", "b"):
                channels.append(CollapseChannel(
                    embed_operator(level_transition(s, site, "atom", tgt, "e"),
                                   sector),
                    params.gamma_e / 2.0, f"emission-{tgt}[{site}]"))
        if params.gamma_c > 0:
            channels.append(CollapseChannel(
                embed_operator(boson_annihilate(s, site, "ph"), sector),
                2.0 * params.gamma_c, f"photon-loss[{site}]"))
    return ham, channels


# ---------------------------------------------------------------------------
# effective spin Hamiltonians
# ---------------------------------------------------------------------------

_PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "z": np.array([[-1, 0], [0, 1]], dtype=np.complex128),  # dn, up ordering
}


def spin_sector(lattice: LatticeSpec) -> BasisSector:
    return hb.build_sector(LocalSpace.spin_site(), lattice, None)


def pauli_operator(sector: BasisSector, site: int, axis: str) -> SparseOperator:
    """Single-site Pauli matrix embedded in the spin lattice."""
    p = _PAULI[axis]
    s = sector.spaces[site]
    terms = []
    for k in range(2):
        for l in range(2):
            if p[k, l] != 0:
                terms.append((k, l, p[k, l]))
    op = SparseOperator.zeros(sector)
    for k, l, v in terms:
        op = op + embed_operator(level_transition(s, site, "s", k, l), sector,
                                 coeff=v)
    return op


def build_spin_xyz(params: SpinXYZParams, lattice: LatticeSpec,
                   sector: BasisSector | None = None) -> SparseOperator:
    """sum_j B sigma^z + sum_<jj'> Jx XX + Jy YY + Jz ZZ."""
    sector = sector or spin_sector(lattice)
    h = SparseOperator.zeros(sector)
    for site in range(lattice.n_sites):
        if params.b_field:
            h = h + params.b_field * pauli_operator(sector, site, "z")
    for (i, j) in lattice.edges:
        for axis, jv in (("x", params.jx), ("y", params.jy), ("z", params.jz)):
            if jv:
                h = h + jv * (pauli_operator(sector, i, axis)
                              @ pauli_operator(sector, j, axis))
    return h.assert_hermitian(1e-10)


def build_xy_conserving(b_field: float, j_coupling: float, lattice: LatticeSpec
                        ) -> SparseOperator:
    """Excitation-conserving XY model B sz + J (XX + YY)."""
    return build_spin_xyz(SpinXYZParams(b_field, j_coupling, j_coupling, 0.0),
                          lattice)


def build_zz(b_field: float, j_z: float, lattice: LatticeSpec) -> SparseOperator:
    return build_spin_xyz(SpinXYZParams(b_field, 0.0, 0.0, j_z), lattice)


# ---------------------------------------------------------------------------
# polarization model
# ---------------------------------------------------------------------------

def polarization_sector(lattice: LatticeSpec) -> BasisSector:
    """One photon per site shared between two polarization modes."""
    return hb.build_sector(LocalSpace.polarization_site(), lattice,
                           lattice.n_sites)


def polarization_spin(sector: BasisSector, site: int, axis: str
                      ) -> SparseOperator:
    """Stokes-type spin built from the two polarization modes."""
    s = sector.spaces[site]
    up_c, up_a = boson_create(s, site, "au"), boson_annihilate(s, site, "au")
    dn_c, dn_a = boson_create(s, site, "ad"), boson_annihilate(s, site, "ad")
    plus = embed_product([up_c, dn_a], sector)       # S+ = au^dag ad
    if axis == "x":
        return 0.5 * (plus + plus.dag())
    if axis == "y":
        return (-0.5j) * (plus - plus.dag())
    nu = embed_operator(boson_number(s, site, "au"), sector)
    nd = embed_operator(boson_number(s, site, "ad"), sector)
    return 0.5 * (nu - nd)


def build_polarization_model(params: PolarizationParams, lattice: LatticeSpec,
                             sector: BasisSector | None = None
                             ) -> SparseOperator:
    """sum_<jj'> J (Sx Sx + Sy Sy) + J' Sz Sz for blockaded two-mode photons."""
    sector = sector or polarization_sector(lattice)
    h = SparseOperator.zeros(sector)
    for i, j in lattice.edges:
        for axis, coupling in (("x", params.j_planar), ("y", params.j_planar),
                               ("z", params.j_z)):
            if coupling:
                h = h + coupling * (polarization_spin(sector, i, axis)
                                    @ polarization_spin(sector, j, axis))
    return h.assert_hermitian(1e-10)


# ---------------------------------------------------------------------------
# generic collapse builder
# ---------------------------------------------------------------------------

def build_collapse_ops(kind: str, rate: float, lattice: LatticeSpec,
                       domain: BasisSector, codomain: BasisSector | None = None
                       ) -> list[CollapseChannel]:
    """Per-site decay channels of a named kind.

    ``photon-loss`` uses the jump operator sqrt(2 kappa) a, matching the
    quality-factor convention Q = omega_C / (2 kappa) so that <n> decays as
    exp(-2 kappa t); atomic kinds use sqrt(gamma) times the lowering operator.
    """
    codomain = codomain if codomain is not None else domain
    channels: list[CollapseChannel] = []
    if rate == 0.0:
        return channels
    for site in range(lattice.n_sites):
        s = domain.spaces[site]
        if kind == "photon-loss":
            op = embed_operator(
                boson_annihilate(s, site, _photon_mode_name(s)), domain, codomain)
            channels.append(CollapseChannel(op, 2.0 * rate,
                                            f"photon-loss[{site}]"))
        elif kind == "boson-loss":
            op = embed_operator(
                boson_annihilate(s, site, _photon_mode_name(s)), domain, codomain)
            channels.append(CollapseChannel(op, rate, f"boson-loss[{site}]"))
        elif kind == "eit-gamma3":
            op = embed_operator(boson_annihilate(s, site, "n3"), domain, codomain)
            channels.append(CollapseChannel(op, rate, f"gamma3[{site}]"))
        elif kind == "eit-gamma4":
            op = embed_operator(dicke_transition(s, site, "n2", "n4"),
                                domain, codomain)
            channels.append(CollapseChannel(op, rate, f"gamma4[{site}]"))
        elif kind == "jc-emission":
            op = embed_operator(level_transition(s, site, "atom", "g", "e"),
                                domain, codomain)
            channels.append(CollapseChannel(op, rate, f"emission[{site}]"))
        else:
            raise ValueError(f"unknown collapse kind {kind!r}")
    return channels
