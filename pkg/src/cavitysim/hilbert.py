"""Truncated product Hilbert spaces for cavity-array models.

A lattice site carries a :class:`LocalSpace` made of bosonic modes (photons,
or collective atomic excitations counted in symmetric Dicke occupations) and
qudit modes (individual multi-level atoms).  Every mode quantum carries an
integer excitation weight, so a fixed-weight :class:`BasisSector` can be
enumerated and all operators embedded as sparse matrices acting on it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import (
    CutoffTooSmallError,
    EmptySectorError,
    OverOccupiedError,
    WeightMismatchError,
)

HERMITICITY_TOL = 1e-12


# ---------------------------------------------------------------------------
# modes and local spaces
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BosonMode:
    """Bosonic degree of freedom with occupation cutoff and quantum weight."""

    name: str
    cutoff: int
    weight: int = 1

    def __post_init__(self):
        if self.cutoff < 1:
            raise ValueError(f"mode {self.name}: cutoff must be >= 1")
        if self.weight < 0:
            raise ValueError(f"mode {self.name}: weight must be >= 0")

    @property
    def dim(self) -> int:
        return self.cutoff + 1

    def weight_of(self, occ: int) -> int:
        return self.weight * occ


@dataclass(frozen=True)
class QuditMode:
    """Discrete multi-level degree of freedom with per-level weights."""

    name: str
    labels: tuple[str, ...]
    weights: tuple[int, ...]

    def __post_init__(self):
        if len(set(self.labels)) != len(self.labels):
            raise ValueError(f"mode {self.name}: level labels must be unique")
        if len(self.labels) != len(self.weights):
            raise ValueError(f"mode {self.name}: labels/weights length mismatch")
        if any(w < 0 for w in self.weights):
            raise ValueError(f"mode {self.name}: weights must be >= 0")

    @property
    def dim(self) -> int:
        return len(self.labels)

    def weight_of(self, level: int) -> int:
        return self.weights[level]

    def level_index(self, label) -> int:
        if isinstance(label, str):
            return self.labels.index(label)
        return int(label)


Mode = BosonMode | QuditMode


@dataclass(frozen=True)
class DickeGroup:
    """Marks a set of bosonic modes as collective occupations of N atoms.

    In exact mode the total occupation of the group is capped at ``n_atoms``
    and ladder elements carry the finite-N factor sqrt((n_k+1)(N-n_tot)/N);
    in the bosonic limit the factor is replaced by 1.
    """

    mode_indices: tuple[int, ...]
    n_atoms: int
    exact: bool = False


@dataclass(frozen=True)
class LocalSpace:
    """Ordered collection of modes living on one lattice site."""

    modes: tuple[Mode, ...]
    name: str = "site"
    dicke: DickeGroup | None = None

    def __post_init__(self):
        if self.dicke is not None:
            for i in self.dicke.mode_indices:
                if not isinstance(self.modes[i], BosonMode):
                    raise ValueError("Dicke group members must be bosonic modes")

    @property
    def n_modes(self) -> int:
        return len(self.modes)

    def mode_index(self, name: str) -> int:
        for i, m in enumerate(self.modes):
            if m.name == name:
                return i
        raise KeyError(f"no mode named {name!r} in {self.name}")

    def configs(self) -> list[tuple[int, ...]]:
        """All admissible local configurations in lexicographic order."""
        out: list[tuple[int, ...]] = []
        dims = [m.dim for m in self.modes]

        def rec(prefix: tuple[int, ...]):
            k = len(prefix)
            if k == len(dims):
                out.append(prefix)
                return
            for v in range(dims[k]):
                rec(prefix + (v,))

        rec(())
        if self.dicke is not None and self.dicke.exact:
            idx = self.dicke.mode_indices
            cap = self.dicke.n_atoms
            out = [c for c in out if sum(c[i] for i in idx) <= cap]
        return out

    def config_weight(self, config: Sequence[int]) -> int:
        return sum(m.weight_of(v) for m, v in zip(self.modes, config))

    @property
    def dim(self) -> int:
        return len(self.configs())

    # -- common site layouts -------------------------------------------------

    @staticmethod
    def photon(cutoff: int, name: str = "cavity") -> "LocalSpace":
        return LocalSpace((BosonMode("a", cutoff, 1),), name=name)

    @staticmethod
    def jc_site(photon_cutoff: int, n_atoms: int = 1, name: str = "jc") -> "LocalSpace":
        """Photon mode plus a two-level atom (Dicke mode for n_atoms > 1)."""
        photon = BosonMode("a", photon_cutoff, 1)
        if n_atoms == 1:
            atom = QuditMode("atom", ("g", "e"), (0, 1))
            return LocalSpace((photon, atom), name=name)
        exc = BosonMode("e", n_atoms, 1)
        return LocalSpace((photon, exc), name=name,
                          dicke=DickeGroup((1,), n_atoms, exact=True))

    @staticmethod
    def eit_site(photon_cutoff: int, n_atoms: int, atom_cutoff: int,
                 exact: bool = False, name: str = "eit") -> "LocalSpace":
        """Photon plus collective occupations of atomic levels 2, 3, 4.

        A level-4 excitation needs two cavity photons, so it carries weight 2.
        """
        c = atom_cutoff
        modes = (
            BosonMode("a", photon_cutoff, 1),
            BosonMode("n2", c, 1),
            BosonMode("n3", c, 1),
            BosonMode("n4", max(1, c // 2) if c > 1 else 1, 2),
        )
        return LocalSpace(modes, name=name,
                          dicke=DickeGroup((1, 2, 3), n_atoms, exact=exact))

    @staticmethod
    def spin_site(name: str = "spin") -> "LocalSpace":
        return LocalSpace((QuditMode("s", ("dn", "up"), (0, 1)),), name=name)

    @staticmethod
    def three_level_site(photon_cutoff: int, name: str = "lambda") -> "LocalSpace":
        """Photon plus a single Lambda atom with levels a, b, e."""
        return LocalSpace((BosonMode("ph", photon_cutoff, 1),
                           QuditMode("atom", ("a", "b", "e"), (0, 0, 1))), name=name)

    @staticmethod
    def polarization_site(name: str = "pol") -> "LocalSpace":
        """Two photon polarizations, blockaded to one excitation per site."""
        up = BosonMode("au", 1, 1)
        dn = BosonMode("ad", 1, 1)
        return LocalSpace((up, dn), name=name,
                          dicke=DickeGroup((0, 1), 1, exact=True))


# ---------------------------------------------------------------------------
# lattices
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LatticeSpec:
    """Site count plus undirected nearest-neighbour edges."""

    n_sites: int
    edges: tuple[tuple[int, int], ...]
    boundary: str = "open"
    geometry: str = "chain"
    site_overrides: tuple[tuple[int, tuple[tuple[str, float], ...]], ...] = ()

    def __post_init__(self):
        seen = set()
        for i, j in self.edges:
            if not (0 <= i < self.n_sites and 0 <= j < self.n_sites):
                raise ValueError(f"edge ({i},{j}) references invalid site")
            if i == j:
                raise ValueError(f"self-loop at site {i}")
            key = (min(i, j), max(i, j))
            if key in seen:
                raise ValueError(f"duplicate edge {key}")
            seen.add(key)
        if self.geometry == "ring" and len(self.edges) != self.n_sites:
            raise ValueError("ring lattice must have L edges")
        if self.geometry == "chain" and len(self.edges) != self.n_sites - 1:
            raise ValueError("chain lattice must have L-1 edges")

    @staticmethod
    def chain(n: int) -> "LatticeSpec":
        return LatticeSpec(n, tuple((i, i + 1) for i in range(n - 1)),
                           boundary="open", geometry="chain")

    @staticmethod
    def ring(n: int) -> "LatticeSpec":
        if n == 2:
            # a 2-ring would double the single edge
            return LatticeSpec.chain(2)
        return LatticeSpec(n, tuple((i, (i + 1) % n) for i in range(n)),
                           boundary="periodic", geometry="ring")

    def override(self, site: int, key: str, default: float) -> float:
        for s, kv in self.site_overrides:
            if s == site:
                for k, v in kv:
                    if k == key:
                        return v
        return default


# ---------------------------------------------------------------------------
# sectors
# ---------------------------------------------------------------------------

class BasisSector:
    """Deterministic enumeration of fixed-weight product configurations.

    Configurations are global tuples (site-major concatenation of local mode
    occupations) listed in ascending lexicographic order.  ``n_total=None``
    enumerates the whole truncated product space.
    """

    def __init__(self, spaces: Sequence[LocalSpace], lattice: LatticeSpec,
                 n_total: int | None):
        if len(spaces) != lattice.n_sites:
            raise ValueError("one LocalSpace per lattice site required")
        self.spaces = tuple(spaces)
        self.lattice = lattice
        self.n_total = n_total
        self._site_slices: list[slice] = []
        off = 0
        for s in self.spaces:
            self._site_slices.append(slice(off, off + s.n_modes))
            off += s.n_modes
        self.n_modes_total = off
        self.configs = self._enumerate()
        self.dim = len(self.configs)
        self.index = {c: i for i, c in enumerate(self.configs)}
        self.config_array = np.array(self.configs, dtype=np.int64).reshape(
            self.dim, self.n_modes_total)

    def _enumerate(self) -> list[tuple[int, ...]]:
        local = []
        for s in self.spaces:
            cfgs = s.configs()
            local.append([(c, s.config_weight(c)) for c in cfgs])
        if self.n_total is None:
            out: list[tuple[int, ...]] = [()]
            for site in local:
                out = [pre + c for pre in out for c, _ in site]
            return out

        n = int(self.n_total)
        if n < 0:
            raise ValueError("n_total must be >= 0")
        max_w = [max(w for _, w in site) for site in local]
        min_w = [min(w for _, w in site) for site in local]
        # suffix bounds for pruning
        suf_max = np.concatenate([np.cumsum(max_w[::-1])[::-1], [0]])
        suf_min = np.concatenate([np.cumsum(min_w[::-1])[::-1], [0]])
        if n > suf_max[0]:
            raise CutoffTooSmallError(
                f"total weight {n} exceeds the maximum {suf_max[0]} admitted "
                f"by the mode cutoffs")

        out = []

        def rec(site_i: int, prefix: tuple[int, ...], remaining: int):
            if site_i == len(local):
                if remaining == 0:
                    out.append(prefix)
                return
            for c, w in local[site_i]:
                r = remaining - w
                if r < suf_min[site_i + 1] or r > suf_max[site_i + 1]:
                    continue
                rec(site_i + 1, prefix + c, r)

        rec(0, (), n)
        if not out:
            raise EmptySectorError(
                f"no configuration has total weight {n} (weights too coarse)")
        return out

    def site_config(self, config: tuple[int, ...], site: int) -> tuple[int, ...]:
        return config[self._site_slices[site]]

    def replace_site(self, config: tuple[int, ...], site: int,
                     new_local: tuple[int, ...]) -> tuple[int, ...]:
        sl = self._site_slices[site]
        return config[:sl.start] + new_local + config[sl.stop:]

    def mode_column(self, site: int, mode: int | str) -> int:
        if isinstance(mode, str):
            mode = self.spaces[site].mode_index(mode)
        return self._site_slices[site].start + mode

    def occupations(self, site: int, mode: int | str) -> np.ndarray:
        """Occupation (or level index) of one mode across all configs."""
        return self.config_array[:, self.mode_column(site, mode)]

    def weight_of(self, config: tuple[int, ...]) -> int:
        return sum(s.config_weight(self.site_config(config, i))
                   for i, s in enumerate(self.spaces))

    def __repr__(self):
        return (f"BasisSector(L={self.lattice.n_sites}, N={self.n_total}, "
                f"dim={self.dim})")


def build_sector(spaces: LocalSpace | Sequence[LocalSpace], lattice: LatticeSpec,
                 n_total: int | None) -> BasisSector:
    """Enumerate the weight-``n_total`` sector of a lattice of local spaces."""
    if isinstance(spaces, LocalSpace):
        spaces = (spaces,) * lattice.n_sites
    return BasisSector(spaces, lattice, n_total)


# ---------------------------------------------------------------------------
# sparse operators and states
# ---------------------------------------------------------------------------

class SparseOperator:
    """Complex sparse matrix between two basis sectors."""

    def __init__(self, domain: BasisSector, codomain: BasisSector,
                 matrix: sp.spmatrix, hermitian: bool = False):
        matrix = sp.csr_matrix(matrix, dtype=np.complex128)
        matrix.sum_duplicates()
        if matrix.shape != (codomain.dim, domain.dim):
            raise ValueError(f"matrix shape {matrix.shape} does not match "
                             f"sectors ({codomain.dim}, {domain.dim})")
        if hermitian:
            if domain is not codomain and domain.configs != codomain.configs:
                raise ValueError("hermitian flag requires domain == codomain")
            dev = abs(matrix - matrix.getH())
            if dev.nnz and dev.max() > HERMITICITY_TOL:
                raise ValueError(f"hermitian flag set but |A - A^dag| = "
                                 f"{dev.max():.2e}")
        self.domain = domain
        self.codomain = codomain
        self.matrix = matrix
        self.hermitian = hermitian

    @property
    def shape(self):
        return self.matrix.shape

    def dag(self) -> "SparseOperator":
        return SparseOperator(self.codomain, self.domain,
                              self.matrix.getH().tocsr(), self.hermitian)

    def __add__(self, other: "SparseOperator") -> "SparseOperator":
        self._check_same_sectors(other)
        return SparseOperator(self.domain, self.codomain,
                              self.matrix + other.matrix,
                              self.hermitian and other.hermitian)

    def __sub__(self, other: "SparseOperator") -> "SparseOperator":
        self._check_same_sectors(other)
        return SparseOperator(self.domain, self.codomain,
                              self.matrix - other.matrix,
                              self.hermitian and other.hermitian)

    def __mul__(self, scalar) -> "SparseOperator":
        herm = self.hermitian and float(np.imag(scalar)) == 0.0
        return SparseOperator(self.domain, self.codomain,
                              self.matrix * scalar, herm)

    __rmul__ = __mul__

    def __matmul__(self, other: "SparseOperator") -> "SparseOperator":
        if other.codomain.configs != self.domain.configs:
            raise ValueError("operator composition sector mismatch")
        return SparseOperator(other.domain, self.codomain,
                              (self.matrix @ other.matrix).tocsr(), False)

    def _check_same_sectors(self, other):
        if (self.domain.configs != other.domain.configs
                or self.codomain.configs != other.codomain.configs):
            raise ValueError("sector mismatch")

    def expect(self, state: "StateVector") -> complex:
        return complex(np.vdot(state.amplitudes, self.matrix @ state.amplitudes))

    def to_dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def assert_hermitian(self, tol: float = HERMITICITY_TOL) -> "SparseOperator":
        dev = abs(self.matrix - self.matrix.getH())
        if dev.nnz and dev.max() > tol:
            raise ValueError(f"operator not hermitian: residual {dev.max():.2e}")
        return SparseOperator(self.domain, self.codomain, self.matrix, True)

    @staticmethod
    def zeros(domain: BasisSector, codomain: BasisSector | None = None,
              hermitian: bool = False) -> "SparseOperator":
        codomain = codomain or domain
        return SparseOperator(domain, codomain,
                              sp.csr_matrix((codomain.dim, domain.dim),
                                            dtype=np.complex128), hermitian)

    @staticmethod
    def identity(sector: BasisSector) -> "SparseOperator":
        return SparseOperator(sector, sector,
                              sp.identity(sector.dim, dtype=np.complex128,
                                          format="csr"), True)


class StateVector:
    """Complex amplitude vector over a basis sector."""

    def __init__(self, sector: BasisSector, amplitudes: np.ndarray):
        amplitudes = np.asarray(amplitudes, dtype=np.complex128)
        if amplitudes.shape != (sector.dim,):
            raise ValueError("amplitude length must equal sector dimension")
        if not np.all(np.isfinite(amplitudes.view(np.float64))):
            raise ValueError("amplitudes must be finite")
        self.sector = sector
        self.amplitudes = amplitudes

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "StateVector":
        return StateVector(self.sector, self.amplitudes / self.norm)

    @staticmethod
    def basis_state(sector: BasisSector, config: tuple[int, ...]) -> "StateVector":
        amps = np.zeros(sector.dim, dtype=np.complex128)
        amps[sector.index[config]] = 1.0
        return StateVector(sector, amps)

    @staticmethod
    def from_site_states(sector: BasisSector,
                         locals_: Sequence[dict[tuple[int, ...], complex]]
                         ) -> "StateVector":
        """Product state from per-site {local config: amplitude} maps,
        projected onto the sector."""
        amps = np.zeros(sector.dim, dtype=np.complex128)
        for i, cfg in enumerate(sector.configs):
            a = 1.0 + 0.0j
            for site, site_map in enumerate(locals_):
                a *= site_map.get(sector.site_config(cfg, site), 0.0)
                if a == 0.0:
                    break
            amps[i] = a
        return StateVector(sector, amps)


# ---------------------------------------------------------------------------
# local actions and operator embedding
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SiteAction:
    """Elementary operation on the local configuration of one site.

    ``apply`` maps a local config to [(new_config, amplitude)]; configs that
    leave the local space are dropped by the embedding.
    """

    site: int
    weight_change: int
    apply: Callable[[tuple[int, ...]], list[tuple[tuple[int, ...], complex]]]
    tag: str = ""


def _boson_action(space: LocalSpace, site: int, mode: int | str, kind: str,
                  dicke_bare: bool = False) -> SiteAction:
    m = space.mode_index(mode) if isinstance(mode, str) else mode
    bm = space.modes[m]
    if not isinstance(bm, BosonMode):
        raise TypeError(f"mode {mode} is not bosonic")
    group = space.dicke
    in_group = group is not None and m in group.mode_indices

    def ladder_factor(cfg, n_after):
        # finite-N Dicke factor for ground<->excited transfer
        if not in_group:
            return 1.0
        n_tot = sum(cfg[i] for i in group.mode_indices)
        if group.exact:
            if n_tot > group.n_atoms:
                raise OverOccupiedError("collective occupation exceeds N")
            free = group.n_atoms - n_tot
            base = np.sqrt(free / group.n_atoms)
        else:
            base = 1.0
        return base * (np.sqrt(group.n_atoms) if dicke_bare else 1.0)

    if kind == "create":
        def apply(cfg):
            n = cfg[m]
            if n + 1 > bm.cutoff:
                return []
            f = ladder_factor(cfg, n + 1)
            if f == 0.0:
                return []
            new = cfg[:m] + (n + 1,) + cfg[m + 1:]
            return [(new, np.sqrt(n + 1.0) * f)]
        return SiteAction(site, bm.weight, apply, f"{bm.name}+")
    if kind == "annihilate":
        def apply(cfg):
            n = cfg[m]
            if n == 0:
                return []
            new = cfg[:m] + (n - 1,) + cfg[m + 1:]
            f = ladder_factor(new, n)
            if f == 0.0:
                return []
            return [(new, np.sqrt(float(n)) * f)]
        return SiteAction(site, -bm.weight, apply, f"{bm.name}-")
    if kind == "number":
        def apply(cfg):
            n = cfg[m]
            return [(cfg, float(n))] if n else []
        return SiteAction(site, 0, apply, f"n_{bm.name}")
    raise ValueError(f"unknown boson action {kind!r}")


def boson_create(space: LocalSpace, site: int, mode) -> SiteAction:
    return _boson_action(space, site, mode, "create")


def boson_annihilate(space: LocalSpace, site: int, mode) -> SiteAction:
    return _boson_action(space, site, mode, "annihilate")


def boson_number(space: LocalSpace, site: int, mode) -> SiteAction:
    return _boson_action(space, site, mode, "number")


def dicke_raise_bare(space: LocalSpace, site: int, mode) -> SiteAction:
    """sum_j sigma_{k1}^j: bare collective raising, sqrt(N) S_1k^dag."""
    return _boson_action(space, site, mode, "create", dicke_bare=True)


def dicke_lower_bare(space: LocalSpace, site: int, mode) -> SiteAction:
    """sum_j sigma_{1k}^j: bare collective lowering, sqrt(N) S_1k."""
    return _boson_action(space, site, mode, "annihilate", dicke_bare=True)


def dicke_transition(space: LocalSpace, site: int, to_mode, from_mode) -> SiteAction:
    """sum_j sigma_{kl}^j between two excited collective levels.

    Exact bilinear with element sqrt((n_to + 1) n_from), independent of N.
    """
    mt = space.mode_index(to_mode) if isinstance(to_mode, str) else to_mode
    mf = space.mode_index(from_mode) if isinstance(from_mode, str) else from_mode
    bt, bf = space.modes[mt], space.modes[mf]

    def apply(cfg):
        nf = cfg[mf]
        if nf == 0:
            return []
        nt = cfg[mt]
        if nt + 1 > bt.cutoff:
            return []
        lst = list(cfg)
        lst[mf] -= 1
        lst[mt] += 1
        return [(tuple(lst), np.sqrt((nt + 1.0) * nf))]

    return SiteAction(site, bt.weight - bf.weight, apply,
                      f"T_{bt.name}<-{bf.name}")


def level_projector(space: LocalSpace, site: int, mode, level) -> SiteAction:
    m = space.mode_index(mode) if isinstance(mode, str) else mode
    qm = space.modes[m]
    if not isinstance(qm, QuditMode):
        raise TypeError(f"mode {mode} is not a qudit")
    k = qm.level_index(level)

    def apply(cfg):
        return [(cfg, 1.0)] if cfg[m] == k else []

    return SiteAction(site, 0, apply, f"P_{qm.labels[k]}")


def level_transition(space: LocalSpace, site: int, mode, to_level, from_level
                     ) -> SiteAction:
    """|k><l| on one qudit mode."""
    m = space.mode_index(mode) if isinstance(mode, str) else mode
    qm = space.modes[m]
    if not isinstance(qm, QuditMode):
        raise TypeError(f"mode {mode} is not a qudit")
    k = qm.level_index(to_level)
    l = qm.level_index(from_level)

    def apply(cfg):
        if cfg[m] != l:
            return []
        new = cfg[:m] + (k,) + cfg[m + 1:]
        return [(new, 1.0)]

    return SiteAction(site, qm.weights[k] - qm.weights[l], apply,
                      f"|{qm.labels[k]}><{qm.labels[l]}|")


def identity_action(site: int) -> SiteAction:
    return SiteAction(site, 0, lambda cfg: [(cfg, 1.0)], "1")


def embed_product(factors: Sequence[SiteAction], domain: BasisSector,
                  codomain: BasisSector | None = None,
                  coeff: complex = 1.0) -> SparseOperator:
    """Embed a product of per-site actions into sparse-matrix form.

    Factors are applied right-to-left (the last factor acts first), all other
    sites are acted on by the identity.
    """
    codomain = codomain if codomain is not None else domain
    dw = sum(f.weight_change for f in factors)
    if domain.n_total is not None and codomain.n_total is not None:
        if codomain.n_total - domain.n_total != dw:
            raise WeightMismatchError(
                f"operator weight change {dw} inconsistent with sectors "
                f"{domain.n_total} -> {codomain.n_total}")
    rows, cols, vals = [], [], []
    for j, cfg in enumerate(domain.configs):
        branches = [(cfg, coeff)]
        for f in reversed(factors):
            nxt = []
            for c, a in branches:
                loc = domain.site_config(c, f.site)
                for new_loc, amp in f.apply(loc):
                    nxt.append((domain.replace_site(c, f.site, new_loc), a * amp))
            branches = nxt
            if not branches:
                break
        for c, a in branches:
            i = codomain.index.get(c)
            if i is None:
                continue
            rows.append(i)
            cols.append(j)
            vals.append(a)
    mat = sp.coo_matrix((vals, (rows, cols)),
                        shape=(codomain.dim, domain.dim),
                        dtype=np.complex128).tocsr()
    return SparseOperator(domain, codomain, mat)


def embed_operator(action: SiteAction, domain: BasisSector,
                   codomain: BasisSector | None = None,
                   coeff: complex = 1.0) -> SparseOperator:
    """Embed a single-site elementary operator into a sector pair."""
    return embed_product([action], domain, codomain, coeff)


def collective_ops(space: LocalSpace, site: int, n_atoms: int,
                   transition: tuple[int, int], mode_repr: str = "bosonic-limit"):
    """Factory for collective atomic operators sum_j sigma_{kl}^j.

    ``transition=(k, l)`` maps level l to level k, with levels numbered as in
    the four-level scheme (1 = collective ground).  Returns a function
    ``(domain, codomain=None, normalized=False) -> SparseOperator``; with
    ``normalized=True`` the 1<->k ladder is divided by sqrt(N).
    """
    if mode_repr not in ("exact-finite-N", "bosonic-limit"):
        raise ValueError(f"unknown mode_repr {mode_repr!r}")
    exact = mode_repr == "exact-finite-N"
    if space.dicke is None or space.dicke.n_atoms != n_atoms or \
            space.dicke.exact != exact:
        raise ValueError("LocalSpace Dicke group does not match the request")
    k, l = transition
    mode_of = {2: "n2", 3: "n3", 4: "n4"}

    def factory(domain: BasisSector, codomain: BasisSector | None = None,
                normalized: bool = False) -> SparseOperator:
        scale = 1.0 / np.sqrt(n_atoms) if normalized else 1.0
        if l == 1 and k != 1:
            act = dicke_raise_bare(space, site, mode_of[k])
        elif k == 1 and l != 1:
            act = dicke_lower_bare(space, site, mode_of[l])
        elif k != 1 and l != 1:
            act = dicke_transition(space, site, mode_of[k], mode_of[l])
            scale = 1.0
        else:
            raise ValueError("transition must involve two distinct levels")
        return embed_operator(act, domain, codomain, coeff=scale)

    return factory


def direct_sum_sectors(sectors: Sequence[BasisSector]) -> tuple[BasisSector, list[slice]]:
    """Concatenate sectors of one lattice into a single block space.

    Returns the combined sector (n_total=None marker) and per-block slices.
    Used to let jump operators connect fixed-weight sectors.
    """
    lattice = sectors[0].lattice
    spaces = sectors[0].spaces
    combined = BasisSector.__new__(BasisSector)
    combined.spaces = spaces
    combined.lattice = lattice
    combined.n_total = None
    combined._site_slices = sectors[0]._site_slices
    combined.n_modes_total = sectors[0].n_modes_total
    configs: list[tuple[int, ...]] = []
    slices = []
    for s in sectors:
        if s.lattice is not lattice and s.lattice != lattice:
            raise ValueError("sectors must share a lattice")
        slices.append(slice(len(configs), len(configs) + s.dim))
        configs.extend(s.configs)
    combined.configs = configs
    combined.dim = len(configs)
    combined.index = {c: i for i, c in enumerate(configs)}
    combined.config_array = np.array(configs, dtype=np.int64).reshape(
        combined.dim, combined.n_modes_total)
    return combined, slices


def block_embed(op: SparseOperator, combined: BasisSector,
                domain_slice: slice, codomain_slice: slice) -> SparseOperator:
    """Lift a sector-pair operator into a direct-sum space."""
    mat = sp.lil_matrix((combined.dim, combined.dim), dtype=np.complex128)
    mat[codomain_slice, domain_slice] = op.matrix
    return SparseOperator(combined, combined, mat.tocsr(),
                          op.hermitian and domain_slice == codomain_slice)
