"""Grand-canonical mean-field solver for the Jaynes-Cummings lattice.

The decoupled single-site problem  H^JC - z J (Psi* a + Psi a^dag) +
z J |Psi|^2 - mu (a^dag a + |e><e|)  is iterated to self-consistency
Psi = <a> with damping; among the fixed points the one with the lowest grand
energy is kept.  Setting the atom number above one replaces the two-level
atom by collective (Tavis-Cummings) excitations.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import NoConvergenceError


# ---------------------------------------------------------------------------
# single-site problem
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MFInputs:
    hopping: float              # J per neighbour (z J enters the decoupling)
    mu: float                   # chemical potential minus omega_C if omega_c=0
    detuning: float             # Delta = omega_0 - omega_C
    g: float
    z: int = 3
    atoms_per_cavity: int = 1
    omega_c: float = 0.0


@dataclass
class MFPoint:
    inputs: MFInputs
    psi: complex
    psi_abs: float
    energy: float
    density: float
    iterations: int
    converged: bool
    cutoff: int


def _site_operators(cutoff: int, n_atoms: int):
    """Dense photon annihilator, number, excitation count and JC coupling."""
    n_ph = cutoff + 1
    n_at = n_atoms + 1
    dim = n_ph * n_at
    a = np.zeros((dim, dim))
    nph = np.zeros(dim)
    nex = np.zeros(dim)
    coup = np.zeros((dim, dim))

    def idx(n, m):
        return n * n_at + m

    for n in range(n_ph):
        for m in range(n_at):
            i = idx(n, m)
            nph[i] = n
            nex[i] = m
            if n > 0:
                a[idx(n - 1, m), i] = np.sqrt(n)
            # a sigma^+ : photon absorbed, one more atomic excitation
            if n > 0 and m + 1 <= n_atoms:
                elem = np.sqrt(n) * np.sqrt((m + 1) * (n_atoms - m))
                coup[idx(n - 1, m + 1), i] = elem
    coup = coup + coup.T
    return a, np.diag(nph), np.diag(nex), coup, nph, nex


def _ground_state(inp: MFInputs, psi: complex, cutoff: int):
    a, n_ph, n_ex, coup, nph_diag, nex_diag = _site_operators(
        cutoff, inp.atoms_per_cavity)
    zj = inp.z * inp.hopping
    h = (inp.omega_c * n_ph
         + (inp.omega_c + inp.detuning) * n_ex
         + inp.g * coup
         - inp.mu * (n_ph + n_ex)).astype(np.complex128)
    h -= zj * (np.conj(psi) * a + psi * a.T)
    evals, evecs = np.linalg.eigh(h)
    gs = evecs[:, 0]
    energy = float(evals[0]) + zj * abs(psi) ** 2
    a_expect = complex(np.vdot(gs, a @ gs))
    n_expect = float(np.vdot(gs, (nph_diag + nex_diag) * gs).real)
    top = float(np.sum(np.abs(gs[nph_diag == cutoff]) ** 2))
    return energy, a_expect, n_expect, top


def mf_solve(inp: MFInputs, cutoff: int = 6, psi_init: complex = 0.1,
             tol: float = 1e-9, max_iter: int = 300,
             mixing: float = 0.5, max_density: float = 12.0) -> MFPoint:
    """Damped fixed-point iteration Psi <- <a> with energy-based selection.

    The photon cutoff auto-extends until the top level is unoccupied below
    1e-8.  Psi = 0 is always a fixed point, so the damped iteration runs from
    the supplied seed and the result is kept only if it beats the exact
    Psi = 0 grand energy; near the lobe tip the nonzero fixed point can be
    unstable under pure iteration, hence the damping.
    """
    cut = cutoff
    scale = max(abs(inp.g), abs(inp.hopping) * inp.z, 1e-30)
    while True:
        psi = complex(psi_init)
        it = 0
        converged = psi == 0.0
        energy, a_exp, dens, top = _ground_state(inp, psi, cut)
        prev_delta = None
        for it in range(1, max_iter + 1):
            new_psi = (1.0 - mixing) * psi + mixing * a_exp
            delta = new_psi - psi
            if abs(delta) <= tol * max(1.0, abs(new_psi)):
                psi = new_psi
                converged = True
                energy, a_exp, dens, top = _ground_state(inp, psi, cut)
                break
            # Aitken extrapolation on the damped sequence every few steps
            if prev_delta is not None and it % 6 == 0:
                denom = delta - prev_delta
                if abs(denom) > 1e-30:
                    cand = psi - prev_delta * delta / denom
                    if abs(cand - new_psi) < 10.0 * abs(new_psi) + scale:
                        new_psi = cand
            prev_delta = delta
            psi = new_psi
            energy, a_exp, dens, top = _ground_state(inp, psi, cut)
        e0, _, dens0, top0 = _ground_state(inp, 0.0, cut)
        if max(top, top0) < 1e-8 or cut >= 40:
            break
        if dens > max_density:
            # runaway grand-canonical density: outside the physical window
            converged = False
            break
        cut += 4
    point = MFPoint(inp, psi, abs(psi), energy, dens, it, converged, cut)
    if (e0 <= point.energy + 1e-13 * max(abs(e0), 1.0)) or inp.hopping == 0.0 \
            or not converged:
        point = MFPoint(inp, 0.0, 0.0, e0, dens0, it, True, cut)
    return point


def replace_psi(point: MFPoint, psi: complex) -> MFPoint:
    return MFPoint(point.inputs, psi, abs(psi), point.energy, point.density,
                   point.iterations, point.converged, point.cutoff)


def grand_energy(inp: MFInputs, psi: complex, cutoff: int = 8) -> float:
    return _ground_state(inp, psi, cutoff)[0]


# ---------------------------------------------------------------------------
# phase-diagram scan
# ---------------------------------------------------------------------------

@dataclass
class PhaseGrid:
    hoppings: np.ndarray
    mus: np.ndarray
    psi_abs: np.ndarray          # (n_hop, n_mu)
    density: np.ndarray          # -dE/dmu by centred differences
    density_exact: np.ndarray    # <N> of the converged ground state
    energy: np.ndarray
    compressibility: np.ndarray
    boundary: list               # polylines [(hopping, mu), ...]
    flagged: np.ndarray          # non-converged points

    def lobe_mask(self, threshold: float = 1e-6) -> np.ndarray:
        return self.psi_abs < threshold


def phase_scan(hoppings, mus, detuning: float, g: float, z: int = 3,
               atoms_per_cavity: int = 1, omega_c: float = 0.0,
               cutoff: int = 6, tol: float = 1e-10,
               boundary_threshold: float = 1e-6) -> PhaseGrid:
    """Per-point mean-field solve with warm starts along the mu sweep.

    Density comes from centred finite differences of the grand energy,
    rho = -dE_g/dmu, and the compressibility from differencing rho again.
    """
    hoppings = np.asarray(hoppings, dtype=float)
    mus = np.asarray(mus, dtype=float)
    if np.any(np.diff(hoppings) < 0) or np.any(np.diff(mus) < 0):
        raise ValueError("grids must be sorted ascending")
    nh, nm = len(hoppings), len(mus)
    psi_abs = np.zeros((nh, nm))
    energy = np.zeros((nh, nm))
    density_hf = np.zeros((nh, nm))
    flagged = np.zeros((nh, nm), dtype=bool)
    for i, j_hop in enumerate(hoppings):
        warm = 0.1
        for k, mu in enumerate(mus):
            inp = MFInputs(j_hop, mu, detuning, g, z, atoms_per_cavity,
                           omega_c)
            point = mf_solve(inp, cutoff=cutoff, psi_init=warm, tol=tol)
            psi_abs[i, k] = point.psi_abs
            energy[i, k] = point.energy
            density_hf[i, k] = point.density
            flagged[i, k] = not point.converged
            warm = point.psi_abs if point.psi_abs > 1e-3 else 0.1
    # rho = -dE/dmu (centred); equals <N> by Hellmann-Feynman
    density = np.gradient(-energy, mus, axis=1)
    kappa_c = np.gradient(density, mus, axis=1)
    boundary = _contour_polylines(hoppings, mus, psi_abs, boundary_threshold)
    return PhaseGrid(hoppings, mus, psi_abs, density, density_hf, energy,
                     kappa_c, boundary, flagged)


def _contour_polylines(xs, ys, field, level):
    """Marching-squares iso-contour of ``field`` (indexed [x, y]) at level."""
    segments = []
    f = field - level
    nx, ny = f.shape
    for i in range(nx - 1):
        for j in range(ny - 1):
            corners = [(f[i, j], xs[i], ys[j]),
                       (f[i + 1, j], xs[i + 1], ys[j]),
                       (f[i + 1, j + 1], xs[i + 1], ys[j + 1]),
                       (f[i, j + 1], xs[i], ys[j + 1])]
            pts = []
            for a in range(4):
                va, xa, ya = corners[a]
                vb, xb, yb = corners[(a + 1) % 4]
                if (va < 0) != (vb < 0):
                    t = va / (va - vb)
                    pts.append((xa + t * (xb - xa), ya + t * (yb - ya)))
            if len(pts) >= 2:
                segments.append((pts[0], pts[1]))
    # stitch segments into polylines
    polylines = []
    used = [False] * len(segments)

    def close(p, q):
        return abs(p[0] - q[0]) + abs(p[1] - q[1]) < 1e-12

    for s0 in range(len(segments)):
        if used[s0]:
            continue
        used[s0] = True
        chain = [segments[s0][0], segments[s0][1]]
        grew = True
        while grew:
            grew = False
            for s1 in range(len(segments)):
                if used[s1]:
                    continue
                a, b = segments[s1]
                if close(chain[-1], a):
                    chain.append(b)
                elif close(chain[-1], b):
                    chain.append(a)
                elif close(chain[0], a):
                    chain.insert(0, b)
                elif close(chain[0], b):
                    chain.insert(0, a)
                else:
                    continue
                used[s1] = True
                grew = True
        polylines.append(chain)
    return polylines


def lobe_boundaries_at_zero_hopping(detuning: float, g: float,
                                    n_max: int = 4, omega_c: float = 0.0
                                    ) -> list[tuple[float, float]]:
    """Exact J = 0 lobe edges from dressed-energy differences.

    Lobe n occupies E_n^- - E_(n-1)^- < mu < E_(n+1)^- - E_n^-.
    """
    from .effective import jc_dressed

    def e_minus(n):
        return jc_dressed(n, detuning, g, omega_c)[0] if n > 0 else 0.0

    out = []
    for n in range(1, n_max + 1):
        lo = e_minus(n) - e_minus(n - 1)
        hi = e_minus(n + 1) - e_minus(n)
        out.append((lo, hi))
    return out
