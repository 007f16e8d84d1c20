"""Closed-form maps from microscopic cavity-QED constants to effective models.

Covers the polariton normal-mode transformation, the polariton Bose-Hubbard
constants (U, J, mu, Gamma0), the dispersive two-component constants, the
dressed-state ladder of a single Jaynes-Cummings site and its effective
on-site repulsion, photonic Kerr strengths, the ring lattice sums entering
second-order spin couplings, and the disorder statistic of the on-site
interaction under atom-number fluctuations.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateBasisError, ResonanceError, RegimeViolationWarning
from .models import EITParams, KerrParams, SpinDriveParams, envelope_value


# ---------------------------------------------------------------------------
# polariton transformation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PolaritonBasis:
    """Normal modes of the one-excitation manifold of a driven EIT cavity.

    ``coefficients`` rows give (p0, p+, p-) in the (S12+, a+, S13+) basis;
    the dispersive rows express the two long-lived species b, c.
    """

    g: float
    b_const: float                    # B = sqrt(g^2 + Omega^2)
    a_const: float                    # A = sqrt(4 B^2 + delta^2)
    mu_0: float
    mu_plus: float
    mu_minus: float
    coefficients: np.ndarray
    dispersive_b: np.ndarray
    dispersive_c: np.ndarray
    mu_b: float
    mu_c: float

    def orthonormality_residual(self) -> float:
        gram = self.coefficients @ self.coefficients.conj().T
        return float(np.max(np.abs(gram - np.eye(3))))


def polariton_transform(params: EITParams, omega_now: float | None = None
                        ) -> PolaritonBasis:
    """Exact polariton coefficients and frequencies for one cavity."""
    omega = float(envelope_value(params.omega, 0.0) if omega_now is None
                  else omega_now)
    g = params.g
    if g == 0.0 and omega == 0.0:
        raise DegenerateBasisError("polariton basis undefined for g = Omega = 0")
    delta = params.delta
    b = math.hypot(g, omega)
    a = math.sqrt(4.0 * b * b + delta * delta)
    c_plus = math.sqrt(2.0 / (a * (a + delta)))
    c_minus = math.sqrt(2.0 / (a * (a - delta)))
    coeff = np.array([
        [g / b, -omega / b, 0.0],
        [c_plus * omega, c_plus * g, c_plus * (a + delta) / 2.0],
        [c_minus * omega, c_minus * g, -c_minus * (a - delta) / 2.0],
    ])
    disp_b = np.array([g / b, -omega / b, 0.0])
    disp_c = np.array([omega / b, g / b, -b / delta if delta else 0.0])
    return PolaritonBasis(
        g=g, b_const=b, a_const=a,
        mu_0=0.0, mu_plus=(delta - a) / 2.0, mu_minus=(delta + a) / 2.0,
        coefficients=coeff, dispersive_b=disp_b, dispersive_c=disp_c,
        mu_b=0.0, mu_c=-b * b / delta if delta else 0.0)


# ---------------------------------------------------------------------------
# effective constants
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EffectiveParams:
    kind: str
    values: dict = field(default_factory=dict)
    validity: dict = field(default_factory=dict)

    def __getattr__(self, name):
        vals = object.__getattribute__(self, "values")
        if name in vals:
            return vals[name]
        raise AttributeError(name)

    def worst_validity(self) -> float:
        return max(self.validity.values(), default=0.0)


def cooperativity(g: float, kappa: float, gamma: float) -> float:
    """xi = g^2 / (2 kappa gamma); strong coupling means xi >> 1."""
    return g * g / (2.0 * kappa * gamma)


def quality_factor(omega_c: float, kappa: float) -> float:
    return omega_c / (2.0 * kappa)


def eit_effective_params(params: EITParams, n_mean: float = 1.0,
                         omega_now: float | None = None) -> EffectiveParams:
    """Polariton Bose-Hubbard constants U, J, mu and decay Gamma0.

    U  = -(g24^2/Delta) N g13^2 Omega^2 / (N g13^2 + Omega^2)^2
    J  = 2 omega_C Omega^2 alpha / (N g13^2 + Omega^2) = J_C Omega^2 / B^2
    mu = eps g^2 / B^2
    Gamma0 = (Omega^2/B^2) kappa + Theta(n-2) (g24^2 g^2 Omega^2 / Delta^2 B^4)
             gamma4.
    Validity inequalities are scored, not enforced.
    """
    omega = float(envelope_value(params.omega, 0.0) if omega_now is None
                  else omega_now)
    g = params.g
    b2 = g * g + omega * omega
    if b2 == 0.0:
        raise ZeroDivisionError("B = 0: no polariton basis")
    if params.Delta == 0.0 and params.g24 != 0.0:
        raise ZeroDivisionError("Delta = 0 with g24 != 0: perturbation theory "
                                "diverges")
    delta_ = params.Delta if params.Delta != 0.0 else math.inf
    u = -(params.g24 ** 2 / delta_) * (g * g * omega * omega) / (b2 * b2)
    j = params.j_c * omega * omega / b2
    mu = params.epsilon * g * g / b2
    theta = 1.0 if n_mean >= 2.0 else 0.0
    gamma0 = (omega * omega / b2) * params.kappa
    if theta and params.Delta != 0.0:
        gamma0 += (params.g24 ** 2 * g * g * omega * omega
                   / (params.Delta ** 2 * b2 * b2)) * params.gamma4

    pb = polariton_transform(params, omega)
    mu_scale = min(abs(pb.mu_plus), abs(pb.mu_minus))
    validity = {
        "rotating_wave": max(abs(params.g24), abs(params.epsilon),
                             abs(params.Delta)) / mu_scale if mu_scale else math.inf,
        "perturbative_g24": (abs(params.g24 * g * omega / b2)
                             / abs(params.Delta) if params.Delta else 0.0),
    }
    for name, score in validity.items():
        if score > 0.5:
            warnings.warn(f"{name} validity ratio {score:.2f} is not small",
                          RegimeViolationWarning, stacklevel=2)
    return EffectiveParams("eit-bose-hubbard",
                           {"interaction": u, "hopping": j, "mu": mu,
                            "gamma0": gamma0, "b2": b2},
                           validity)


def max_u_over_gamma0(g13: float, kappa: float, gamma4: float,
                      n_mean: float = 2.0) -> float:
    """Optimum of U/Gamma0 over drive and detuning at g13 = g24."""
    theta = 1.0 if n_mean >= 2.0 else 0.0
    if theta == 0.0:
        return math.inf
    return g13 / math.sqrt(4.0 * kappa * theta * gamma4)


def two_component_params(params: EITParams, omega_now: float | None = None,
                         dispersive_threshold: float = 10.0) -> EffectiveParams:
    """Dispersive-regime constants of the two-species polariton model."""
    omega = float(envelope_value(params.omega, 0.0) if omega_now is None
                  else omega_now)
    g = params.g
    b2 = g * g + omega * omega
    b = math.sqrt(b2)
    delta = params.delta
    if delta == 0.0:
        raise ZeroDivisionError("dispersive regime needs delta != 0")
    if abs(delta) <= dispersive_threshold * b:
        warnings.warn(f"delta = {abs(delta)/b:.1f} B is not deep in the "
                      f"dispersive regime", RegimeViolationWarning, stacklevel=2)
    alpha = params.j_c / 2.0 / params.omega_c if params.omega_c else 0.0
    # the tunnelling prefactor alpha of the dispersive formulas is the energy
    # 2 omega_C alpha = J_C
    a_en = params.j_c
    g24 = params.g24
    vals = {
        "j_bb": a_en * g * g / b2,
        "j_cc": a_en * omega * omega / b2,
        "j_bc": a_en * g * omega / b2,
        "u_b": -(g24 ** 2 * g * g * omega * omega) / (b2 ** 2 * params.Delta),
        "u_c": -(g24 ** 2 * g * g * omega * omega)
               / (b2 ** 2 * (params.Delta + 2.0 * b2 / delta)),
        "u_bc": -(g24 ** 2 * (g * g - omega * omega) ** 2)
                / (b2 ** 2 * (params.Delta + b2 / delta)),
        "mu_b": 0.0,
        "mu_c": -b2 / delta,
    }
    return EffectiveParams("two-component-bh", vals,
                           {"dispersive": b / abs(delta)})


# ---------------------------------------------------------------------------
# Jaynes-Cummings dressed states
# ---------------------------------------------------------------------------

def jc_dressed(n: int, detuning: float, g: float, omega_c: float = 0.0
               ) -> tuple[float, float]:
    """Energy pair E_n-+ = n w_C + Delta/2 -+ sqrt(n g^2 + Delta^2/4); n >= 1."""
    if n < 0:
        raise ValueError("n must be >= 0")
    if n == 0:
        return 0.0, 0.0
    root = math.sqrt(n * g * g + detuning * detuning / 4.0)
    base = n * omega_c + detuning / 2.0
    return base - root, base + root


def jc_repulsion(detuning: float, g: float) -> float:
    """Effective on-site repulsion E_2- - 2 E_1- of the dressed ladder."""
    return (2.0 * math.sqrt(g * g + detuning ** 2 / 4.0)
            - math.sqrt(2.0 * g * g + detuning ** 2 / 4.0)
            - detuning / 2.0)


# ---------------------------------------------------------------------------
# photonic Kerr strengths
# ---------------------------------------------------------------------------

def kerr_params(kind: str, *, g24: float = 0.0, g: float = 0.0,
                omega: float = 0.0, Delta: float = 0.0, kappa: float = 0.0,
                gamma4: float = 0.0, n_mean: float = 1.0,
                lambda_raman: float = 0.0, delta1: float = 0.0,
                delta2: float = 0.0, n_atoms: int = 1) -> EffectiveParams:
    """Effective photon nonlinearity and loss.

    ``eit-photonic``: U = (g24 g / |Delta Omega|)(g/Omega) g24 magnitude with
    Gamma = kappa + Theta(n-2) g24^2 g^2 / (Delta^2 Omega^2) gamma4.
    ``lambda``: chi of the two-laser Raman scheme.
    """
    if kind == "eit-photonic":
        if Delta == 0.0 or omega == 0.0:
            raise ZeroDivisionError("Delta and Omega must be nonzero")
        r1 = g / omega
        r2 = g24 * g / abs(Delta * omega)
        for name, score in (("g_much_less_than_Omega", r1),
                            ("g24g_much_less_than_DeltaOmega", r2)):
            if score > 0.5:
                warnings.warn(f"{name} ratio {score:.2f} is not small",
                              RegimeViolationWarning, stacklevel=2)
        u = -r2 * r1 * g24 * np.sign(Delta)
        theta = 1.0 if n_mean >= 2.0 else 0.0
        gamma = kappa + theta * (g24 ** 2 * g ** 2 / (Delta ** 2 * omega ** 2)
                                 ) * gamma4
        return EffectiveParams("kerr-photonic",
                               {"interaction": u, "loss": gamma,
                                "u_over_gamma": abs(u) / gamma},
                               {"g_over_omega": r1, "g24g_over_DO": r2})
    if kind == "lambda":
        kp = KerrParams(g=g, lambda_raman=lambda_raman, delta1=delta1,
                        delta2=delta2, n_atoms=n_atoms)
        from .models import lambda_kerr_strength
        chi = lambda_kerr_strength(kp)
        rn = math.sqrt(n_atoms)
        theta = 2.0 * lambda_raman ** 2 / delta2
        validity = {"dispersive_1": rn * g / abs(delta1),
                    "dispersive_2": rn * lambda_raman / abs(delta2),
                    "dispersive_3": rn * g * g / abs(2 * delta1 * theta)}
        return EffectiveParams("kerr-lambda", {"chi": chi}, validity)
    raise ValueError(f"unknown Kerr kind {kind!r}")


# ---------------------------------------------------------------------------
# lattice sums
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LatticeSums:
    """Ring dispersion sums (1/L) sum_k e^{i m k} / (w_ref - w_k)."""

    omega_c: float
    j_c: float
    n_sites: int
    values: dict

    def __getattr__(self, name):
        vals = object.__getattribute__(self, "values")
        if name in vals:
            return vals[name]
        raise AttributeError(name)


def ring_sum(omega_ref: float, omega_c: float, j_c: float, n_sites: int,
             order: int = 0, allow_on_band: bool = False) -> complex:
    """(1/L) sum_k exp(i k order) / (omega_ref - omega_k) on the odd ring.

    omega_k = omega_C + 2 J_C cos k with k = 2 pi l / L.
    """
    ks = 2.0 * math.pi * np.arange(n_sites) / n_sites
    denom = omega_ref - (omega_c + 2.0 * j_c * np.cos(ks))
    if np.min(np.abs(denom)) < 1e-9 * abs(omega_c) and not allow_on_band:
        raise ResonanceError("reference frequency sits on the dispersion band")
    return complex(np.mean(np.exp(1j * ks * order) / denom))


def pair_sum(omega_ref: float, omega_c: float, j_c: float,
             lattice, i: int, j: int, allow_on_band: bool = False) -> complex:
    """General-lattice analogue sum_m u_m(i) u_m*(j) / (w_ref - w_m).

    Diagonalizes the one-photon hopping matrix; on an odd periodic ring with
    |i - j| = 1 this reproduces ``ring_sum(order=1)``.
    """
    L = lattice.n_sites
    h = np.zeros((L, L))
    for a, b in lattice.edges:
        h[a, b] = h[b, a] = j_c
    w, v = np.linalg.eigh(h)
    denom = omega_ref - (omega_c + w)
    if np.min(np.abs(denom)) < 1e-9 * max(abs(omega_c), 1.0) \
            and not allow_on_band:
        raise ResonanceError("reference frequency sits on a photon mode")
    return complex(np.sum(v[i, :] * np.conj(v[j, :]) / denom))


def lattice_sums(params: SpinDriveParams, n_sites: int, which: str = "xy",
                 lattice=None) -> LatticeSums:
    """All dispersion sums entering the second-order spin couplings.

    Uses the odd-L ring k-grid; pass ``lattice`` to use the exact photon
    normal modes of a small open array instead (needed for two cavities).
    """
    if lattice is None and n_sites % 2 == 0:
        raise ValueError("ring k-grid requires odd L; pass a lattice for "
                         "even site counts")

    def s(omega_ref: float, order: int) -> complex:
        if lattice is not None:
            i, j = (0, 0) if order == 0 else lattice.edges[0]
            return pair_sum(omega_ref, params.omega_c, params.j_c, lattice, i, j)
        return ring_sum(omega_ref, params.omega_c, params.j_c, n_sites, order)

    vals = {}
    if which == "xy":
        mean = (params.omega_laser_a + params.omega_laser_b) / 2.0
        vals["gamma_1"] = s(mean, 0)
        vals["gamma_2"] = s(mean, 1)
        vals["gamma_a"] = s(params.omega_laser_a, 0)
        vals["gamma_b"] = s(params.omega_laser_b, 0)
    else:
        w, nu, wab = params.omega_laser_zz, params.nu_laser, params.omega_ab
        vals["gamma_1"] = s(w, 0)
        vals["gamma_2"] = s(w, 1)
        vals["gamma_aa"] = vals["gamma_bb"] = s(w, 0)
        vals["gamma_ab"] = s(w + wab, 0)
        vals["gamma_ba"] = s(w - wab, 0)
        vals["gamma_t_aa"] = vals["gamma_t_bb"] = s(nu, 0)
        vals["gamma_t_ab"] = s(nu + wab, 0)
        vals["gamma_t_ba"] = s(nu - wab, 0)
    return LatticeSums(params.omega_c, params.j_c, n_sites, vals)


# ---------------------------------------------------------------------------
# second-order spin couplings
# ---------------------------------------------------------------------------

def spin_couplings(params: SpinDriveParams, sums: LatticeSums,
                   which: str = "xy") -> EffectiveParams:
    """Second-order constants of the driven effective spin model.

    xy: B, J1, J2 and the XY couplings Jx = (J1+J2)/2, Jy = (J1-J2)/2.
    zz: Btilde and Jz.  Groupings follow the reading in which all shifts
    vanish with the drive amplitudes (B -> delta1/2 as couplings -> 0).
    """
    if which == "xy":
        oa, ob = params.rabi_a, params.rabi_b
        da, db = params.det_a, params.det_b
        ga, gb = params.g_a, params.g_b
        g1, g2 = sums.gamma_1.real, sums.gamma_2
        gam_a, gam_b = sums.gamma_a.real, sums.gamma_b.real

        def stark(o_same, o_other, d_same, d_other, g_same, g_other, gam_same):
            return (abs(o_same) ** 2 / (4.0 * d_same ** 2)) * (
                d_same
                - abs(o_same) ** 2 / (4.0 * d_same)
                - abs(o_other) ** 2 / (4.0 * (d_other - d_same))
                - gam_same * g_same ** 2
                - g1 * g_other ** 2
                + g1 ** 2 * g_other ** 4 / d_same)

        t_b = stark(ob, oa, db, da, gb, ga, gam_b)
        t_a = stark(oa, ob, da, db, ga, gb, gam_a)
        b_field = params.delta1 / 2.0 - 0.5 * (t_b - t_a)
        j1 = (g2 / 4.0) * (abs(oa) ** 2 * gb ** 2 / da ** 2
                           + abs(ob) ** 2 * ga ** 2 / db ** 2)
        j2 = (g2 / 2.0) * (np.conj(oa) * ob * ga * gb / (da * db))
        j1 = complex(j1)
        j2 = complex(j2)
        jx = (j1 + j2) / 2.0
        jy = (j1 - j2) / 2.0
        couplings = max(abs(oa), abs(ob), ga, gb)
        dets = min(abs(da), abs(db), abs(params.det_cav_a),
                   abs(params.det_cav_b))
        vals = {"b_field": float(b_field), "j1": j1.real, "j2": j2.real,
                "jx": jx.real, "jy": jy.real,
                "j1_c": j1, "j2_c": j2}
        return EffectiveParams("spin-xy", vals,
                               {"detuning_hierarchy": couplings / dets})

    oa, ob = params.rabi_zz_a, params.rabi_zz_b
    la, lb = params.lambda_a, params.lambda_b
    da, db = params.det_zz_a, params.det_zz_b
    ta, tb = params.det_nu_a, params.det_nu_b
    ga, gb = params.g_a, params.g_b
    g2 = sums.gamma_2

    j_z = g2 * abs(np.conj(ob) * gb / (4.0 * db)
                   - np.conj(oa) * ga / (4.0 * da)) ** 2
    j_z = complex(j_z)

    # gt[j][m]: nu-laser sums gamma~_{jm}, gm[j][m]: omega-laser sums gamma_{jm}
    gt = {("a", "a"): sums.gamma_t_aa, ("a", "b"): sums.gamma_t_ab,
          ("b", "a"): sums.gamma_t_ba, ("b", "b"): sums.gamma_t_bb}
    gm = {("a", "a"): sums.gamma_aa, ("a", "b"): sums.gamma_ab,
          ("b", "a"): sums.gamma_ba, ("b", "b"): sums.gamma_bb}
    lam = {"a": la, "b": lb}
    rab = {"a": oa, "b": ob}
    det = {"a": da, "b": db}
    det_t = {"a": ta, "b": tb}
    gcp = {"a": ga, "b": gb}

    def x_level(m: str) -> float:
        # Stark shift of level m from both zz-stage lasers, second order
        other = "b" if m == "a" else "a"
        tm, dm = det_t[m], det[m]
        x1 = (abs(lam[m]) ** 2 / (16.0 * tm ** 2)) * (
            4.0 * tm
            - abs(lam[other]) ** 2 / (det_t[other] - tm)
            - abs(lam[m]) ** 2 / tm
            - sum(abs(rab[j]) ** 2 / (det[j] - tm)
                  + 4.0 * gt[(j, m)].real * gcp[j] ** 2 for j in ("a", "b")))
        x2 = (abs(rab[m]) ** 2 / (16.0 * dm ** 2)) * (
            4.0 * dm
            - abs(rab[other]) ** 2 / (det[other] - dm)
            - abs(rab[m]) ** 2 / dm
            - sum(abs(lam[j]) ** 2 / (det_t[j] - dm)
                  + 4.0 * gm[(j, m)].real * gcp[j] ** 2 for j in ("a", "b"))
            + 4.0 * gm[(m, m)].real ** 2 * gcp[m] ** 4 / dm)
        return float(x1 + x2)

    b_tilde = -0.5 * (x_level("b") - x_level("a"))
    couplings = max(abs(oa), abs(ob), abs(la), abs(lb), ga, gb)
    dets = min(abs(da), abs(db), abs(ta), abs(tb))
    return EffectiveParams("spin-zz",
                           {"b_tilde": float(b_tilde), "jz": j_z.real,
                            "jz_c": j_z},
                           {"detuning_hierarchy": couplings / dets})


# ---------------------------------------------------------------------------
# disorder statistics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DisorderStats:
    mean_n: float
    delta_n: float
    samples: int
    rel_std: float
    mean_u: float
    seed: int
    epsilon_equiv: float          # uniform-interval half-width with equal sigma


def osint_interaction(n_atoms, params: EITParams, omega: float) -> np.ndarray:
    n = np.asarray(n_atoms, dtype=float)
    g2 = n * params.g13 ** 2
    return -(params.g24 ** 2 / params.Delta) * g2 * omega ** 2 \
        / (g2 + omega ** 2) ** 2


def ueff_disorder_stats(mean_n: int, delta_n: float, params: EITParams,
                        samples: int = 10000, seed: int = 0,
                        delta_n_is_sigma: bool = True) -> DisorderStats:
    """Relative standard deviation of U across atom-number fluctuations.

    Atom numbers are integers drawn uniformly from a symmetric window around
    ``mean_n``.  With ``delta_n_is_sigma`` (default) the window half-width is
    sqrt(3) delta_n so the number fluctuation (RMS) equals delta_n; otherwise
    delta_n is the half-width itself.
    """
    if delta_n >= mean_n:
        raise ValueError("delta_n must be smaller than mean_n")
    half = int(round(math.sqrt(3.0) * delta_n)) if delta_n_is_sigma \
        else int(round(delta_n))
    rng = np.random.default_rng(seed)
    ns = rng.integers(mean_n - half, mean_n + half + 1, size=samples)
    omega = float(envelope_value(params.omega, 0.0))
    us = osint_interaction(ns, params, omega)
    mean_u = float(np.mean(us))
    rel = float(np.std(us) / abs(mean_u)) if mean_u != 0.0 else 0.0
    return DisorderStats(mean_n, delta_n, samples, rel, mean_u, seed,
                         epsilon_equiv=math.sqrt(3.0) * rel)
