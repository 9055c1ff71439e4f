"""Thermodynamic diagnostics along a relaxation trajectory.

Central quantities (natural log, so entropies are in nats):

    F_neq(rho) = Tr(H rho) + (1/beta) Tr(rho ln rho)
    D(rho||tau) = Tr[rho (ln rho - ln tau)] = beta (F_neq - F_eq)
    D = P + C   with P the classical relative entropy of the populations
                and C = S(diag(rho)) - S(rho) the relative entropy of
                coherence, both in the energy eigenbasis.

The entropy production rate is computed as Pi = -beta dF_neq/dt, which
equals -dD/dt and is nonnegative for Davies dynamics.  (The dimensionally
consistent beta prefactor is used; see the decisions ledger.)

Two distances are kept deliberately distinct: ``l1_elementwise`` is the
entrywise sum used in the distance plots, while ``trace_distance`` is half the
Schatten-1 norm that enters Pinsker's inequality
D >= ||rho - tau||_1^2 / 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .operators import DensityMatrix, SpectralBasis, thermal_populations
from .spectral import EvolutionGrid
from .utils import frozen, log_gibbs_weights, xlogx

#: Eigenvalue threshold below which a state direction counts as unsupported.
SUPPORT_TOL = 1e-12

CSV_COLUMNS = ("t", "F_neq", "D", "P", "C", "L1", "T1", "Pi")


def _entropy(rho: np.ndarray) -> float:
    """von Neumann entropy, tolerant of tiny negative eigenvalues."""
    eigs = np.clip(np.linalg.eigvalsh(rho), 0.0, None)
    return float(-xlogx(eigs).sum())


def noneq_free_energy(rho, hamiltonian, beta: float) -> float:
    """Non-equilibrium free energy Tr(H rho) - S(rho)/beta."""
    if beta <= 0:
        raise ValidationError("beta must be positive for the free energy")
    m = rho.entries if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    h = np.asarray(hamiltonian, dtype=complex)
    energy = float(np.real(np.trace(h @ m)))
    return energy - _entropy(m) / beta


def equilibrium_free_energy(basis: SpectralBasis, beta: float) -> float:
    """F_eq = -ln(Z)/beta, computed with a max-energy shift."""
    if beta <= 0:
        raise ValidationError("beta must be positive for the free energy")
    e0 = basis.energies.min()
    z_shifted = np.exp(-beta * (basis.energies - e0)).sum()
    return float(e0 - math.log(z_shifted) / beta)


def relative_entropy(rho, sigma) -> float:
    """Quantum relative entropy D(rho || sigma) = Tr[rho (ln rho - ln sigma)].

    Returns ``math.inf`` (a distinguished value, not an exception) when rho
    has weight outside the support of sigma.
    """
    a = rho.entries if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    b = sigma.entries if isinstance(sigma, DensityMatrix) else np.asarray(sigma, dtype=complex)
    s_eigs, s_vecs = np.linalg.eigh(b)
    weights = np.real(np.einsum("ij,jk,ki->i", s_vecs.conj().T, a, s_vecs))
    dead = s_eigs <= SUPPORT_TOL
    if np.any(weights[dead] > SUPPORT_TOL):
        return math.inf
    live = ~dead
    cross = float(weights[live] @ np.log(s_eigs[live]))
    r_eigs = np.clip(np.linalg.eigvalsh(a), 0.0, None)
    value = float(xlogx(r_eigs).sum()) - cross
    return max(value, 0.0) if value > -1e-10 else value


def entropy_split(rho, tau_populations, basis: SpectralBasis) -> tuple[float, float]:
    """Split D(rho || tau) into classical and coherent parts.

    P is the classical relative entropy between the energy-basis populations
    of rho and the thermal populations; C = S(dephased rho) - S(rho) is the
    relative entropy of coherence.  P + C = D(rho || tau) when tau is the
    Gibbs state diagonal in ``basis``.  A zero thermal population under a
    populated level yields ``math.inf``.
    """
    m = rho.entries if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    rho_e = basis.to_eigenbasis(m)
    p = np.clip(np.real(np.diag(rho_e)), 0.0, None)
    t = np.asarray(tau_populations, dtype=float)
    dead = t <= 0.0
    if np.any(p[dead] > SUPPORT_TOL):
        return math.inf, _entropy_of_populations(p) - _entropy(m)
    live = ~dead
    classical = float(xlogx(p).sum() - p[live] @ np.log(t[live]))
    coherent = _entropy_of_populations(p) - _entropy(m)
    return max(classical, 0.0), max(coherent, 0.0)


def _entropy_of_populations(p: np.ndarray) -> float:
    return float(-xlogx(np.clip(p, 0.0, None)).sum())


def l1_elementwise(rho, tau, basis: SpectralBasis) -> float:
    """Entrywise L1 distance sum_ij |rho_ij - tau_ij| in the energy basis."""
    a = rho.entries if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    b = tau.entries if isinstance(tau, DensityMatrix) else np.asarray(tau, dtype=complex)
    if a.shape != b.shape:
        raise ValidationError("states have different dimensions")
    return float(np.abs(basis.to_eigenbasis(a) - basis.to_eigenbasis(b)).sum())


def trace_distance(rho, sigma) -> float:
    """Half the Schatten-1 norm of rho - sigma."""
    a = rho.entries if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    b = sigma.entries if isinstance(sigma, DensityMatrix) else np.asarray(sigma, dtype=complex)
    return float(0.5 * np.abs(np.linalg.eigvalsh(a - b)).sum())


def spohn_rate(times, f_neq, beta: float) -> np.ndarray:
    """Entropy production rate Pi = -beta dF_neq/dt from sampled values.

    Second-order central differences in the interior (exact for non-uniform
    grids), one-sided second-order stencils at the endpoints.  Requires at
    least three grid points.
    """
    times = np.asarray(times, dtype=float)
    f = np.asarray(f_neq, dtype=float)
    if times.size < 3:
        raise ValidationError("the Spohn rate needs at least 3 grid points")
    dfdt = np.empty_like(f)
    t0, t1, t2 = times[0], times[1], times[2]
    dfdt[0] = _one_sided(f[0], f[1], f[2], t1 - t0, t2 - t0)
    tm2, tm1, tm0 = times[-3], times[-2], times[-1]
    dfdt[-1] = -_one_sided(f[-1], f[-2], f[-3], tm0 - tm1, tm0 - tm2)
    for j in range(1, times.size - 1):
        h1 = times[j] - times[j - 1]
        h2 = times[j + 1] - times[j]
        dfdt[j] = (
            -h2 / (h1 * (h1 + h2)) * f[j - 1]
            + (h2 - h1) / (h1 * h2) * f[j]
            + h1 / (h2 * (h1 + h2)) * f[j + 1]
        )
    return -beta * dfdt


def _one_sided(f0, f1, f2, h1, h2):
    """Second-order one-sided derivative at the first of three points."""
    return (
        f0 * (-(h1 + h2) / (h1 * h2))
        + f1 * (h2 / (h1 * (h2 - h1)))
        + f2 * (-h1 / (h2 * (h2 - h1)))
    )


@dataclass(frozen=True)
class ThermoTrajectory:
    """Sampled diagnostics along one evolution.

    Columns mirror the CSV export: non-equilibrium free energy, relative
    entropy to the steady state and its classical/coherent split, the two
    distances, and the Spohn rate (empty when the grid is too short to
    differentiate).
    """

    times: np.ndarray
    f_neq: np.ndarray
    d_rel: np.ndarray
    p_classical: np.ndarray
    c_coherence: np.ndarray
    l1: np.ndarray
    t1: np.ndarray
    pi: np.ndarray
    beta: float
    f_eq: float
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        for name in ("times", "f_neq", "d_rel", "p_classical", "c_coherence", "l1", "t1", "pi"):
            object.__setattr__(self, name, frozen(np.asarray(getattr(self, name), dtype=float)))

    def __len__(self):
        return self.times.size

    def to_csv(self, path) -> None:
        """Fixed column order, 17 significant digits (golden-file friendly)."""
        with open(path, "w") as fh:
            cols = CSV_COLUMNS if self.pi.size else CSV_COLUMNS[:-1]
            fh.write(",".join(cols) + "\n")
            for j in range(len(self)):
                row = [
                    self.times[j], self.f_neq[j], self.d_rel[j], self.p_classical[j],
                    self.c_coherence[j], self.l1[j], self.t1[j],
                ]
                if self.pi.size:
                    row.append(self.pi[j])
                fh.write(",".join(_fmt(x) for x in row) + "\n")


def _fmt(x: float) -> str:
    if math.isinf(x):
        return "inf"
    return f"{x:.17g}"


def compute_trajectory(
    grid: EvolutionGrid, basis: SpectralBasis, beta: float, **meta
) -> ThermoTrajectory:
    """Evaluate all diagnostics for every state of an evolution grid."""
    h = basis.hamiltonian()
    tau_p = thermal_populations(basis, beta)
    tau_lab = basis.from_eigenbasis(np.diag(tau_p).astype(complex))
    f_eq = equilibrium_free_energy(basis, beta)
    log_tau = log_gibbs_weights(basis.energies, beta)

    n = len(grid)
    f_neq = np.empty(n)
    d_rel = np.empty(n)
    p_cl = np.empty(n)
    c_coh = np.empty(n)
    l1 = np.empty(n)
    t1 = np.empty(n)
    for j, state in enumerate(grid.states):
        rho_e = basis.to_eigenbasis(state.entries)
        pops = np.clip(np.real(np.diag(rho_e)), 0.0, None)
        s_rho = _entropy(rho_e)
        energy = float(np.real(np.trace(h @ state.entries)))
        f_neq[j] = energy - s_rho / beta
        # D via populations against log-space Gibbs weights: stable at any beta
        p_cl[j] = max(float(xlogx(pops).sum() - pops @ log_tau), 0.0)
        c_coh[j] = max(_entropy_of_populations(pops) - s_rho, 0.0)
        d_rel[j] = p_cl[j] + c_coh[j]
        l1[j] = float(np.abs(rho_e - np.diag(tau_p)).sum())
        t1[j] = trace_distance(state.entries, tau_lab)
    pi = spohn_rate(grid.times, f_neq, beta) if n >= 3 else np.empty(0)
    return ThermoTrajectory(
        times=grid.times, f_neq=f_neq, d_rel=d_rel, p_classical=p_cl,
        c_coherence=c_coh, l1=l1, t1=t1, pi=pi, beta=beta, f_eq=f_eq, meta=meta,
    )


def fit_decay_rate(times, values, t_min=None, floor=1e-12) -> float:
    """Least-squares slope of ln(values) over the usable tail.

    Points before ``t_min`` or with values at/below ``floor`` are excluded;
    the fit needs at least three surviving points.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    mask = values > floor
    if t_min is not None:
        mask &= times >= t_min
    if mask.sum() < 3:
        raise ValidationError("not enough points above the floor to fit a rate")
    slope, _ = np.polyfit(times[mask], np.log(values[mask]), 1)
    return float(slope)
