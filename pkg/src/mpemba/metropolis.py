"""Stochastic search for overlap-eliminating transformations.

Two annealers operate on a decomposed generator spectrum:

* ``unitary_metropolis`` walks over products of single-qubit unitaries
  U_j = exp(i alpha) R_z(beta) R_x(gamma) R_z(delta), one random parameter
  re-drawn per proposal, minimizing the summed overlap magnitude with a set
  of target modes.  A fermionic variant appends sigma^z strings,
  U^f = prod_j U_j (sigma_j^z)^{mod(L-j, 2)}, respecting anticommutation.
* ``swap_metropolis`` specializes to states diagonal in the energy basis:
  proposals permute four randomly chosen populations, which preserves both
  the population multiset and diagonality exactly.

Both accept a better proposal always and a worse one with probability
exp(-(C' - C)/T_eff); the effective temperature cools by the factor ``tau``
on every acceptance.  The nano/micro/macro loop budgets follow the
re-varied-parameter reading: nano re-varies the same parameter, micro
re-selects a parameter of the same qubit, macro re-selects the qubit
(L * M macro rounds in total).  The best state seen is returned, since the
threshold crossing is what defines convergence.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations

import numpy as np

from .errors import ValidationError
from .operators import DensityMatrix
from .spectral import GeneratorSpectrum
from .utils import SIGMA_Z, kron_chain

_PERMS4 = tuple(p for p in permutations(range(4)) if p != (0, 1, 2, 3))
_PERMS2 = ((1, 0),)


@dataclass(frozen=True)
class MetropolisConfig:
    """Annealing schedule and loop budgets."""

    cooling_tau: float
    threshold_eps: float
    nano_n: int = 200
    micro_m: int = 20
    macro_big_m: int = 20
    target_modes: tuple = (2,)
    seed: int = 0
    max_total_iterations: int = 1_000_000

    def __post_init__(self):
        if not 0.0 < self.cooling_tau < 1.0:
            raise ValidationError("cooling_tau must lie in (0, 1)")
        if self.threshold_eps <= 0:
            raise ValidationError("threshold_eps must be positive")
        for name in ("nano_n", "micro_m", "macro_big_m", "max_total_iterations"):
            if getattr(self, name) < 1:
                raise ValidationError(f"{name} must be a positive integer")
        object.__setattr__(self, "target_modes", tuple(int(k) for k in self.target_modes))
        for k in self.target_modes:
            if k < 2:
                raise ValidationError("target modes are 1-based decaying modes (k >= 2)")


@dataclass(frozen=True)
class UnitaryAnsatz:
    """Per-qubit Euler parameters (alpha, beta, gamma, delta), wrapped mod 2pi."""

    params: np.ndarray  # shape (L, 4)
    fermionic: bool = False

    def __post_init__(self):
        params = np.mod(np.asarray(self.params, dtype=float), 2.0 * np.pi)
        if params.ndim != 2 or params.shape[1] != 4:
            raise ValidationError("ansatz parameters must have shape (L, 4)")
        object.__setattr__(self, "params", params)

    @property
    def n_qubits(self) -> int:
        return self.params.shape[0]


@dataclass(frozen=True)
class OptimizationTrace:
    """Per-proposal record of the annealing walk."""

    iteration: np.ndarray
    cost: np.ndarray
    t_eff: np.ndarray
    accepted: np.ndarray
    converged: bool
    best_cost: float

    def __len__(self):
        return self.iteration.size

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("iteration,cost,T_eff,accepted\n")
            for j in range(len(self)):
                fh.write(
                    f"{self.iteration[j]},{self.cost[j]:.17g},"
                    f"{self.t_eff[j]:.17g},{int(self.accepted[j])}\n"
                )


class _TraceRecorder:
    def __init__(self):
        self.iteration = []
        self.cost = []
        self.t_eff = []
        self.accepted = []

    def record(self, it, cost, t_eff, accepted):
        self.iteration.append(it)
        self.cost.append(cost)
        self.t_eff.append(t_eff)
        self.accepted.append(accepted)

    def finish(self, converged, best_cost):
        return OptimizationTrace(
            iteration=np.asarray(self.iteration, dtype=int),
            cost=np.asarray(self.cost, dtype=float),
            t_eff=np.asarray(self.t_eff, dtype=float),
            accepted=np.asarray(self.accepted, dtype=bool),
            converged=bool(converged),
            best_cost=float(best_cost),
        )


def metropolis_accept(c_new: float, c_old: float, t_eff: float, rng) -> bool:
    """Accept downhill moves always, uphill with exp(-(C'-C)/T_eff)."""
    if c_new < c_old:
        return True
    if t_eff <= 0.0:
        return c_new == c_old
    return bool(rng.uniform() < np.exp(-(c_new - c_old) / t_eff))


def cost(spectrum: GeneratorSpectrum, rho, target_modes) -> float:
    """Sum of overlap magnitudes |Tr(l_k rho)| over the targeted modes."""
    if not target_modes:
        return 0.0
    rho_e = spectrum._to_eig(rho)
    return _cost_eig(spectrum, rho_e, tuple(target_modes))


def _cost_eig(spectrum: GeneratorSpectrum, rho_e: np.ndarray, target_modes) -> float:
    total = 0.0
    for k in target_modes:
        idx = k - 1
        if not 1 <= k <= spectrum.n_modes:
            raise ValidationError(f"target mode {k} outside spectrum")
        tag = spectrum._tags[idx]
        if tag[0] == "dense":
            val = np.einsum("nm,mn->", spectrum._payload["lefts"][tag[1]], rho_e)
        elif tag[0] == "pop":
            val = spectrum._payload["pop_lefts"][:, tag[1]] @ np.diag(rho_e)
        else:
            val = rho_e[tag[1], tag[2]]
        total += abs(val)
    return float(total)


def _rz(theta: float) -> np.ndarray:
    return np.array([[np.exp(-0.5j * theta), 0.0], [0.0, np.exp(0.5j * theta)]])


def _rx(theta: float) -> np.ndarray:
    c, s = np.cos(0.5 * theta), np.sin(0.5 * theta)
    return np.array([[c, -1j * s], [-1j * s, c]])


def build_ansatz_unitary(ansatz: UnitaryAnsatz) -> np.ndarray:
    """Assemble the full product unitary from the per-qubit parameters.

    The fermionic flag multiplies qubit j's factor by sigma_z^{mod(L-j, 2)}
    (1-based j), the alternating Jordan-Wigner string pattern; since all factors act
    on distinct sites the product collapses to one Kronecker chain.
    """
    n = ansatz.n_qubits
    factors = []
    for j in range(n):
        a, b, g, d = ansatz.params[j]
        u_j = np.exp(1j * a) * (_rz(b) @ _rx(g) @ _rz(d))
        if ansatz.fermionic and (n - (j + 1)) % 2 == 1:
            u_j = u_j @ SIGMA_Z
        factors.append(u_j)
    return kron_chain(factors)


def unitary_metropolis(
    spectrum: GeneratorSpectrum,
    rho,
    config: MetropolisConfig,
    *,
    fermionic: bool = False,
    cost_fn=None,
):
    """Anneal a product-of-single-qubit-unitaries to kill target overlaps.

    Returns ``(rho_best, ansatz_best, trace)``.  ``rho`` must live on
    qubits (dim = 2^L, lab basis).  ``cost_fn(rho_lab_matrix) -> float``
    optionally replaces the default summed-overlap cost (used e.g. to
    prepare states at a chosen overlap).  Non-convergence within the budgets
    is reported through ``trace.converged``, not an exception.
    """
    rho_m = rho.entries if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    d = rho_m.shape[0]
    n_qubits = int(np.log2(d))
    if 2**n_qubits != d:
        raise ValidationError("unitary metropolis requires a 2^L-dimensional state")
    if cost_fn is None:
        targets = tuple(config.target_modes)
        v = spectrum.basis.vectors

        def cost_fn(rho_lab):
            return _cost_eig(spectrum, v.conj().T @ rho_lab @ v, targets)

    # short-circuit: a state already below threshold needs no transformation
    identity_cost = cost_fn(rho_m)
    if identity_cost < config.threshold_eps:
        ansatz = UnitaryAnsatz(np.zeros((n_qubits, 4)), fermionic=False)
        recorder = _TraceRecorder()
        return (
            DensityMatrix(rho_m),
            ansatz,
            recorder.finish(True, identity_cost),
        )

    rng = np.random.default_rng(config.seed)
    params = rng.uniform(0.0, 2.0 * np.pi, size=(n_qubits, 4))
    ansatz = UnitaryAnsatz(params, fermionic=fermionic)
    u = build_ansatz_unitary(ansatz)
    current_cost = cost_fn(u @ rho_m @ u.conj().T)
    t_eff = 1.0

    best_cost = current_cost
    best_params = params.copy()
    recorder = _TraceRecorder()
    iteration = 0
    converged = best_cost < config.threshold_eps

    if not converged:
        for _macro in range(n_qubits * config.macro_big_m):
            qubit = int(rng.integers(n_qubits))
            for _micro in range(config.micro_m):
                par = int(rng.integers(4))
                for _nano in range(config.nano_n):
                    iteration += 1
                    old = params[qubit, par]
                    params[qubit, par] = (old + rng.uniform(0.0, 2.0 * np.pi)) % (2.0 * np.pi)
                    u = build_ansatz_unitary(UnitaryAnsatz(params, fermionic=fermionic))
                    new_cost = cost_fn(u @ rho_m @ u.conj().T)
                    accepted = metropolis_accept(new_cost, current_cost, t_eff, rng)
                    if accepted:
                        current_cost = new_cost
                        t_eff *= config.cooling_tau
                        if new_cost < best_cost:
                            best_cost = new_cost
                            best_params = params.copy()
                    else:
                        params[qubit, par] = old
                    recorder.record(iteration, current_cost, t_eff, accepted)
                    if best_cost < config.threshold_eps:
                        converged = True
                        break
                    if iteration >= config.max_total_iterations:
                        break
                if converged or iteration >= config.max_total_iterations:
                    break
            if converged or iteration >= config.max_total_iterations:
                break

    best_ansatz = UnitaryAnsatz(best_params, fermionic=fermionic)
    u_best = build_ansatz_unitary(best_ansatz)
    rho_best = DensityMatrix(u_best @ rho_m @ u_best.conj().T)
    return rho_best, best_ansatz, recorder.finish(converged, best_cost)


def swap_metropolis(spectrum: GeneratorSpectrum, populations, config: MetropolisConfig):
    """Anneal population permutations to kill diagonal-mode overlaps.

    ``populations`` is the energy-basis population vector of a state that is
    diagonal in the energy eigenbasis.  Every targeted mode must itself be
    diagonal (a population mode).  Proposals permute four distinct entries
    (two below dimension 4, a documented fallback), so the population
    multiset is preserved exactly and coherences remain zero.
    """
    p = np.asarray(populations, dtype=float).copy()
    d = p.size
    if d != spectrum.dim:
        raise ValidationError("population vector does not match the spectrum dimension")
    if abs(p.sum() - 1.0) > 1e-10 or np.any(p < -1e-12):
        raise ValidationError("populations must form a probability vector")

    lefts = []
    for k in config.target_modes:
        left = spectrum.left(k)
        off = np.abs(left - np.diag(np.diag(left))).max()
        if off > 1e-9 * max(1.0, float(np.abs(left).max())):
            raise ValidationError(f"target mode {k} is not diagonal; swap search needs population modes")
        lefts.append(np.real_if_close(np.diag(left)))
    lmat = np.array(lefts) if lefts else np.zeros((0, d))

    def pcost(vec):
        return float(np.abs(lmat @ vec).sum()) if lmat.size else 0.0

    rng = np.random.default_rng(config.seed)
    current_cost = pcost(p)
    best_cost = current_cost
    best_p = p.copy()
    t_eff = 1.0
    recorder = _TraceRecorder()
    converged = best_cost < config.threshold_eps
    n_swap = 4 if d >= 4 else 2
    perms = _PERMS4 if n_swap == 4 else _PERMS2

    iteration = 0
    while not converged and iteration < config.max_total_iterations:
        iteration += 1
        idx = rng.choice(d, size=n_swap, replace=False)
        perm = perms[int(rng.integers(len(perms)))]
        proposal = p.copy()
        proposal[idx] = p[idx[list(perm)]]
        new_cost = pcost(proposal)
        accepted = metropolis_accept(new_cost, current_cost, t_eff, rng)
        if accepted:
            p = proposal
            current_cost = new_cost
            t_eff *= config.cooling_tau
            if new_cost < best_cost:
                best_cost = new_cost
                best_p = p.copy()
        recorder.record(iteration, current_cost, t_eff, accepted)
        if best_cost < config.threshold_eps:
            converged = True
    return best_p, recorder.finish(converged, best_cost)
