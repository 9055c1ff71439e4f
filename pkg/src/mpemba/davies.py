"""Davies generators: jump amplitudes, dense superoperator, block form.

A Davies generator thermalizes a system toward the Gibbs state of its
Hamiltonian.  For a non-degenerate Hamiltonian it splits into a classical
rate matrix acting on the energy-level populations plus an uncoupled,
diagonal action on each coherence.  Both forms are built here, and either
can be cross-checked against the other.

Rate convention (documented because literature varies): jump amplitudes are
``alpha = gamma * sqrt(w)``, so transition *rates* scale as ``gamma**2 * w``.
For a positive Bohr frequency ``x``:

    Bose:  w_down = 1 + n_B(x),  w_up = n_B(x),   n_B(x) = 1/(e^{beta x} - 1)
    Fermi: w_down = 1 - f(x),    w_up = f(x),     f(x)   = 1/(e^{beta x} + 1)

In both cases ``w_up / w_down = e^{-beta x}`` exactly (thermal detailed
balance), which is what makes the Gibbs state the fixed point.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateSpectrumError, ValidationError
from .operators import SpectralBasis
from .utils import frozen

#: Tolerance for the block/dense eigenvalue multiset comparison.
SPECTRUM_MATCH_TOL = 1e-8

VECTORIZATION_CONVENTION = "row-major: vec(|n><m|) -> index n*d + m"


@dataclass(frozen=True)
class BathSpec:
    """Thermal bath: inverse temperature, particle statistics, coupling."""

    beta: float
    statistics: str  # "bose" or "fermi"
    gamma: float

    def __post_init__(self):
        if self.beta < 0:
            raise ValidationError("bath beta must be >= 0")
        if self.statistics not in ("bose", "fermi"):
            raise ValidationError(f"unknown statistics {self.statistics!r}")
        if self.gamma <= 0:
            raise ValidationError("bath coupling gamma must be > 0")


def occupation_factors(x: float, bath: BathSpec) -> tuple[float, float]:
    """(w_down, w_up) for a positive Bohr frequency ``x``."""
    if x <= 0:
        raise DegenerateSpectrumError("zero Bohr frequency: levels are degenerate")
    bx = bath.beta * x
    if bath.statistics == "bose":
        if bx > 700:  # occupation underflows; exp(-x) is the limit
            n = float(np.exp(-bx))
        else:
            n = 1.0 / np.expm1(bx) if bx > 0 else np.inf
        return 1.0 + n, n
    f = float(np.exp(-bx)) if bx > 700 else 1.0 / (np.exp(bx) + 1.0)
    return 1.0 - f, f


class JumpMatrix:
    """All jump amplitudes of a Davies map, collected in one d x d matrix.

    ``amplitudes[i, k]`` is the amplitude of the transition from level k to
    level i (column = source).  Entries are nonnegative with a zero diagonal.
    """

    def __init__(self, amplitudes):
        amplitudes = np.asarray(amplitudes, dtype=float)
        if amplitudes.ndim != 2 or amplitudes.shape[0] != amplitudes.shape[1]:
            raise ValidationError("jump matrix must be square")
        if np.any(np.diag(amplitudes) != 0.0):
            raise ValidationError("jump matrix diagonal must be exactly zero")
        if np.any(amplitudes < 0):
            raise ValidationError("jump amplitudes must be nonnegative")
        self.amplitudes = frozen(amplitudes)
        self.dim = amplitudes.shape[0]

    def rates(self) -> np.ndarray:
        """Elementwise squared amplitudes (classical transition rates)."""
        return self.amplitudes**2

    def operators(self) -> list[np.ndarray]:
        """Jump operators alpha_{ik} |i><k| as dense matrices (energy basis)."""
        d = self.dim
        ops = []
        for i in range(d):
            for k in range(d):
                if i != k and self.amplitudes[i, k] != 0.0:
                    op = np.zeros((d, d), dtype=complex)
                    op[i, k] = self.amplitudes[i, k]
                    ops.append(op)
        return ops


def build_jump_matrix(basis: SpectralBasis, bath: BathSpec) -> JumpMatrix:
    """Davies jump amplitudes for every ordered pair of energy levels.

    For each pair with h_n > h_m the downward amplitude gamma*sqrt(w_down)
    sits at [m, n] and the upward amplitude gamma*sqrt(w_up) at [n, m].
    Degenerate bases are refused: a zero Bohr frequency has no well-defined
    thermal weight here, and the block construction assumes none occurs.
    """
    if basis.degeneracy_flag:
        raise DegenerateSpectrumError(
            "Hamiltonian is (near-)degenerate; the jump-matrix/block construction "
            "is undefined. Build the dense generator from explicit jump operators."
        )
    d = basis.dim
    J = np.zeros((d, d))
    for m in range(d):
        for n in range(m + 1, d):
            w_down, w_up = occupation_factors(basis.energies[n] - basis.energies[m], bath)
            J[m, n] = bath.gamma * np.sqrt(w_down)
            J[n, m] = bath.gamma * np.sqrt(w_up)
    return JumpMatrix(J)


def vectorized_lindbladian(hamiltonian: np.ndarray, jump_ops) -> np.ndarray:
    """Dense superoperator of a Lindblad generator, row-major vectorization.

    G = -i H (x) 1 + i 1 (x) H^T
        + sum_l [ L_l (x) conj(L_l) - (1/2) L_l^dag L_l (x) 1
                  - (1/2) 1 (x) (L_l^dag L_l)^T ]

    Works for any Hamiltonian (degenerate or not) and any jump operators.
    The L (x) conj(L) sum is evaluated with a single einsum contraction, so
    assembly stays usable up to the d = 32 ceiling.
    """
    H = np.asarray(hamiltonian, dtype=complex)
    d = H.shape[0]
    eye = np.eye(d, dtype=complex)
    G = -1j * np.kron(H, eye) + 1j * np.kron(eye, H.T)
    if jump_ops:
        ops = np.asarray(jump_ops, dtype=complex).reshape(-1, d, d)
        sandwich = np.einsum("lac,lbe->abce", ops, ops.conj(), optimize=True)
        G += sandwich.reshape(d * d, d * d)
        big_k = np.einsum("lca,lcb->ab", ops.conj(), ops)
        G -= 0.5 * np.kron(big_k, eye) + 0.5 * np.kron(eye, big_k.T)
    return G


def build_dense_generator(basis: SpectralBasis, jumps: JumpMatrix) -> np.ndarray:
    """Dense vectorized generator in the energy eigenbasis (H diagonal)."""
    if basis.dim != jumps.dim:
        raise ValidationError("basis and jump matrix dimensions differ")
    H = np.diag(basis.energies).astype(complex)
    return vectorized_lindbladian(H, jumps.operators())


def build_population_block(jumps: JumpMatrix) -> np.ndarray:
    """Classical rate matrix on the populations: G_p = J_2 + J_s.

    J_2 is the elementwise square of the jump matrix and J_s the diagonal of
    negated column sums, so every column of G_p sums to zero (probability
    conservation).
    """
    j2 = jumps.rates()
    return j2 - np.diag(j2.sum(axis=0))


def build_coherence_diagonal(basis: SpectralBasis, jumps: JumpMatrix):
    """Diagonal action of the generator on each coherence |n><m|, n != m.

    Returns a list of ``(n, m, value)`` with
    value = -i(h_n - h_m) - (1/2) sum_i (J[i,n]^2 + J[i,m]^2).
    Entries for (n, m) and (m, n) are complex conjugates.  Positions in the
    vectorized generator follow the package's row-major convention; the test
    suite cross-validates them against :func:`build_dense_generator`.
    """
    if basis.degeneracy_flag:
        raise DegenerateSpectrumError(
            "coherence block is undefined for a degenerate Hamiltonian"
        )
    escape = jumps.rates().sum(axis=0)
    entries = []
    for n in range(basis.dim):
        for m in range(basis.dim):
            if n != m:
                value = complex(
                    -0.5 * (escape[n] + escape[m]),
                    -(basis.energies[n] - basis.energies[m]),
                )
                entries.append((n, m, value))
    return entries


@dataclass(frozen=True)
class DaviesGenerator:
    """A thermalizing generator in (up to) two representations.

    ``pop_block``/``coh_diagonal`` form the fast block representation,
    available only for non-degenerate Hamiltonians.  ``dense`` is the full
    d^2 x d^2 superoperator.  Both live in the energy eigenbasis recorded in
    ``basis``.  ``sector_labels`` optionally marks a conserved charge per
    level (e.g. fermion parity); eigenmodes connecting different sectors are
    then superselected away by the spectral decomposition.
    """

    basis: SpectralBasis
    pop_block: np.ndarray | None = None
    coh_diagonal: tuple | None = None
    dense: np.ndarray | None = None
    sector_labels: tuple | None = None
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.pop_block is None and self.dense is None:
            raise ValidationError("generator needs a block or a dense representation")
        if self.pop_block is not None:
            object.__setattr__(self, "pop_block", frozen(self.pop_block))
            col_defect = float(np.abs(self.pop_block.sum(axis=0)).max())
            if col_defect > 1e-12 * max(1.0, float(np.abs(self.pop_block).max())):
                raise ValidationError(f"population block columns sum to {col_defect:.2e}, not 0")
            if self.coh_diagonal is None:
                raise ValidationError("block representation requires the coherence diagonal")
            object.__setattr__(self, "coh_diagonal", tuple(self.coh_diagonal))
            for n, m, value in self.coh_diagonal:
                if value.real > 1e-14:
                    raise ValidationError(f"coherence ({n},{m}) has positive real part")
        if self.dense is not None:
            object.__setattr__(self, "dense", frozen(self.dense))
        if self.sector_labels is not None:
            object.__setattr__(self, "sector_labels", tuple(self.sector_labels))

    @property
    def dim(self) -> int:
        return self.basis.dim

    @property
    def has_block(self) -> bool:
        return self.pop_block is not None

    @property
    def has_dense(self) -> bool:
        return self.dense is not None

    def block_eigenvalues(self) -> np.ndarray:
        """Eigenvalue multiset of the block form (populations + coherences)."""
        if not self.has_block:
            raise ValidationError("generator has no block representation")
        pop = np.linalg.eigvals(self.pop_block)
        coh = np.array([value for _, _, value in self.coh_diagonal])
        return np.concatenate([pop.astype(complex), coh])


def davies_generator(
    basis: SpectralBasis, bath: BathSpec, *, dense: bool = False
) -> DaviesGenerator:
    """Assemble the Davies generator for a Hamiltonian eigenbasis and a bath.

    Block form always (requires non-degenerate basis); dense form on request.
    """
    jumps = build_jump_matrix(basis, bath)
    return DaviesGenerator(
        basis=basis,
        pop_block=build_population_block(jumps),
        coh_diagonal=build_coherence_diagonal(basis, jumps),
        dense=build_dense_generator(basis, jumps) if dense else None,
        meta={"bath": bath},
    )


def generator_from_operators(
    basis: SpectralBasis, lab_ops, *, sector_labels=None
) -> DaviesGenerator:
    """Dense generator from explicit lab-basis jump operators.

    Used by models whose dissipators are given directly (and whose
    Hamiltonians may be degenerate).  Operators are rotated into the energy
    eigenbasis before vectorization.
    """
    ops_eig = [basis.to_eigenbasis(np.asarray(op, dtype=complex)) for op in lab_ops]
    dense = vectorized_lindbladian(np.diag(basis.energies).astype(complex), ops_eig)
    return DaviesGenerator(basis=basis, dense=dense, sector_labels=sector_labels)


def verify_block_dense_spectrum(gen: DaviesGenerator, tol: float = SPECTRUM_MATCH_TOL) -> float:
    """Greedy multiset distance between block and dense eigenvalues.

    Returns the largest matching discrepancy; raises if either form is
    missing.  A value above ``tol`` means the two constructions disagree.
    """
    if not (gen.has_block and gen.has_dense):
        raise ValidationError("need both block and dense representations to compare")
    block = gen.block_eigenvalues()
    dense = np.linalg.eigvals(gen.dense)
    return eigenvalue_multiset_distance(block, dense)


def eigenvalue_multiset_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Largest pairing distance between two eigenvalue multisets."""
    a = np.sort_complex(np.asarray(a, dtype=complex))
    b = np.sort_complex(np.asarray(b, dtype=complex))
    if a.size != b.size:
        raise ValidationError("eigenvalue multisets have different sizes")
    remaining = list(b)
    worst = 0.0
    for x in a:
        dists = [abs(x - y) for y in remaining]
        j = int(np.argmin(dists))
        worst = max(worst, dists[j])
        remaining.pop(j)
    return worst


def verify_detailed_balance(g_dense: np.ndarray, energies, tau_populations) -> float:
    """Max KMS detailed-balance violation of the dissipative part.

    The unitary part -i[H, .] is subtracted using ``energies`` (the generator
    is expected in the energy eigenbasis), leaving the dissipator D.  Quantum
    detailed balance requires <A, D^dag B>_tau = <D^dag A, B>_tau for all
    operators, with <A, B>_tau = Tr(tau A^dag B).  The violation is maximized
    over the full elemental-matrix basis.
    """
    g_dense = np.asarray(g_dense, dtype=complex)
    d2 = g_dense.shape[0]
    d = int(round(np.sqrt(d2)))
    energies = np.asarray(energies, dtype=float)
    tau = np.asarray(tau_populations, dtype=float)

    H = np.diag(energies).astype(complex)
    eye = np.eye(d, dtype=complex)
    unitary_part = -1j * np.kron(H, eye) + 1j * np.kron(eye, H.T)
    diss_adj = (g_dense - unitary_part).conj().T

    # columns of diss_adj applied to each elemental matrix E_cd
    images = np.empty((d, d, d, d), dtype=complex)  # [c, d, :, :] = D^dag(E_cd)
    for c in range(d):
        for e in range(d):
            unit = np.zeros((d, d), dtype=complex)
            unit[c, e] = 1.0
            images[c, e] = (diss_adj @ unit.reshape(-1)).reshape(d, d)

    worst = 0.0
    tau_mat = np.diag(tau).astype(complex)
    for a in range(d):
        for b in range(d):
            e_ab = np.zeros((d, d), dtype=complex)
            e_ab[a, b] = 1.0
            lhs_base = tau_mat @ e_ab.conj().T
            img_ab_dag = images[a, b].conj().T
            for c in range(d):
                for e in range(d):
                    e_cd = np.zeros((d, d), dtype=complex)
                    e_cd[c, e] = 1.0
                    lhs = np.trace(lhs_base @ images[c, e])
                    rhs = np.trace(tau_mat @ img_ab_dag @ e_cd)
                    worst = max(worst, abs(lhs - rhs))
    return worst


def export_generator(gen: DaviesGenerator, path) -> None:
    """Dump the block representation as JSON with the convention header."""
    if not gen.has_block:
        raise ValidationError("only block-form generators are exported")
    payload = {
        "vectorization": VECTORIZATION_CONVENTION,
        "dim": gen.dim,
        "energies": list(map(float, gen.basis.energies)),
        "pop_block": [[float(x) for x in row] for row in gen.pop_block],
        "coh_diagonal": [
            {"n": int(n), "m": int(m), "re": float(v.real), "im": float(v.imag)}
            for n, m, v in gen.coh_diagonal
        ],
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=1)
