"""Spectral decomposition of generators and state evolution.

Eigenvalues are ordered by ascending modulus of the real part with the zero
mode first; left/right eigenmatrices are normalized to Tr(l_j r_k) =
delta_jk with no conjugation on l, so the amplitude of mode k in a state is
literally Tr(l_k rho).  Mode indices in the public API are 1-based: mode 1
is the steady state, mode 2 defines the spectral gap.

Two internal representations exist.  A dense decomposition stores all
eigenmatrices explicitly (fine up to d ~ 16-32).  A block decomposition of a
Davies generator keeps the population modes as vectors and the coherence
modes as index pairs, which never touches a d^2 x d^2 array and stays
numerically stable at low temperature, where the dense eigenbasis becomes
exponentially ill-conditioned.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.linalg

from .davies import DaviesGenerator
from .errors import (
    DefectiveGeneratorError,
    NoSteadyStateError,
    ValidationError,
)
from .operators import DensityMatrix, SpectralBasis
from .utils import frozen, herm_defect, hermitize, log_gibbs_weights

#: Eigenvector-matrix condition number above which a generator is treated as
#: numerically defective.
DEFECTIVE_COND = 1e12
ZERO_EIGENVALUE_TOL = 1e-9
#: Relative threshold for calling an eigenvalue's imaginary part nonzero.
IMAG_TOL = 1e-9
#: Positivity slack for states reconstructed along an evolution.
EVOLUTION_PSD_TOL = 1e-8


class GapInfo(NamedTuple):
    value: float
    complex_pair: bool


@dataclass(frozen=True)
class EvolutionGrid:
    """States sampled along an evolution at ascending times (units 1/J)."""

    times: np.ndarray
    states: tuple

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        if times.ndim != 1 or times.size != len(self.states):
            raise ValidationError("times and states have inconsistent lengths")
        if times.size > 1 and np.any(np.diff(times) <= 0):
            raise ValidationError("times must be strictly ascending")
        object.__setattr__(self, "times", frozen(times))
        object.__setattr__(self, "states", tuple(self.states))

    def __len__(self):
        return self.times.size


class GeneratorSpectrum:
    """Ordered eigenvalues with paired left/right eigenmatrices.

    Not constructed directly; use :func:`decompose`.
    """

    def __init__(self, eigenvalues, basis, steady_state, mode_tags, payload):
        self.eigenvalues = frozen(np.asarray(eigenvalues, dtype=complex))
        self.basis = basis
        self.steady_state = steady_state
        self._tags = tuple(mode_tags)  # ("pop", j) | ("coh", n, m) | ("dense", j)
        self._payload = payload
        self.gap_is_complex = bool(
            self.n_modes > 1 and _is_complex_mode(self.eigenvalues, 1)
        )

    # -- structure ---------------------------------------------------------

    @property
    def n_modes(self) -> int:
        return self.eigenvalues.size

    @property
    def dim(self) -> int:
        return self.basis.dim

    @property
    def kind(self) -> str:
        return self._payload["kind"]

    def mode_tag(self, k: int):
        """Structural tag of 1-based mode k."""
        return self._tags[_check_mode_index(k, self.n_modes)]

    def is_coherent_mode(self, k: int) -> bool:
        """True when mode k lives in the coherence sector.

        Block spectra know this structurally; for dense spectra the criterion
        is a nonzero imaginary part of the eigenvalue.
        """
        idx = _check_mode_index(k, self.n_modes)
        tag = self._tags[idx]
        if tag[0] != "dense":
            return tag[0] == "coh"
        lam = self.eigenvalues[idx]
        return abs(lam.imag) > IMAG_TOL * max(1.0, abs(lam))

    def coherent_modes(self) -> list[int]:
        """1-based indices of all coherence-sector modes."""
        return [k for k in range(2, self.n_modes + 1) if self.is_coherent_mode(k)]

    # -- eigenmatrices -----------------------------------------------------

    def right(self, k: int) -> np.ndarray:
        """Right eigenmatrix of 1-based mode k, in the energy eigenbasis."""
        idx = _check_mode_index(k, self.n_modes)
        tag = self._tags[idx]
        d = self.dim
        if tag[0] == "dense":
            return self._payload["rights"][tag[1]].copy()
        if tag[0] == "pop":
            return np.diag(self._payload["pop_rights"][:, tag[1]]).astype(complex)
        out = np.zeros((d, d), dtype=complex)
        out[tag[1], tag[2]] = 1.0
        return out

    def left(self, k: int) -> np.ndarray:
        """Left eigenmatrix of 1-based mode k, in the energy eigenbasis."""
        idx = _check_mode_index(k, self.n_modes)
        tag = self._tags[idx]
        d = self.dim
        if tag[0] == "dense":
            return self._payload["lefts"][tag[1]].copy()
        if tag[0] == "pop":
            return np.diag(self._payload["pop_lefts"][:, tag[1]]).astype(complex)
        out = np.zeros((d, d), dtype=complex)
        out[tag[2], tag[1]] = 1.0
        return out

    @property
    def rights(self) -> list[np.ndarray]:
        """All right eigenmatrices (materializes block modes on access)."""
        return [self.right(k) for k in range(1, self.n_modes + 1)]

    @property
    def lefts(self) -> list[np.ndarray]:
        """All left eigenmatrices (materializes block modes on access)."""
        return [self.left(k) for k in range(1, self.n_modes + 1)]

    # -- amplitudes ---------------------------------------------------------

    def amplitudes(self, rho) -> np.ndarray:
        """Tr(l_k rho) for every mode, as a vector indexed by k-1."""
        return self._amplitudes_eig(self._to_eig(rho))

    def _amplitudes_eig(self, rho_e: np.ndarray) -> np.ndarray:
        out = np.empty(self.n_modes, dtype=complex)
        for idx, tag in enumerate(self._tags):
            if tag[0] == "dense":
                out[idx] = np.einsum("nm,mn->", self._payload["lefts"][tag[1]], rho_e)
            elif tag[0] == "pop":
                out[idx] = self._payload["pop_lefts"][:, tag[1]] @ np.diag(rho_e)
            else:
                out[idx] = rho_e[tag[1], tag[2]]
        return out

    def _to_eig(self, rho) -> np.ndarray:
        m = rho.entries if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
        return self.basis.to_eigenbasis(m)

    def project_physical(self, rho) -> DensityMatrix:
        """Project onto the operator sector this spectrum can represent.

        For superselected spectra (e.g. fermion parity) this is the pinching
        that removes sector-violating coherences; it is exactly what the
        retained eigenmodes reconstruct, and a CPTP map, so the result is a
        valid state.  Spectra without sector labels return the state as is.
        """
        labels = self._payload.get("sector_labels")
        rho_e = self._to_eig(rho)
        if labels is None:
            return rho if isinstance(rho, DensityMatrix) else DensityMatrix(rho_e)
        labels = np.asarray(labels)
        mask = labels[:, None] == labels[None, :]
        return DensityMatrix(self.basis.from_eigenbasis(hermitize(rho_e * mask)))


def _check_mode_index(k: int, n_modes: int) -> int:
    if not 1 <= k <= n_modes:
        raise ValidationError(f"mode index {k} outside 1..{n_modes}")
    return k - 1


def _is_complex_mode(eigenvalues: np.ndarray, idx: int) -> bool:
    lam = eigenvalues[idx]
    if abs(lam.imag) <= IMAG_TOL * max(1.0, abs(lam)):
        return False
    return bool(np.any(np.abs(eigenvalues - lam.conjugate()) <= 1e-6 * max(1.0, abs(lam))))


# ---------------------------------------------------------------------------
# decomposition
# ---------------------------------------------------------------------------


def decompose(generator, basis: SpectralBasis | None = None, *, prefer: str = "auto"):
    """Biorthogonal spectral decomposition of a generator.

    ``generator`` is a :class:`DaviesGenerator` or a dense superoperator
    matrix (then ``basis`` is required).  ``prefer`` picks the representation
    when both are available: "auto" favors the block form, "dense" forces the
    full decomposition.

    Raises :class:`DefectiveGeneratorError` when the eigenvector matrix is
    ill-conditioned beyond ``1e12`` and :class:`NoSteadyStateError` when no
    eigenvalue sits within ``1e-9`` of zero.
    """
    if isinstance(generator, DaviesGenerator):
        use_block = generator.has_block and prefer != "dense"
        if not use_block and not generator.has_dense:
            raise ValidationError("dense decomposition requested but no dense form present")
        if use_block:
            return _decompose_block(generator)
        return _decompose_dense(
            generator.dense, generator.basis, sector_labels=generator.sector_labels
        )
    if basis is None:
        raise ValidationError("decomposing a raw matrix requires the spectral basis")
    return _decompose_dense(np.asarray(generator, dtype=complex), basis)


def _mode_order(eigenvalues, digests):
    """Ordering: zero mode first, then |Re| ascending, Im ascending, digest."""
    zero_idx = int(np.argmin(np.abs(eigenvalues)))
    if abs(eigenvalues[zero_idx]) > ZERO_EIGENVALUE_TOL:
        raise NoSteadyStateError(
            f"no zero eigenvalue within {ZERO_EIGENVALUE_TOL:g} "
            f"(closest: {eigenvalues[zero_idx]:.3e})"
        )
    rest = [i for i in range(eigenvalues.size) if i != zero_idx]
    rest.sort(
        key=lambda i: (
            round(abs(eigenvalues[i].real), 12),
            round(eigenvalues[i].imag, 12),
            digests[i],
        )
    )
    return [zero_idx] + rest


def _decompose_dense(g_dense, basis, sector_labels=None):
    d = basis.dim
    if g_dense.shape != (d * d, d * d):
        raise ValidationError("generator matrix size does not match basis dimension")

    if sector_labels is not None:
        labels = np.asarray(sector_labels)
        keep = [n * d + m for n in range(d) for m in range(d) if labels[n] == labels[m]]
        drop = [i for i in range(d * d) if i not in set(keep)]
        coupling = float(np.abs(g_dense[np.ix_(keep, drop)]).max()) if drop else 0.0
        if coupling > 1e-12 * max(1.0, float(np.abs(g_dense).max())):
            raise ValidationError(
                "sector labels do not define a conserved grading of the generator"
            )
        positions = keep
        matrix = g_dense[np.ix_(keep, keep)]
    else:
        positions = None
        matrix = g_dense

    eigvals, vr = scipy.linalg.eig(matrix)
    cond = np.linalg.cond(vr)
    if not np.isfinite(cond) or cond > DEFECTIVE_COND:
        raise DefectiveGeneratorError(
            f"eigenvector matrix condition number {cond:.3e} exceeds {DEFECTIVE_COND:g}"
        )
    left_rows = np.linalg.inv(vr)

    def expand(vec_small):
        if positions is None:
            return vec_small
        full = np.zeros(d * d, dtype=complex)
        full[positions] = vec_small
        return full

    n_modes = eigvals.size
    rights = np.empty((n_modes, d, d), dtype=complex)
    lefts = np.empty((n_modes, d, d), dtype=complex)
    for j in range(n_modes):
        rights[j] = expand(vr[:, j]).reshape(d, d)
        # Tr(l_j r_k) = delta_jk  <=>  vec(l_j^T) = inv(R) row j
        lefts[j] = expand(left_rows[j]).reshape(d, d).T

    digests = [
        tuple(np.round(rights[j], 9).reshape(-1)[: min(8, d * d)].view(float))
        for j in range(n_modes)
    ]
    order = _mode_order(eigvals, digests)
    eigvals = eigvals[order]
    rights = rights[order]
    lefts = lefts[order]

    trace = complex(np.trace(rights[0]))
    if abs(trace) < 1e-12:
        raise NoSteadyStateError("zero-mode eigenmatrix is traceless")
    rights[0] = rights[0] / trace
    lefts[0] = lefts[0] * trace
    steady = DensityMatrix(
        basis.from_eigenbasis(hermitize(rights[0])), psd_tol=EVOLUTION_PSD_TOL
    )

    tags = [("dense", j) for j in range(n_modes)]
    payload = {
        "kind": "dense",
        "rights": rights,
        "lefts": lefts,
        "sector_labels": tuple(sector_labels) if sector_labels is not None else None,
    }
    return GeneratorSpectrum(eigvals, basis, steady, tags, payload)


def _obeys_detailed_balance(gp: np.ndarray, energies: np.ndarray, beta: float) -> bool:
    """Upward/downward rate ratios equal the Boltzmann factors (to roundoff)."""
    d = gp.shape[0]
    for m in range(d):
        for n in range(m + 1, d):
            expected = gp[m, n] * np.exp(-beta * (energies[n] - energies[m]))
            if abs(gp[n, m] - expected) > 1e-10 * max(1.0, gp[m, n]):
                return False
    return True


def _decompose_block(gen: DaviesGenerator):
    basis = gen.basis
    d = basis.dim
    gp = np.asarray(gen.pop_block, dtype=float)

    bath = gen.meta.get("bath")
    if bath is not None and _obeys_detailed_balance(gp, basis.energies, bath.beta):
        # Detailed balance makes D^{-1/2} G_p D^{1/2} symmetric (D = Gibbs
        # weights); an eigh of that form gives exactly biorthonormal pairs
        # and stays accurate at any temperature.
        log_p = log_gibbs_weights(basis.energies, bath.beta)
        sqrt_p = np.exp(0.5 * log_p)
        sym = np.sqrt(gp * gp.T)
        np.fill_diagonal(sym, np.diag(gp))
        w, u = scipy.linalg.eigh(sym)
        pop_vals = w.astype(complex)
        pop_rights = u * sqrt_p[:, None]
        pop_lefts = u / sqrt_p[:, None]
    else:
        pop_vals, vr = scipy.linalg.eig(gp)
        cond = np.linalg.cond(vr)
        if not np.isfinite(cond) or cond > DEFECTIVE_COND:
            raise DefectiveGeneratorError(
                f"population block eigenvectors have condition number {cond:.3e}"
            )
        pop_rights = vr
        pop_lefts = np.linalg.inv(vr).T

    coh = list(gen.coh_diagonal)
    eigvals = np.concatenate([pop_vals, np.array([v for _, _, v in coh], dtype=complex)])
    tags = [("pop", j) for j in range(d)] + [("coh", n, m) for n, m, _ in coh]
    digests = [(0.0,)] * len(tags)
    order = _mode_order(eigvals, digests)
    eigvals = eigvals[order]
    tags = [tags[i] for i in order]

    # normalize the stationary mode to unit trace (and its left to identity)
    zero_tag = tags[0]
    if zero_tag[0] != "pop":
        raise NoSteadyStateError("stationary mode is not in the population sector")
    j0 = zero_tag[1]
    trace = pop_rights[:, j0].sum()
    if abs(trace) < 1e-12:
        raise NoSteadyStateError("stationary population mode is traceless")
    pop_rights = pop_rights.copy()
    pop_lefts = pop_lefts.copy()
    pop_rights[:, j0] /= trace
    pop_lefts[:, j0] *= trace

    steady_diag = np.clip(np.real(pop_rights[:, j0]), 0.0, None)
    steady_diag /= steady_diag.sum()
    steady = DensityMatrix(basis.from_eigenbasis(np.diag(steady_diag).astype(complex)))

    gmat = np.zeros((d, d), dtype=complex)
    for n, m, v in coh:
        gmat[n, m] = v
    payload = {
        "kind": "block",
        "pop_rights": pop_rights,
        "pop_lefts": pop_lefts,
        "pop_block": gp,
        "coh_matrix": gmat,
    }
    return GeneratorSpectrum(eigvals, basis, steady, tags, payload)


# ---------------------------------------------------------------------------
# derived quantities
# ---------------------------------------------------------------------------


def spectral_gap(spectrum: GeneratorSpectrum) -> GapInfo:
    """|Re(lambda_2)| and whether lambda_2 belongs to a complex pair."""
    if spectrum.n_modes < 2:
        raise ValidationError("spectrum has no decaying mode")
    return GapInfo(
        float(abs(spectrum.eigenvalues[1].real)),
        _is_complex_mode(spectrum.eigenvalues, 1),
    )


def amplitude(spectrum: GeneratorSpectrum, k: int, rho) -> complex:
    """Overlap Tr(l_k rho) of 1-based mode k with a state."""
    rho_e = spectrum._to_eig(rho)
    idx = _check_mode_index(k, spectrum.n_modes)
    tag = spectrum._tags[idx]
    if tag[0] == "dense":
        return complex(np.einsum("nm,mn->", spectrum._payload["lefts"][tag[1]], rho_e))
    if tag[0] == "pop":
        return complex(spectrum._payload["pop_lefts"][:, tag[1]] @ np.diag(rho_e))
    return complex(rho_e[tag[1], tag[2]])


def evolve_spectral(spectrum: GeneratorSpectrum, rho_i, times) -> EvolutionGrid:
    """Evolve a state through the spectral expansion of the generator.

    rho(t) = tau + sum_{k>=2} Tr(l_k rho_i) r_k exp(lambda_k t).

    Block spectra propagate the population sector by its exact semigroup
    (equivalent to the mode sum, but immune to the exponentially large
    expansion coefficients that appear at low temperature) and each
    coherence by its closed-form exponential.
    """
    times = np.asarray(times, dtype=float)
    rho_e = spectrum._to_eig(rho_i)
    basis = spectrum.basis
    if spectrum.kind == "block":
        p0 = np.real(np.diag(rho_e)).copy()
        pops = _propagate_populations(spectrum._payload["pop_block"], p0, times)
        gmat = spectrum._payload["coh_matrix"]
        states = []
        for j, t in enumerate(times):
            out = rho_e * np.exp(gmat * t)
            np.fill_diagonal(out, pops[j])
            states.append(_package_state(out, basis))
        return EvolutionGrid(times, states)

    amps = spectrum._amplitudes_eig(rho_e)
    rights = spectrum._payload["rights"]
    tau_e = basis.to_eigenbasis(spectrum.steady_state.entries)
    phases = np.exp(np.outer(times, spectrum.eigenvalues[1:]))
    deltas = np.einsum("tk,k,knm->tnm", phases, amps[1:], rights[1:], optimize=True)
    states = [_package_state(tau_e + deltas[j], basis) for j in range(times.size)]
    return EvolutionGrid(times, states)


def evolve_direct(generator, rho_i, times, basis: SpectralBasis | None = None) -> EvolutionGrid:
    """Propagate by the matrix exponential of the dense generator.

    Stepwise scaling-and-squaring (scipy.linalg.expm) between grid points;
    the independent oracle for :func:`evolve_spectral`.
    """
    if isinstance(generator, DaviesGenerator):
        if not generator.has_dense:
            raise ValidationError("direct evolution requires the dense generator")
        g_dense = generator.dense
        basis = generator.basis
    else:
        if basis is None:
            raise ValidationError("direct evolution of a raw matrix requires the basis")
        g_dense = np.asarray(generator, dtype=complex)
    times = np.asarray(times, dtype=float)
    d = basis.dim
    rho_e = basis.to_eigenbasis(
        rho_i.entries if isinstance(rho_i, DensityMatrix) else np.asarray(rho_i, dtype=complex)
    )
    state_vec = rho_e.reshape(-1)
    propagators: dict[float, np.ndarray] = {}
    states = []
    prev_t = 0.0
    for t in times:
        dt = t - prev_t
        if dt != 0.0:
            key = round(dt, 15)
            if key not in propagators:
                propagators[key] = scipy.linalg.expm(g_dense * dt)
            state_vec = propagators[key] @ state_vec
        prev_t = t
        states.append(_package_state(state_vec.reshape(d, d), basis))
    return EvolutionGrid(times, states)


def _propagate_populations(gp: np.ndarray, p0: np.ndarray, times: np.ndarray) -> np.ndarray:
    """Stepwise semigroup propagation of a population vector."""
    out = np.empty((times.size, p0.size))
    propagators: dict[float, np.ndarray] = {}
    p = p0.copy()
    prev_t = 0.0
    for j, t in enumerate(times):
        dt = t - prev_t
        if dt != 0.0:
            key = round(dt, 15)
            if key not in propagators:
                propagators[key] = scipy.linalg.expm(gp * dt)
            p = propagators[key] @ p
        prev_t = t
        out[j] = p
    return out


def _package_state(matrix_e: np.ndarray, basis: SpectralBasis) -> DensityMatrix:
    defect = herm_defect(matrix_e)
    if defect > 1e-9 * max(1.0, float(np.abs(matrix_e).max())):
        raise RuntimeError(
            f"evolved state lost Hermiticity (defect {defect:.2e}); "
            "conjugate mode pairing is broken"
        )
    return DensityMatrix(
        basis.from_eigenbasis(hermitize(matrix_e)), psd_tol=EVOLUTION_PSD_TOL
    )
