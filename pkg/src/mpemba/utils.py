"""Small linear-algebra helpers used throughout the package.

Vectorization convention, fixed package-wide: row-major, i.e.
``vec(|n><m|)`` sits at index ``n*d + m``.  Under this convention
``vec(A X B) = (A kron B^T) vec(X)``.
"""

from __future__ import annotations

import numpy as np

#: Pauli matrices in the computational (sigma_z) basis.
SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
IDENTITY_2 = np.eye(2, dtype=complex)


def vec(matrix: np.ndarray) -> np.ndarray:
    """Row-major vectorization of a square matrix."""
    return np.asarray(matrix).reshape(-1)


def unvec(vector: np.ndarray, dim: int) -> np.ndarray:
    """Inverse of :func:`vec`."""
    return np.asarray(vector).reshape(dim, dim)


def hermitize(matrix: np.ndarray) -> np.ndarray:
    """Project onto the Hermitian part, (A + A^dag)/2."""
    return 0.5 * (matrix + matrix.conj().T)


def herm_defect(matrix: np.ndarray) -> float:
    """Largest entrywise deviation from Hermiticity."""
    return float(np.abs(matrix - matrix.conj().T).max())


def frozen(array: np.ndarray) -> np.ndarray:
    """Return a read-only copy of ``array`` (immutability of shared values)."""
    out = np.array(array, copy=True)
    out.setflags(write=False)
    return out


def kron_chain(factors) -> np.ndarray:
    """Kronecker product of a sequence of matrices, left to right."""
    out = np.eye(1, dtype=complex)
    for f in factors:
        out = np.kron(out, f)
    return out


def embed_site_operator(op2: np.ndarray, site: int, n_sites: int) -> np.ndarray:
    """Embed a single-site operator into an ``n_sites``-fold tensor product."""
    return kron_chain(op2 if j == site else IDENTITY_2 for j in range(n_sites))


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary via QR of a complex Ginibre matrix.

    The R-diagonal phase fix makes the distribution exactly uniform rather
    than QR-convention dependent.
    """
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    phases = np.diag(r).copy()
    phases /= np.abs(phases)
    return q * phases


def log_gibbs_weights(energies: np.ndarray, beta: float) -> np.ndarray:
    """Log-populations of the Gibbs distribution, ln p_n = -beta e_n - ln Z.

    Computed with a max-shift so that arbitrarily large ``beta * energy``
    spans never overflow.
    """
    energies = np.asarray(energies, dtype=float)
    shifted = -beta * (energies - energies.min())
    return shifted - np.log(np.exp(shifted).sum())


def xlogx(p: np.ndarray) -> np.ndarray:
    """Elementwise p ln p with the continuous extension 0 ln 0 = 0."""
    p = np.asarray(p, dtype=float)
    out = np.zeros_like(p)
    mask = p > 1e-300
    out[mask] = p[mask] * np.log(p[mask])
    return out
