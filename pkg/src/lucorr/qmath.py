"""Dense linear algebra on qubit registers.

Qubit 0 is the most significant bit of a basis index, so tensor-factor order
equals qubit order.
"""
from __future__ import annotations

from typing import Iterable, NamedTuple

import numpy as np

HERMITICITY_TOL = 1e-9
PSD_TOL = 1e-10
RECON_TOL = 1e-9


class LinAlgContractError(ValueError):
    """Raised when an input violates a numerical precondition."""


class HermitianSpectrum(NamedTuple):
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def n_qubits_of(m: np.ndarray) -> int:
    dim = m.shape[0]
    n = int(round(np.log2(dim)))
    if 2**n != dim:
        raise LinAlgContractError(f"dimension {dim} is not a power of two")
    return n


def _check_indices(indices: Iterable[int], n_qubits: int) -> list[int]:
    idx = sorted(set(int(i) for i in indices))
    for i in idx:
        if i < 0 or i >= n_qubits:
            raise IndexError(f"qubit index {i} out of range for {n_qubits} qubits")
    return idx


def _check_square(m: np.ndarray, n_qubits: int) -> None:
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise LinAlgContractError("matrix must be square")
    if m.shape[0] != 2**n_qubits:
        raise LinAlgContractError(f"matrix of dim {m.shape[0]} does not match {n_qubits} qubits")


def tensor_product(*mats: np.ndarray) -> np.ndarray:
    """Kronecker product, first argument on the slowest index."""
    out = np.asarray(mats[0])
    for m in mats[1:]:
        out = np.kron(out, m)
    return out


def partial_trace(m: np.ndarray, keep: Iterable[int], n_qubits: int) -> np.ndarray:
    """Trace out every qubit not in ``keep``; kept qubits stay in ascending order."""
    m = np.asarray(m)
    _check_square(m, n_qubits)
    keep = _check_indices(keep, n_qubits)
    if not keep:
        raise ValueError("keep must be nonempty")
    drop = [q for q in range(n_qubits) if q not in keep]
    t = m.reshape([2] * (2 * n_qubits))
    # trace pairs from the highest index down so earlier axis numbers stay valid
    for q in sorted(drop, reverse=True):
        n_now = t.ndim // 2
        t = np.trace(t, axis1=q, axis2=q + n_now)
    d = 2 ** len(keep)
    return t.reshape(d, d)


def partial_transpose(m: np.ndarray, subsystem: Iterable[int], n_qubits: int) -> np.ndarray:
    m = np.asarray(m)
    _check_square(m, n_qubits)
    sub = _check_indices(subsystem, n_qubits)
    t = m.reshape([2] * (2 * n_qubits))
    axes = list(range(2 * n_qubits))
    for q in sub:
        axes[q], axes[q + n_qubits] = axes[q + n_qubits], axes[q]
    return t.transpose(axes).reshape(m.shape)


def eigh(m: np.ndarray) -> HermitianSpectrum:
    """Hermitian eigendecomposition with eigenvalues in descending order."""
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise LinAlgContractError("matrix must be square")
    if np.max(np.abs(m - m.conj().T), initial=0.0) > HERMITICITY_TOL:
        raise LinAlgContractError("matrix is not Hermitian within tolerance")
    h = 0.5 * (m + m.conj().T)
    w, v = np.linalg.eigh(h)
    return HermitianSpectrum(w[::-1].copy(), v[:, ::-1].copy())


def eigvalsh(m: np.ndarray) -> np.ndarray:
    """Descending eigenvalues of a Hermitian matrix."""
    m = np.asarray(m)
    if np.max(np.abs(m - m.conj().T), initial=0.0) > HERMITICITY_TOL:
        raise LinAlgContractError("matrix is not Hermitian within tolerance")
    return np.linalg.eigvalsh(0.5 * (m + m.conj().T))[::-1]


def clip_spectrum(w: np.ndarray) -> np.ndarray:
    """Zero out rounding-level negatives; anything below ``-PSD_TOL`` is an error."""
    if w.size and w.min() < -PSD_TOL:
        raise LinAlgContractError(f"eigenvalue {w.min():.3e} below -{PSD_TOL}")
    return np.where(w < 0, 0.0, w)


def matrix_sqrt_psd(m: np.ndarray) -> np.ndarray:
    w, v = eigh(m)
    w = clip_spectrum(w)
    return (v * np.sqrt(w)) @ v.conj().T


def trace_norm(m: np.ndarray) -> float:
    return float(np.sum(np.linalg.svd(np.asarray(m), compute_uv=False)))


def ket_to_dm(psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    return np.outer(psi, psi.conj())


def apply_local(psi: np.ndarray, u: np.ndarray, qubits: list[int], n_qubits: int) -> np.ndarray:
    """Apply a ``2^k x 2^k`` operator to the listed qubits of a state vector."""
    k = len(qubits)
    t = np.asarray(psi).reshape([2] * n_qubits)
    ut = np.asarray(u).reshape([2] * (2 * k))
    t = np.tensordot(ut, t, axes=(list(range(k, 2 * k)), list(qubits)))
    # tensordot puts the new axes first; move them back into place
    t = np.moveaxis(t, list(range(k)), list(qubits))
    return t.reshape(-1)
