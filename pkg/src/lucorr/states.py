"""State constructors, local-unitary encodings and state (de)serialization.

Pure states are 1-D complex amplitude arrays; mixed states are 2-D density
matrices. Both use the register ordering of :mod:`lucorr.qmath`.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import qmath
from .qmath import HERMITICITY_TOL, PSD_TOL

SQRT2 = np.sqrt(2.0)
NORM_TOL = 1e-12


class InvalidStateError(ValueError):
    pass


def normalize(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    nrm = np.linalg.norm(psi)
    if nrm == 0:
        raise InvalidStateError("zero vector cannot be normalized")
    return psi / nrm


def validate_pure(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    if psi.size < 2 or psi.size & (psi.size - 1):
        raise InvalidStateError(f"length {psi.size} is not a power of two")
    if abs(np.linalg.norm(psi) - 1.0) > NORM_TOL:
        raise InvalidStateError(f"state norm {np.linalg.norm(psi)!r} differs from 1")
    return psi


def validate_density(rho) -> np.ndarray:
    """Check Hermiticity, unit trace and positivity; returns the Hermitian part."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise InvalidStateError("density matrix must be square")
    qmath.n_qubits_of(rho)
    if np.max(np.abs(rho - rho.conj().T)) > HERMITICITY_TOL:
        raise InvalidStateError("density matrix is not Hermitian")
    rho = 0.5 * (rho + rho.conj().T)
    if abs(np.trace(rho).real - 1.0) > PSD_TOL:
        raise InvalidStateError(f"trace {np.trace(rho).real!r} differs from 1")
    if np.linalg.eigvalsh(rho)[0] < -PSD_TOL:
        raise InvalidStateError("density matrix has a negative eigenvalue")
    return rho


def as_density(state) -> np.ndarray:
    """Promote a ket to a density matrix; validate a matrix as-is."""
    state = np.asarray(state, dtype=complex)
    if state.ndim == 1:
        return qmath.ket_to_dm(validate_pure(state))
    return validate_density(state)


def n_qubits(state) -> int:
    state = np.asarray(state)
    return int(round(np.log2(state.shape[0])))


# -- named families -------------------------------------------------------


def make_psi_theta(theta: float) -> np.ndarray:
    """cos(theta)|01> + sin(theta)|10>."""
    return np.array([0.0, np.cos(theta), np.sin(theta), 0.0], dtype=complex)


def make_phi_theta(theta: float) -> np.ndarray:
    """cos(theta)|00> + sin(theta)|11>."""
    return np.array([np.cos(theta), 0.0, 0.0, np.sin(theta)], dtype=complex)


def make_phi_gamma(gamma: float) -> np.ndarray:
    """Maximally entangled family (|0>|psi0> + |1>|psi1>)/sqrt(2).

    ``psi0 = cos g|0> + sin g|1>`` and ``psi1 = -sin g|0> + cos g|1>``. At
    ``gamma = pi/2`` this is the singlet, which differs from
    (|01>+|10>)/sqrt(2) by a Z phase on qubit 0 and so has identical
    dynamics under dephasing and amplitude damping.
    """
    c, s = np.cos(gamma), np.sin(gamma)
    return np.array([c, s, -s, c], dtype=complex) / SQRT2


def bell_phi_plus() -> np.ndarray:
    return np.array([1.0, 0.0, 0.0, 1.0], dtype=complex) / SQRT2


def bell_psi_plus() -> np.ndarray:
    return np.array([0.0, 1.0, 1.0, 0.0], dtype=complex) / SQRT2


def graph_state() -> np.ndarray:
    """(|0+> + |1->)/sqrt(2)."""
    return np.array([1.0, 1.0, 1.0, -1.0], dtype=complex) / 2.0


def ghz(n: int) -> np.ndarray:
    psi = np.zeros(2**n, dtype=complex)
    psi[0] = psi[-1] = 1 / SQRT2
    return psi


def basis_state(bits: str) -> np.ndarray:
    psi = np.zeros(2 ** len(bits), dtype=complex)
    psi[int(bits, 2)] = 1.0
    return psi


def random_pure_state(n: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    return v / np.linalg.norm(v)


def random_density_matrix(n: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    d = 2**n
    k = d if rank is None else rank
    a = rng.normal(size=(d, k)) + 1j * rng.normal(size=(d, k))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


# -- encodings --------------------------------------------------------------


def rz(phi: float) -> np.ndarray:
    return np.array([[np.exp(-0.5j * phi), 0.0], [0.0, np.exp(0.5j * phi)]], dtype=complex)


def ry(beta: float) -> np.ndarray:
    c, s = np.cos(beta / 2), np.sin(beta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def euler_unitary(angles) -> np.ndarray:
    """Rz(alpha) Ry(beta) Rz(delta)."""
    alpha, beta, delta = angles
    return rz(alpha) @ ry(beta) @ rz(delta)


def euler_unitaries(angles: np.ndarray) -> np.ndarray:
    """Vectorized :func:`euler_unitary` over an ``(M, 3)`` array; returns ``(M, 2, 2)``."""
    angles = np.asarray(angles, dtype=float).reshape(-1, 3)
    a, b, d = angles[:, 0], angles[:, 1], angles[:, 2]
    c, s = np.cos(b / 2), np.sin(b / 2)
    ep = np.exp(-0.5j * (a + d))
    em = np.exp(-0.5j * (a - d))
    out = np.empty((angles.shape[0], 2, 2), dtype=complex)
    out[:, 0, 0] = ep * c
    out[:, 0, 1] = -em * s
    out[:, 1, 0] = em.conj() * s
    out[:, 1, 1] = ep.conj() * c
    return out


@dataclass(frozen=True)
class Encoding:
    """One (alpha, beta, delta) Euler triple per qubit; global phase dropped."""

    angles: tuple[tuple[float, float, float], ...]

    def __post_init__(self):
        angles = tuple(tuple(float(x) for x in a) for a in self.angles)
        if any(len(a) != 3 for a in angles):
            raise ValueError("each qubit needs exactly three Euler angles")
        object.__setattr__(self, "angles", angles)

    @classmethod
    def identity(cls, n: int) -> "Encoding":
        return cls(((0.0, 0.0, 0.0),) * n)

    @classmethod
    def from_flat(cls, flat) -> "Encoding":
        flat = [float(x) for x in flat]
        return cls(tuple(tuple(flat[i : i + 3]) for i in range(0, len(flat), 3)))

    @property
    def n_qubits(self) -> int:
        return len(self.angles)

    def unitaries(self) -> list[np.ndarray]:
        return [euler_unitary(a) for a in self.angles]

    def matrix(self) -> np.ndarray:
        return qmath.tensor_product(*self.unitaries())

    def wrapped(self) -> "Encoding":
        """Same encoding with every angle reduced into [0, 2*pi)."""
        two_pi = 2 * np.pi
        return Encoding(tuple(tuple(float(x % two_pi) for x in a) for a in self.angles))

    def to_json(self) -> list[list[float]]:
        return [list(a) for a in self.angles]


def apply_encoding(state, enc: Encoding) -> np.ndarray:
    """Apply U_1 x ... x U_N to a ket or density matrix."""
    state = np.asarray(state, dtype=complex)
    n = n_qubits(state)
    if enc.n_qubits != n:
        raise ValueError(f"encoding has {enc.n_qubits} qubits, state has {n}")
    u = enc.matrix()
    if state.ndim == 1:
        return u @ state
    return u @ state @ u.conj().T


# -- JSON -------------------------------------------------------------------


def state_to_json(psi) -> dict:
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    return {
        "n_qubits": n_qubits(psi),
        "amplitudes": [[float(z.real), float(z.imag)] for z in psi],
    }


def state_from_json(obj: dict) -> np.ndarray:
    amps = np.array([complex(re, im) for re, im in obj["amplitudes"]], dtype=complex)
    if amps.size != 2 ** int(obj["n_qubits"]):
        raise InvalidStateError("amplitude count does not match n_qubits")
    if abs(np.linalg.norm(amps) - 1.0) > 1e-9:
        raise InvalidStateError("amplitudes are not normalized")
    return normalize(amps)
