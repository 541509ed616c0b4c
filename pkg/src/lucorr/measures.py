"""Entropic correlation quantifiers and two-qubit entanglement measures.

Entropies are in bits. ``negativity`` is ``(||rho^T_A||_1 - 1) / 2`` (0.5 for
a Bell state); ``doubled_negativity`` is twice that, the convention under
which the amplitude-damped Bell state gives ``(1-p)^2`` and the singlet
fraction bound reads ``F <= (1 + N)/2``.
"""
from __future__ import annotations

from typing import Iterable, NamedTuple

import numpy as np
from scipy.optimize import minimize

from . import kernels, qmath
from .states import InvalidStateError, as_density, euler_unitaries

PURITY_TOL = 1e-9
ENTROPY_CLIP = 1e-9

YY = np.kron(np.array([[0, -1j], [1j, 0]]), np.array([[0, -1j], [1j, 0]]))

# 12^3 starting grid and simplex settings for the singlet-fraction search
SINGLET_GRID = 12
SIMPLEX_OPTIONS = {"maxiter": 200, "xatol": 1e-10, "fatol": 1e-14}


def _require_two_qubits(rho: np.ndarray) -> None:
    if rho.shape != (4, 4):
        raise ValueError(f"two-qubit state required, got dimension {rho.shape[0]}")


def entropy(state) -> float:
    """Von Neumann entropy in bits."""
    rho = as_density(state)
    w = qmath.clip_spectrum(qmath.eigvalsh(rho))
    w = w[w > 0]
    s = float(-np.sum(w * np.log2(w)))
    return max(s, 0.0)


def binary_entropy(x: float) -> float:
    if x <= 0.0 or x >= 1.0:
        return 0.0
    return float(-x * np.log2(x) - (1 - x) * np.log2(1 - x))


def _bipartition(part: Iterable[int], n: int) -> tuple[list[int], list[int]]:
    a = sorted(set(int(q) for q in part))
    b = [q for q in range(n) if q not in a]
    if not a or not b or any(q < 0 or q >= n for q in a):
        raise ValueError(f"trivial or invalid bipartition {a} of {n} qubits")
    return a, b


def mutual_information(state, part: Iterable[int]) -> float:
    """I(A:B) = S(A) + S(B) - S(AB) with A the listed qubits."""
    rho = as_density(state)
    n = qmath.n_qubits_of(rho)
    a, b = _bipartition(part, n)
    i = (
        entropy(qmath.partial_trace(rho, a, n))
        + entropy(qmath.partial_trace(rho, b, n))
        - entropy(rho)
    )
    return i if i > ENTROPY_CLIP else max(i, 0.0)


def total_correlations(state) -> float:
    """Sum of single-qubit marginal entropies minus the global entropy."""
    rho = as_density(state)
    n = qmath.n_qubits_of(rho)
    if n == 1:
        return 0.0
    t = sum(entropy(qmath.partial_trace(rho, [q], n)) for q in range(n)) - entropy(rho)
    return max(t, 0.0)


# eigenvalues of rho below this are rounding noise and are dropped before
# building the Wootters tau matrix; otherwise sqrt() amplifies 1e-17 into 1e-8
RANK_TOL = 1e-14


def concurrence(state) -> float:
    """Wootters concurrence.

    The lambda_i are the singular values of ``tau = W^T (Y x Y) W`` with
    ``rho = W W^dag`` built from the clipped spectrum of rho.
    """
    rho = as_density(state)
    _require_two_qubits(rho)
    w, v = np.linalg.eigh(rho)
    w = np.where(w > RANK_TOL, w, 0.0)
    big_w = v * np.sqrt(w)
    lam = np.linalg.svd(big_w.T @ YY @ big_w, compute_uv=False)
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def concurrence_from_spectrum(state) -> float:
    """Concurrence from square roots of the eigenvalues of rho (Y x Y) rho* (Y x Y)."""
    rho = as_density(state)
    _require_two_qubits(rho)
    ev = np.linalg.eigvals(rho @ YY @ rho.conj() @ YY).real
    lam = np.sort(np.sqrt(np.clip(ev, 0.0, None)))[::-1]
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def concurrence_from_omega(state) -> float:
    """Concurrence from the singular values of sqrt(sqrt(rho) R sqrt(rho)).

    Slower twin of :func:`concurrence`, kept as a cross-check.
    """
    rho = as_density(state)
    _require_two_qubits(rho)
    sr = qmath.matrix_sqrt_psd(rho)
    inner = sr @ YY @ rho.conj() @ YY @ sr
    inner = 0.5 * (inner + inner.conj().T)
    w = qmath.matrix_sqrt_psd(inner)
    lam = np.linalg.svd(w, compute_uv=False)
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def entanglement_of_formation(state) -> float:
    c = min(concurrence(state), 1.0)
    return binary_entropy(0.5 * (1.0 + np.sqrt(1.0 - c * c)))


def negativity(state, part: Iterable[int] = (0,)) -> float:
    rho = as_density(state)
    n = qmath.n_qubits_of(rho)
    a, _ = _bipartition(part, n)
    pt = qmath.partial_transpose(rho, a, n)
    return max(0.0, (qmath.trace_norm(pt) - 1.0) / 2.0)


def doubled_negativity(state, part: Iterable[int] = (0,)) -> float:
    return 2.0 * negativity(state, part)


class SingletFraction(NamedTuple):
    fraction: float
    fidelity: float
    angles: tuple[float, float, float]


def singlet_fraction(state) -> SingletFraction:
    """Maximal overlap with a maximally entangled state, and teleportation fidelity.

    Every maximally entangled two-qubit state is ``(U x I)|Phi+>`` up to a
    phase, so the maximum is searched over the three Euler angles of ``U``:
    a 12^3 grid seeds Nelder-Mead, and the best refined point wins (ties go
    to the lexicographically smallest angle triple).
    """
    rho = as_density(state)
    _require_two_qubits(rho)
    g = 2 * np.pi * np.arange(SINGLET_GRID) / SINGLET_GRID
    grid = np.array(np.meshgrid(g, g, g, indexing="ij")).reshape(3, -1).T
    vals = kernels.bell_overlaps(rho, euler_unitaries(grid))

    def neg_overlap(x):
        return -float(kernels.bell_overlaps(rho, euler_unitaries(x))[0])

    order = np.lexsort((grid[:, 2], grid[:, 1], grid[:, 0], -np.round(vals, 12)))
    starts = grid[order[:4]]
    candidates = [(float(vals[order[0]]), tuple(grid[order[0]]))]
    for x0 in starts:
        res = minimize(neg_overlap, x0, method="Nelder-Mead", options=SIMPLEX_OPTIONS)
        candidates.append((-float(res.fun), tuple(float(v) for v in res.x)))
    best = max(v for v, _ in candidates)
    winners = sorted(a for v, a in candidates if v >= best - 1e-12)
    f = min(max(best, 0.0), 1.0)
    return SingletFraction(f, (2 * f + 1) / 3, winners[0])


def teleportation_fidelity(state) -> float:
    return singlet_fraction(state).fidelity


def _sqrt_low_rank(rho):
    w, v = qmath.eigh(rho)
    w = np.where(qmath.clip_spectrum(w) > RANK_TOL, w, 0.0)
    return (v * np.sqrt(w)) @ v.conj().T


def state_fidelity(rho, sigma) -> float:
    """Uhlmann fidelity ``||sqrt(rho) sqrt(sigma)||_1^2``; equals ``<psi|rho|psi>`` for pure ``sigma``."""
    rho, sigma = as_density(rho), as_density(sigma)
    if rho.shape != sigma.shape:
        raise ValueError("states must have the same dimension")
    f = qmath.trace_norm(_sqrt_low_rank(rho) @ _sqrt_low_rank(sigma)) ** 2
    return float(min(f, 1.0))


def system_env_entanglement(joint, system_qubits: Iterable[int]) -> float:
    """Entanglement between system and environment of a pure joint state: S(rho_S)."""
    joint = np.asarray(joint, dtype=complex)
    rho = as_density(joint)
    purity = float(np.real(np.trace(rho @ rho)))
    if purity < 1.0 - PURITY_TOL:
        raise InvalidStateError(f"joint state is not pure (purity {purity:.12f})")
    n = qmath.n_qubits_of(rho)
    return entropy(qmath.partial_trace(rho, list(system_qubits), n))


SYSTEM_MEASURES = {
    "concurrence": concurrence,
    "negativity": negativity,
    "doubled_negativity": doubled_negativity,
    "T_S": total_correlations,
    "E_SE": entropy,
    "E_F": entanglement_of_formation,
    "singlet_fraction": lambda rho: singlet_fraction(rho).fraction,
}


def measure(rho, tag: str) -> float:
    """Evaluate a named quantifier on a system density matrix.

    ``E_SE`` here is the system entropy, which equals the system-environment
    entanglement whenever the joint state is pure.
    """
    try:
        fn = SYSTEM_MEASURES[tag]
    except KeyError:
        raise ValueError(f"unknown measure {tag!r}; expected one of {sorted(SYSTEM_MEASURES)}") from None
    return float(fn(rho))
