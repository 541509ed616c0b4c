"""Statevector simulation of the damping circuits and simulated Pauli tomography.

Register layout for the damping circuits: system qubits 0, 1 and their
environment qubits 2, 3. Bitstrings print qubit 0 first.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from . import qmath, states

DEFAULT_SHOTS = 8192

_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.diag([1, -1]).astype(complex)
_I = np.eye(2, dtype=complex)
_SDG = np.diag([1, -1j])
PAULIS = {"I": _I, "X": _X, "Y": _Y, "Z": _Z}

# rotation taking each Pauli eigenbasis to the computational basis
_BASIS_CHANGE = {"Z": _I, "X": _H, "Y": _H @ _SDG}

GATE_KINDS = ("X", "H", "SDG", "CNOT", "RY", "CRY")
GATE_ALIASES = {"S†": "SDG", "Sdg": "SDG", "Ry": "RY", "ControlledRy": "CRY", "CRy": "CRY", "CX": "CNOT"}


class CircuitError(ValueError):
    pass


@dataclass(frozen=True)
class Gate:
    kind: str
    targets: tuple[int, ...]
    controls: tuple[int, ...] = ()
    theta: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", GATE_ALIASES.get(self.kind, self.kind))

    def matrix(self) -> np.ndarray:
        k = self.kind
        if k == "X":
            return _X
        if k == "H":
            return _H
        if k == "SDG":
            return _SDG
        if k == "RY":
            return states.ry(self.theta)
        if k == "CNOT":
            return _controlled(_X)
        if k == "CRY":
            return _controlled(states.ry(self.theta))
        raise CircuitError(f"unknown gate kind {k!r}")

    def qubits(self) -> list[int]:
        return list(self.controls) + list(self.targets)


def _controlled(u):
    m = np.eye(4, dtype=complex)
    m[2:, 2:] = u
    return m


@dataclass
class Circuit:
    n_qubits: int
    gates: list[Gate] = field(default_factory=list)

    def add(self, kind, targets, controls=(), theta=None) -> "Circuit":
        g = Gate(kind, tuple(np.atleast_1d(targets).tolist()), tuple(controls), theta)
        self._validate(g)
        self.gates.append(g)
        return self

    def _validate(self, g: Gate) -> None:
        if g.kind not in GATE_KINDS:
            raise CircuitError(f"unknown gate kind {g.kind!r}")
        qs = g.qubits()
        if len(set(qs)) != len(qs) or any(q < 0 or q >= self.n_qubits for q in qs):
            raise CircuitError(f"bad qubit indices {qs} for {self.n_qubits} qubits")
        n_ctrl = 1 if g.kind in ("CNOT", "CRY") else 0
        if len(g.controls) != n_ctrl or len(g.targets) != 1:
            raise CircuitError(f"{g.kind} needs {n_ctrl} control(s) and one target")
        if g.kind in ("RY", "CRY") and (g.theta is None or not np.isfinite(g.theta)):
            raise CircuitError(f"{g.kind} needs a finite angle")


def build_ad_circuit(initial: str, theta: float) -> Circuit:
    """Bell pair (``"Phi0"`` or ``"PhiPi2"``) sent through amplitude damping with p = sin^2(theta/2).

    Each system qubit drives a controlled-Ry(theta) onto its environment
    qubit, followed by a CNOT from the environment back onto the system.
    """
    if initial not in ("Phi0", "PhiPi2"):
        raise CircuitError("initial must be 'Phi0' or 'PhiPi2'")
    c = Circuit(4)
    if initial == "PhiPi2":
        c.add("X", 1)
    c.add("H", 0).add("CNOT", 1, controls=(0,))
    for s in (0, 1):
        e = s + 2
        c.add("CRY", e, controls=(s,), theta=theta)
        c.add("CNOT", s, controls=(e,))
    return c


def theta_for_p(p: float) -> float:
    return 2.0 * np.arcsin(np.sqrt(p))


def simulate(c: Circuit) -> np.ndarray:
    psi = np.zeros(2**c.n_qubits, dtype=complex)
    psi[0] = 1.0
    for g in c.gates:
        c._validate(g)
        psi = qmath.apply_local(psi, g.matrix(), g.qubits(), c.n_qubits)
    return psi


# -- readout model ------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ReadoutModel:
    """Per-qubit column-stochastic confusion matrices: ``C[r, t] = P(report r | true t)``."""

    confusion: tuple[np.ndarray, ...]

    def __post_init__(self):
        mats = tuple(np.asarray(m, dtype=float) for m in self.confusion)
        for m in mats:
            if m.shape != (2, 2) or np.any(m < 0) or np.any(m > 1) or np.max(np.abs(m.sum(axis=0) - 1)) > 1e-12:
                raise ValueError("confusion matrices must be 2x2 column-stochastic")
        object.__setattr__(self, "confusion", mats)

    @classmethod
    def ideal(cls, n: int) -> "ReadoutModel":
        return cls(tuple(np.eye(2) for _ in range(n)))

    @classmethod
    def symmetric_flip(cls, n: int, flip: float) -> "ReadoutModel":
        m = np.array([[1 - flip, flip], [flip, 1 - flip]])
        return cls(tuple(m.copy() for _ in range(n)))

    @property
    def n_qubits(self) -> int:
        return len(self.confusion)

    def full(self) -> np.ndarray:
        return qmath.tensor_product(*self.confusion)

    def to_json(self):
        return [m.tolist() for m in self.confusion]


def _rng(seed: int, *stream: int) -> np.random.Generator:
    # counter-based generator, one independent stream per (seed, stream...)
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), *map(int, stream)])))


def setting_probabilities(psi: np.ndarray, setting: str, qubits=None) -> np.ndarray:
    """Outcome distribution of measuring ``qubits`` in the Pauli bases of ``setting``."""
    psi = np.asarray(psi, dtype=complex)
    n = states.n_qubits(psi)
    qubits = list(range(len(setting))) if qubits is None else list(qubits)
    if len(qubits) != len(setting):
        raise ValueError("setting length must match the measured qubits")
    for q, b in zip(qubits, setting):
        psi = qmath.apply_local(psi, _BASIS_CHANGE[b], [q], n)
    probs = np.abs(psi.reshape([2] * n)) ** 2
    rest = tuple(q for q in range(n) if q not in qubits)
    probs = probs.sum(axis=rest) if rest else probs
    # axes of `probs` are the measured qubits in ascending order
    probs = np.moveaxis(probs, list(range(len(qubits))), np.argsort(np.argsort(qubits)).tolist())
    p = probs.reshape(-1)
    return p / p.sum()


def _bitstrings(k: int) -> list[str]:
    return ["".join(b) for b in itertools.product("01", repeat=k)]


def sample_counts(psi, setting: str, shots: int, readout: ReadoutModel | None, seed: int, qubits=None, stream: int = 0):
    """Sample ``shots`` bitstrings for one Pauli setting, passed through the readout model."""
    if shots < 1:
        raise ValueError("shots must be at least 1")
    p_true = setting_probabilities(psi, setting, qubits)
    k = len(setting)
    p_rep = p_true if readout is None else readout.full() @ p_true
    p_rep = np.clip(p_rep, 0.0, None)
    n = _rng(seed, stream).multinomial(shots, p_rep / p_rep.sum())
    return {b: int(c) for b, c in zip(_bitstrings(k), n)}


def calibrate(readout: ReadoutModel, shots: int, seed: int) -> ReadoutModel:
    """Estimate per-qubit confusion matrices from basis-state preparation circuits."""
    if shots < 1:
        raise ValueError("shots must be at least 1")
    k = readout.n_qubits
    tallies = np.zeros((k, 2, 2))
    for idx, bits in enumerate(_bitstrings(k)):
        counts = sample_counts(states.basis_state(bits), "Z" * k, shots, readout, seed, stream=10_000 + idx)
        for rep, c in counts.items():
            for q in range(k):
                tallies[q, int(rep[q]), int(bits[q])] += c
    mats = tuple(t / t.sum(axis=0, keepdims=True) for t in tallies)
    return ReadoutModel(mats)


# -- tomography ---------------------------------------------------------------


@dataclass
class TomographyRecord:
    settings: list[str]
    shots: int
    counts: dict[str, dict[str, int]]
    readout_seed: int | None = None

    def to_json(self) -> dict:
        return {
            "settings": list(self.settings),
            "shots": self.shots,
            "counts": {s: dict(self.counts[s]) for s in self.settings},
            "readout_seed": self.readout_seed,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "TomographyRecord":
        rec = cls(list(obj["settings"]), int(obj["shots"]), {s: dict(c) for s, c in obj["counts"].items()}, obj.get("readout_seed"))
        for s in rec.settings:
            if sum(rec.counts[s].values()) != rec.shots:
                raise ValueError(f"counts for {s} do not sum to shots")
        return rec


def pauli_settings(k: int) -> list[str]:
    return ["".join(s) for s in itertools.product("XYZ", repeat=k)]


def measure_tomography(psi, shots: int, readout: ReadoutModel | None, seed: int, qubits=(0, 1)) -> TomographyRecord:
    qubits = list(qubits)
    settings = pauli_settings(len(qubits))
    counts = {
        s: sample_counts(psi, s, shots, readout, seed, qubits=qubits, stream=i) for i, s in enumerate(settings)
    }
    return TomographyRecord(settings, shots, counts, readout_seed=seed)


def mitigate(freqs: np.ndarray, model: ReadoutModel) -> np.ndarray:
    """Invert the readout model, clip negative quasi-probabilities and renormalize."""
    q = np.linalg.solve(model.full(), freqs)
    q = np.clip(q, 0.0, None)
    return q / q.sum()


def psd_project(m: np.ndarray) -> np.ndarray:
    """Closest unit-trace PSD matrix by eigenvalue truncation and redistribution.

    Walks the spectrum from the most negative eigenvalue up, zeroing each
    one whose share of the accumulated deficit would still leave it
    negative, and spreads the deficit evenly over the survivors.
    """
    w, v = np.linalg.eigh(0.5 * (m + m.conj().T))
    w = w[::-1] / np.sum(w)
    v = v[:, ::-1]
    d = w.size
    lam = np.zeros(d)
    acc = 0.0
    i = d
    while i > 0 and w[i - 1] + acc / i < 0:
        acc += w[i - 1]
        i -= 1
    lam[:i] = w[:i] + acc / i
    return (v * lam) @ v.conj().T


def linear_inversion(freqs: dict[str, np.ndarray]) -> np.ndarray:
    """Hermitian unit-trace estimate from per-setting outcome frequencies."""
    settings = list(freqs)
    k = len(settings[0])
    expect = {}
    for label in itertools.product("IXYZ", repeat=k):
        label = "".join(label)
        if label == "I" * k:
            expect[label] = 1.0
            continue
        vals = []
        for s in settings:
            if all(l == "I" or l == b for l, b in zip(label, s)):
                signs = np.array(
                    [(-1) ** sum(int(bit) for bit, l in zip(bits, label) if l != "I") for bits in _bitstrings(k)]
                )
                vals.append(float(signs @ freqs[s]))
        expect[label] = float(np.mean(vals))
    rho = sum(expect[l] * qmath.tensor_product(*(PAULIS[c] for c in l)) for l in expect)
    return rho / 2**k


def reconstruct_from_frequencies(freqs: dict[str, np.ndarray], mitigation: ReadoutModel | None = None) -> np.ndarray:
    k = len(next(iter(freqs)))
    missing = set(pauli_settings(k)) - set(freqs)
    if missing:
        raise ValueError(f"incomplete tomography settings, missing {sorted(missing)}")
    if mitigation is not None:
        freqs = {s: mitigate(np.asarray(f, dtype=float), mitigation) for s, f in freqs.items()}
    return psd_project(linear_inversion(freqs))


def reconstruct(record: TomographyRecord, mitigation: ReadoutModel | None = None) -> np.ndarray:
    if record.shots <= 0:
        raise ValueError("shots must be positive")
    k = len(record.settings[0])
    order = _bitstrings(k)
    freqs = {s: np.array([record.counts[s].get(b, 0) for b in order], dtype=float) / record.shots for s in record.settings}
    return reconstruct_from_frequencies(freqs, mitigation)


def exact_frequencies(psi, qubits=(0, 1)) -> dict[str, np.ndarray]:
    return {s: setting_probabilities(psi, s, qubits) for s in pauli_settings(len(qubits))}


def averaged_tomography(
    c: Circuit,
    repetitions: int,
    shots: int = DEFAULT_SHOTS,
    readout: ReadoutModel | None = None,
    seed: int = 0,
    mitigate_readout: bool = True,
    qubits=(0, 1),
) -> list[np.ndarray]:
    """Repeat tomography of the circuit output; callers average measures, not matrices."""
    if repetitions < 1:
        raise ValueError("repetitions must be at least 1")
    psi = simulate(c)
    out = []
    for r in range(repetitions):
        rep_seed = int(np.random.SeedSequence([int(seed), r]).generate_state(1)[0])
        model = None
        if readout is not None and mitigate_readout:
            model = calibrate(readout, shots, rep_seed)
        rec = measure_tomography(psi, shots, readout, rep_seed, qubits)
        out.append(reconstruct(rec, model))
    return out
