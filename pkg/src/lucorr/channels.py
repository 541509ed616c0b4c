"""Single-qubit Kraus channels, product application and unitary dilations."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import qmath

COMPLETENESS_TOL = 1e-12

I2 = np.eye(2, dtype=complex)
Z = np.diag([1.0, -1.0]).astype(complex)

KIND_ALIASES = {
    "d": "dephasing",
    "dephasing": "dephasing",
    "ad": "amplitude_damping",
    "amplitude_damping": "amplitude_damping",
    "identity": "identity",
}


class ChannelError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class KrausChannel:
    kind: str
    p: float | tuple[float, ...]
    ops: tuple[np.ndarray, ...] = field(repr=False)

    def completeness_error(self) -> float:
        s = sum(k.conj().T @ k for k in self.ops)
        return float(np.max(np.abs(s - I2)))

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        return apply_channel(rho, self)


def _check_p(p: float) -> float:
    p = float(p)
    if not (0.0 <= p <= 1.0) or not np.isfinite(p):
        raise ChannelError(f"noise strength p={p!r} outside [0, 1]")
    return p


def identity_channel() -> KrausChannel:
    return KrausChannel("identity", 0.0, (I2.copy(),))


def dephasing(p: float) -> KrausChannel:
    p = _check_p(p)
    return KrausChannel("dephasing", p, (np.sqrt(1 - p / 2) * I2, np.sqrt(p / 2) * Z))


def amplitude_damping(p: float) -> KrausChannel:
    p = _check_p(p)
    k0 = np.array([[1.0, 0.0], [0.0, np.sqrt(1 - p)]], dtype=complex)
    k1 = np.array([[0.0, np.sqrt(p)], [0.0, 0.0]], dtype=complex)
    return KrausChannel("amplitude_damping", p, (k0, k1))


def concatenate(a: KrausChannel, b: KrausChannel) -> KrausChannel:
    """Channel that applies ``a`` first and then ``b``."""
    ops = tuple(kb @ ka for ka in a.ops for kb in b.ops)
    pa = a.p if isinstance(a.p, tuple) else (a.p,)
    pb = b.p if isinstance(b.p, tuple) else (b.p,)
    return KrausChannel("concat", pa + pb, ops)


def channel_at(kind: str, p: float) -> KrausChannel:
    """Build a channel from a kind label at strength ``p``.

    ``kind`` is ``"dephasing"``/``"D"``, ``"amplitude_damping"``/``"AD"``,
    ``"identity"``, or a ``+``-joined chain such as ``"D+AD"`` whose stages
    act left to right, all at the same ``p``.
    """
    stages = [s.strip().lower() for s in kind.split("+")]
    chans = []
    for s in stages:
        name = KIND_ALIASES.get(s)
        if name is None:
            raise ChannelError(f"unknown channel kind {s!r}")
        if name == "dephasing":
            chans.append(dephasing(p))
        elif name == "amplitude_damping":
            chans.append(amplitude_damping(p))
        else:
            chans.append(identity_channel())
    out = chans[0]
    for c in chans[1:]:
        out = concatenate(out, c)
    return out


def canonical_kind(kind: str) -> str:
    stages = [KIND_ALIASES.get(s.strip().lower()) for s in kind.split("+")]
    if None in stages:
        raise ChannelError(f"unknown channel kind {kind!r}")
    return "+".join(stages)


def channel_from_spec(spec: dict) -> KrausChannel:
    """Parse ``{"kind": ..., "p": ...}``.

    For ``"concat"``, ``p`` is a list with one strength per stage and the
    optional ``"stages"`` list names the stage kinds in order of action
    (default dephasing then amplitude damping).
    """
    kind = spec.get("kind")
    p = spec.get("p")
    if kind in ("dephasing", "amplitude_damping", "identity"):
        if isinstance(p, (list, tuple)):
            raise ChannelError(f"{kind} takes a single p")
        return channel_at(kind, 0.0 if p is None else p)
    if kind == "concat":
        stages = spec.get("stages", ["dephasing", "amplitude_damping"])
        if not isinstance(p, (list, tuple)) or len(p) != len(stages):
            raise ChannelError("concat needs one p per stage")
        out = channel_at(stages[0], p[0])
        for s, ps in zip(stages[1:], p[1:]):
            out = concatenate(out, channel_at(s, ps))
        return out
    raise ChannelError(f"unknown channel kind {kind!r}")


def apply_channel(rho: np.ndarray, channel: KrausChannel) -> np.ndarray:
    return sum(k @ rho @ k.conj().T for k in channel.ops)


def apply_product_channel(rho: np.ndarray, per_qubit: Sequence[KrausChannel | None]) -> np.ndarray:
    """Apply ``Lambda_1 x ... x Lambda_N``; ``None`` entries are identity."""
    rho = np.asarray(rho, dtype=complex)
    n = qmath.n_qubits_of(rho)
    if len(per_qubit) != n:
        raise ChannelError(f"{len(per_qubit)} channels given for {n} qubits")
    t = rho.reshape([2] * (2 * n))
    for q, ch in enumerate(per_qubit):
        if ch is None or ch.kind == "identity":
            continue
        acc = np.zeros_like(t)
        for k in ch.ops:
            x = np.moveaxis(np.tensordot(k, t, axes=([1], [q])), 0, q)
            x = np.moveaxis(np.tensordot(x, k.conj(), axes=([n + q], [1])), -1, n + q)
            acc += x
        t = acc
    return t.reshape(rho.shape)


def dilation(channel: KrausChannel) -> np.ndarray:
    """4x4 unitary on (system, environment) with ``V|s>|0> = sum_j K_j|s> |j>``.

    Columns for ``|s>|1>`` are filled by Gram-Schmidt over the computational
    basis in index order, so the completion is deterministic.
    """
    if len(channel.ops) > 2:
        raise ChannelError("dilation needs at most two Kraus operators (one environment qubit)")
    v = np.zeros((4, 4), dtype=complex)
    for s in range(2):
        col = np.zeros(4, dtype=complex)
        for j, k in enumerate(channel.ops):
            col += np.kron(k[:, s], np.eye(2)[j])
        v[:, 2 * s] = col
    filled = [0, 2]
    for target in (1, 3):
        for e in np.eye(4, dtype=complex):
            w = e - sum(v[:, c] * np.vdot(v[:, c], e) for c in filled)
            nrm = np.linalg.norm(w)
            if nrm > 1e-8:
                v[:, target] = w / nrm
                filled.append(target)
                break
    return v


def evolve_joint(psi: np.ndarray, per_qubit: Sequence[KrausChannel]) -> np.ndarray:
    """Evolve a pure system state together with one environment qubit per system qubit.

    The output register is ``S_1..S_N E_1..E_N``; environments start in ``|0>``
    and ``V_i`` acts on the pair ``(S_i, E_i)``.
    """
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    n = qmath.n_qubits_of(np.empty((psi.size, 1)))
    if len(per_qubit) != n:
        raise ChannelError(f"{len(per_qubit)} channels given for {n} qubits")
    env = np.zeros(2**n, dtype=complex)
    env[0] = 1.0
    joint = np.kron(psi, env)
    for i, ch in enumerate(per_qubit):
        joint = qmath.apply_local(joint, dilation(ch), [i, n + i], 2 * n)
    return joint
