"""Batch kernels for the two hot loops: encoding search and singlet-fraction search.

Each kernel has a numba implementation written as explicit loops and a
vectorized numpy implementation. :func:`encoded_measures` and
:func:`bell_overlaps` dispatch on :func:`lucorr._accel.get_backend`.
"""
import numpy as np

from ._accel import get_backend, njit

# measure codes understood by encoded_measures
CONCURRENCE = 0
NEGATIVITY = 1
DOUBLED_NEGATIVITY = 2
TOTAL_CORRELATIONS = 3
SYSTEM_ENTROPY = 4
ENTANGLEMENT_OF_FORMATION = 5

MEASURE_CODES = {
    "concurrence": CONCURRENCE,
    "negativity": NEGATIVITY,
    "doubled_negativity": DOUBLED_NEGATIVITY,
    "T_S": TOTAL_CORRELATIONS,
    "E_SE": SYSTEM_ENTROPY,
    "E_F": ENTANGLEMENT_OF_FORMATION,
}

RANK_TOL = 1e-14

_YY = np.array(
    [[0, 0, 0, -1], [0, 0, 1, 0], [0, 1, 0, 0], [-1, 0, 0, 0]], dtype=np.complex128
)


# -- numba path ----------------------------------------------------------------


@njit
def _entropy_bits_jit(w):
    s = 0.0
    for x in w:
        if x > 1e-300:
            s -= x * np.log2(x)
    return s


@njit
def _binary_entropy_jit(x):
    if x <= 0.0 or x >= 1.0:
        return 0.0
    return -x * np.log2(x) - (1.0 - x) * np.log2(1.0 - x)


@njit
def _measure_4x4_jit(rho, code, yy):
    if code == CONCURRENCE or code == ENTANGLEMENT_OF_FORMATION:
        w, v = np.linalg.eigh(rho)
        big_w = np.empty((4, 4), dtype=np.complex128)
        for j in range(4):
            s = np.sqrt(w[j]) if w[j] > RANK_TOL else 0.0
            for i in range(4):
                big_w[i, j] = v[i, j] * s
        # tau = W^T (Y x Y) W; Y x Y is antidiagonal with signs yy[i, 3 - i]
        tau = np.empty((4, 4), dtype=np.complex128)
        for j in range(4):
            for k in range(j, 4):
                acc = 0.0 + 0.0j
                for i in range(4):
                    acc += big_w[i, j] * yy[i, 3 - i].real * big_w[3 - i, k]
                tau[j, k] = acc
                tau[k, j] = acc
        lam = np.linalg.svd(tau)[1]  # descending
        c = lam[0] - lam[1] - lam[2] - lam[3]
        if c < 0.0:
            c = 0.0
        if code == CONCURRENCE:
            return c
        if c > 1.0:
            c = 1.0
        return _binary_entropy_jit(0.5 * (1.0 + np.sqrt(1.0 - c * c)))
    if code == NEGATIVITY or code == DOUBLED_NEGATIVITY:
        pt = np.empty((4, 4), dtype=np.complex128)
        for a in range(2):
            for b in range(2):
                for a2 in range(2):
                    for b2 in range(2):
                        pt[2 * a + b, 2 * a2 + b2] = rho[2 * a2 + b, 2 * a + b2]
        w = np.linalg.eigvalsh(pt)
        neg = 0.0
        for x in w:
            if x < 0.0:
                neg -= x
        return 2.0 * neg if code == DOUBLED_NEGATIVITY else neg
    w = np.linalg.eigvalsh(rho)
    s_ab = _entropy_bits_jit(w)
    if code == SYSTEM_ENTROPY:
        return s_ab
    # single-qubit marginals are 2x2, so their spectra are closed form
    t = -s_ab
    for q in range(2):
        a = 0.0
        d = 0.0
        b = 0.0 + 0.0j
        for k in range(2):
            if q == 0:
                a += rho[k, k].real
                d += rho[2 + k, 2 + k].real
                b += rho[k, 2 + k]
            else:
                a += rho[2 * k, 2 * k].real
                d += rho[2 * k + 1, 2 * k + 1].real
                b += rho[2 * k, 2 * k + 1]
        r = np.sqrt(0.25 * (a - d) ** 2 + b.real**2 + b.imag**2)
        t += _binary_entropy_jit(0.5 * (a + d) + r)
    return t if t > 0.0 else 0.0


@njit
def _apply_kraus_jit(rho, ks, qubit, out):
    # out = sum_x (K_x on `qubit`) rho (K_x on `qubit`)^dag, written in place
    for i in range(4):
        for j in range(4):
            out[i, j] = 0.0
    for x in range(ks.shape[0]):
        k = ks[x]
        for i in range(4):
            for j in range(4):
                if qubit == 0:
                    i0, i1, ii = i & 1, 2 + (i & 1), i >> 1
                    j0, j1, jj = j & 1, 2 + (j & 1), j >> 1
                else:
                    i0, i1, ii = i & 2, (i & 2) + 1, i & 1
                    j0, j1, jj = j & 2, (j & 2) + 1, j & 1
                acc = (
                    k[ii, 0] * (rho[i0, j0] * np.conj(k[jj, 0]) + rho[i0, j1] * np.conj(k[jj, 1]))
                    + k[ii, 1] * (rho[i1, j0] * np.conj(k[jj, 0]) + rho[i1, j1] * np.conj(k[jj, 1]))
                )
                out[i, j] += acc


@njit
def _encoded_measures_jit(psi, u1, u2, k1, k2, code, yy):
    m_count = u1.shape[0]
    p_count = k1.shape[0]
    out = np.empty((m_count, p_count))
    phi = np.empty(4, dtype=np.complex128)
    rho0 = np.empty((4, 4), dtype=np.complex128)
    mid = np.empty((4, 4), dtype=np.complex128)
    rho = np.empty((4, 4), dtype=np.complex128)
    for m in range(m_count):
        for a in range(2):
            for b in range(2):
                acc = 0.0 + 0.0j
                for c in range(2):
                    for d in range(2):
                        acc += u1[m, a, c] * u2[m, b, d] * psi[2 * c + d]
                phi[2 * a + b] = acc
        for i in range(4):
            for j in range(4):
                rho0[i, j] = phi[i] * np.conj(phi[j])
        for pi in range(p_count):
            _apply_kraus_jit(rho0, k1[pi], 0, mid)
            _apply_kraus_jit(mid, k2[pi], 1, rho)
            out[m, pi] = _measure_4x4_jit(rho, code, yy)
    return out


@njit
def _bell_overlaps_jit(rho, us):
    # <Phi+| (U^dag x I) rho (U x I) |Phi+>, with (U x I)|Phi+> = vec(U)/sqrt(2)
    out = np.empty(us.shape[0])
    v = np.empty(4, dtype=np.complex128)
    for m in range(us.shape[0]):
        for a in range(2):
            for b in range(2):
                v[2 * a + b] = us[m, a, b] / np.sqrt(2.0)
        acc = 0.0 + 0.0j
        for i in range(4):
            for j in range(4):
                acc += np.conj(v[i]) * rho[i, j] * v[j]
        out[m] = acc.real
    return out


# -- numpy path ----------------------------------------------------------------


def _entropy_bits_np(w):
    w = np.where(w > 1e-300, w, 1.0)
    return -np.sum(w * np.log2(w), axis=-1)


def _binary_entropy_np(x):
    x = np.clip(x, 0.0, 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        h = -x * np.log2(x) - (1 - x) * np.log2(1 - x)
    return np.where((x <= 0) | (x >= 1), 0.0, h)


def measure_batch_np(rho, code):
    """Measure a stack ``(..., 4, 4)`` of two-qubit density matrices."""
    rho = np.asarray(rho, dtype=np.complex128)
    if code in (CONCURRENCE, ENTANGLEMENT_OF_FORMATION):
        w, v = np.linalg.eigh(rho)
        big_w = v * np.sqrt(np.where(w > RANK_TOL, w, 0.0))[..., None, :]
        tau = np.swapaxes(big_w, -1, -2) @ _YY @ big_w
        lam = np.sort(np.linalg.svd(tau, compute_uv=False), axis=-1)
        c = np.clip(lam[..., 3] - lam[..., 2] - lam[..., 1] - lam[..., 0], 0.0, None)
        if code == CONCURRENCE:
            return c
        c = np.minimum(c, 1.0)
        return _binary_entropy_np(0.5 * (1 + np.sqrt(1 - c * c)))
    if code in (NEGATIVITY, DOUBLED_NEGATIVITY):
        shape = rho.shape[:-2]
        pt = rho.reshape(shape + (2, 2, 2, 2)).swapaxes(-4, -2).reshape(shape + (4, 4))
        w = np.linalg.eigvalsh(pt)
        neg = -np.sum(np.where(w < 0, w, 0.0), axis=-1)
        return 2 * neg if code == DOUBLED_NEGATIVITY else neg
    s_ab = _entropy_bits_np(np.linalg.eigvalsh(rho))
    if code == SYSTEM_ENTROPY:
        return s_ab
    shape = rho.shape[:-2]
    t = rho.reshape(shape + (2, 2, 2, 2))
    ra = np.einsum("...ibjb->...ij", t)
    rb = np.einsum("...aiaj->...ij", t)
    tot = _entropy_bits_np(np.linalg.eigvalsh(ra)) + _entropy_bits_np(np.linalg.eigvalsh(rb)) - s_ab
    return np.clip(tot, 0.0, None)


def _encoded_measures_np(psi, u1, u2, k1, k2, code):
    phi = np.einsum("mac,mbd,cd->mab", u1, u2, psi.reshape(2, 2)).reshape(-1, 4)
    rho0 = np.einsum("mi,mj->mij", phi, phi.conj()).reshape(-1, 2, 2, 2, 2)
    out = np.empty((u1.shape[0], k1.shape[0]))
    for pi in range(k1.shape[0]):
        # rho' = sum_xy (A_x x B_y) rho (A_x x B_y)^dag on the (a b, a' b') tensor
        rho = np.einsum(
            "xac,ybd,mcdef,xge,yhf->mabgh",
            k1[pi], k2[pi], rho0, k1[pi].conj(), k2[pi].conj(), optimize=True,
        ).reshape(-1, 4, 4)
        out[:, pi] = measure_batch_np(rho, code)
    return out


def _bell_overlaps_np(rho, us):
    v = us.reshape(-1, 4) / np.sqrt(2.0)
    return np.einsum("mi,ij,mj->m", v.conj(), rho, v).real


# -- dispatch -------------------------------------------------------------------


def encoded_measures(psi, u1, u2, k1, k2, code):
    """Measure of ``(Lambda x Lambda')[(U1 x U2)|psi><psi|(U1 x U2)^dag]`` over a batch.

    Parameters
    ----------
    psi : (4,) complex
        Two-qubit input state.
    u1, u2 : (M, 2, 2) complex
        Per-qubit encoding unitaries, one row per candidate.
    k1, k2 : (P, K, 2, 2) complex
        Kraus operators per noise strength, zero-padded to a common K.
    code : int
        One of the module-level measure codes.

    Returns
    -------
    (M, P) float array.
    """
    args = (
        np.ascontiguousarray(psi, dtype=np.complex128),
        np.ascontiguousarray(u1, dtype=np.complex128),
        np.ascontiguousarray(u2, dtype=np.complex128),
        np.ascontiguousarray(k1, dtype=np.complex128),
        np.ascontiguousarray(k2, dtype=np.complex128),
        int(code),
    )
    if get_backend() == "numba":
        return _encoded_measures_jit(*args, _YY)
    return _encoded_measures_np(*args)


def bell_overlaps(rho, us):
    """Overlaps of ``rho`` with ``(U x I)|Phi+>`` for a stack of ``U``."""
    rho = np.ascontiguousarray(rho, dtype=np.complex128)
    us = np.ascontiguousarray(us, dtype=np.complex128)
    if get_backend() == "numba":
        return _bell_overlaps_jit(rho, us)
    return _bell_overlaps_np(rho, us)


def stack_kraus(channels):
    """Pack a list of channels into a zero-padded ``(P, K, 2, 2)`` array."""
    k = max(len(c.ops) for c in channels)
    out = np.zeros((len(channels), k, 2, 2), dtype=np.complex128)
    for i, c in enumerate(channels):
        for j, op in enumerate(c.ops):
            out[i, j] = op
    return out
