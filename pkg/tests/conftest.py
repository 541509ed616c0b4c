import numpy as np
import pytest

from lucorr import _accel

BACKENDS = ["numpy"] + (["numba"] if _accel.NUMBA_AVAILABLE else [])


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(params=BACKENDS)
def backend(request):
    prev = _accel.set_backend(request.param)
    yield request.param
    _accel.set_backend(prev)


def dm(psi):
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def ptrace_oracle(rho, keep, n):
    """Partial trace by explicit summation over basis indices."""
    keep = sorted(keep)
    drop = [q for q in range(n) if q not in keep]
    dk = 2 ** len(keep)
    out = np.zeros((dk, dk), dtype=complex)
    for i in range(2**n):
        for j in range(2**n):
            bi = [(i >> (n - 1 - q)) & 1 for q in range(n)]
            bj = [(j >> (n - 1 - q)) & 1 for q in range(n)]
            if any(bi[q] != bj[q] for q in drop):
                continue
            a = int("".join(str(bi[q]) for q in keep), 2)
            b = int("".join(str(bj[q]) for q in keep), 2)
            out[a, b] += rho[i, j]
    return out


def singlet_fraction_oracle(rho):
    """Fully entangled fraction from the correlation matrix T_ij = tr(rho s_i x s_j)."""
    s = [np.array([[0, 1], [1, 0]]), np.array([[0, -1j], [1j, 0]]), np.diag([1.0, -1.0])]
    t = np.array([[np.real(np.trace(rho @ np.kron(a, b))) for b in s] for a in s])
    sv = np.linalg.svd(t, compute_uv=False)
    return (1 + sv[0] + sv[1] - np.sign(np.linalg.det(t)) * sv[2]) / 4
