import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lucorr import channels, qmath, states
from conftest import dm, ptrace_oracle

X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]])
Z = np.diag([1.0, -1.0]).astype(complex)


def test_tensor_identity():
    np.testing.assert_array_equal(qmath.tensor_product(np.eye(2), np.eye(2)), np.eye(4))


def test_tensor_bit_flip_both():
    v = qmath.tensor_product(X, X) @ states.basis_state("00")
    np.testing.assert_allclose(v, states.basis_state("11"))


def test_yy_antidiagonal():
    yy = qmath.tensor_product(Y, Y)
    np.testing.assert_array_equal(np.diag(yy), np.zeros(4))
    np.testing.assert_array_equal(np.fliplr(yy).diagonal(), [-1, 1, 1, -1])


def test_tensor_order_is_qubit_order():
    # qubit 0 is the most significant bit
    v = qmath.tensor_product(X, np.eye(2)) @ states.basis_state("00")
    np.testing.assert_allclose(v, states.basis_state("10"))


def test_ptrace_bell_marginal():
    rho = dm(states.bell_phi_plus())
    np.testing.assert_allclose(qmath.partial_trace(rho, [0], 2), np.eye(2) / 2, atol=1e-15)


def test_ptrace_recovers_factors(rng):
    for _ in range(100):
        a = states.random_density_matrix(1, rng)
        b = states.random_density_matrix(1, rng)
        ab = qmath.tensor_product(a, b)
        assert np.max(np.abs(qmath.partial_trace(ab, [0], 2) - a)) < 1e-12
        assert np.max(np.abs(qmath.partial_trace(ab, [1], 2) - b)) < 1e-12


@pytest.mark.parametrize("keep", [[0], [1], [2], [0, 2], [1, 2], [0, 1]])
def test_ptrace_matches_summation_oracle(rng, keep):
    rho = states.random_density_matrix(3, rng)
    out = qmath.partial_trace(rho, keep, 3)
    np.testing.assert_allclose(out, ptrace_oracle(rho, keep, 3), atol=1e-14)
    assert abs(np.trace(out) - 1) < 1e-12


def test_ptrace_rejects_bad_input():
    with pytest.raises(IndexError):
        qmath.partial_trace(np.eye(4), [2], 2)
    with pytest.raises(qmath.LinAlgContractError):
        qmath.partial_trace(np.eye(3), [0], 2)
    with pytest.raises(ValueError):
        qmath.partial_trace(np.eye(4), [], 2)


def test_ptranspose_product(rng):
    a = states.random_density_matrix(1, rng)
    b = states.random_density_matrix(1, rng)
    pt = qmath.partial_transpose(np.kron(a, b), [0], 2)
    np.testing.assert_allclose(pt, np.kron(a.T, b), atol=1e-15)


def test_ptranspose_bell_spectrum():
    w = np.linalg.eigvalsh(qmath.partial_transpose(dm(states.bell_phi_plus()), [0], 2))
    np.testing.assert_allclose(np.sort(w), [-0.5, 0.5, 0.5, 0.5], atol=1e-15)


@pytest.mark.parametrize("n,sub", [(2, [0]), (2, [1]), (3, [1]), (3, [0, 2])])
def test_ptranspose_involution_and_trace(rng, n, sub):
    m = rng.normal(size=(2**n, 2**n)) + 1j * rng.normal(size=(2**n, 2**n))
    pt = qmath.partial_transpose(m, sub, n)
    assert np.max(np.abs(qmath.partial_transpose(pt, sub, n) - m)) < 1e-14
    assert abs(np.trace(pt) - np.trace(m)) < 1e-12


def test_ptranspose_elementwise_oracle(rng):
    m = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    pt = qmath.partial_transpose(m, [1], 2)
    for a, b, c, d in np.ndindex(2, 2, 2, 2):
        assert pt[2 * a + b, 2 * c + d] == m[2 * a + d, 2 * c + b]


def test_eigh_examples():
    w, _ = qmath.eigh(np.eye(2) / 2)
    np.testing.assert_allclose(w, [0.5, 0.5])
    w, v = qmath.eigh(Z)
    np.testing.assert_allclose(w, [1, -1])
    assert abs(abs(v[0, 0]) - 1) < 1e-15 and abs(abs(v[1, 1]) - 1) < 1e-15


def test_eigh_damped_bell():
    rho = channels.apply_product_channel(dm(states.bell_phi_plus()), [channels.amplitude_damping(0.5)] * 2)
    w, v = qmath.eigh(rho)
    assert abs(w.sum() - 1) < 1e-10 and w.min() > -1e-10
    assert np.max(np.abs((v * w) @ v.conj().T - rho)) < qmath.RECON_TOL


def test_eigh_rejects_non_hermitian():
    with pytest.raises(qmath.LinAlgContractError):
        qmath.eigh(np.array([[0, 1], [0, 0]], dtype=complex))


def test_clip_spectrum():
    np.testing.assert_array_equal(qmath.clip_spectrum(np.array([1.0, -5e-11])), [1.0, 0.0])
    with pytest.raises(qmath.LinAlgContractError):
        qmath.clip_spectrum(np.array([1.0, -1e-6]))


def test_sqrt_examples():
    np.testing.assert_allclose(qmath.matrix_sqrt_psd(np.eye(3)), np.eye(3), atol=1e-15)
    np.testing.assert_allclose(qmath.matrix_sqrt_psd(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]), atol=1e-14)


def test_sqrt_random_psd(rng):
    for _ in range(20):
        a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        m = a.conj().T @ a
        s = qmath.matrix_sqrt_psd(m)
        assert np.max(np.abs(s @ s - m)) < 1e-9


def test_sqrt_ill_conditioned(rng):
    q, _ = np.linalg.qr(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))
    m = (q * np.array([1.0, 1e-2, 1e-4, 1e-6])) @ q.conj().T
    s = qmath.matrix_sqrt_psd(m)
    assert np.max(np.abs(s @ s - m)) < 1e-9


def test_trace_norm_examples(rng):
    assert qmath.trace_norm(np.eye(4)) == pytest.approx(4)
    assert qmath.trace_norm(states.random_density_matrix(2, rng)) == pytest.approx(1, abs=1e-12)
    pt = qmath.partial_transpose(dm(states.bell_phi_plus()), [0], 2)
    assert qmath.trace_norm(pt) == pytest.approx(2, abs=1e-14)


def test_density_spectrum_bounds(rng):
    for n in (1, 2, 3):
        w = qmath.eigvalsh(states.random_density_matrix(n, rng, rank=1 + n))
        assert abs(w.sum() - 1) < 1e-10
        assert w.min() >= -1e-10 and w.max() <= 1 + 1e-10
        assert np.all(np.diff(w) <= 0)


@given(st.integers(0, 2), st.integers(0, 10_000))
@settings(max_examples=30, deadline=None)
def test_apply_local_matches_kron(q, seed):
    rng = np.random.default_rng(seed)
    psi = states.random_pure_state(3, rng)
    u = states.euler_unitary(rng.uniform(0, 2 * np.pi, 3))
    ops = [np.eye(2)] * 3
    ops[q] = u
    np.testing.assert_allclose(qmath.apply_local(psi, u, [q], 3), qmath.tensor_product(*ops) @ psi, atol=1e-14)


def test_apply_local_two_qubit_reversed_order():
    # a CNOT with control 2 and target 0 on |001> gives |101>
    cnot = np.eye(4, dtype=complex)
    cnot[2:, 2:] = X
    out = qmath.apply_local(states.basis_state("001"), cnot, [2, 0], 3)
    np.testing.assert_allclose(out, states.basis_state("101"))
