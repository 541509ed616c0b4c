import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lucorr import measures, qmath, states
from conftest import dm

Z = np.diag([1.0, -1.0])
angles = st.floats(-10.0, 10.0, allow_nan=False)


def test_psi_theta_examples():
    np.testing.assert_allclose(states.make_psi_theta(np.pi / 4), states.bell_psi_plus(), atol=1e-15)
    np.testing.assert_allclose(states.make_psi_theta(0.0), states.basis_state("01"), atol=1e-15)
    assert measures.concurrence(states.make_psi_theta(0.0)) == 0.0
    t = 0.7 * np.pi / 4
    np.testing.assert_allclose(states.make_psi_theta(t), [0, np.cos(0.5498), np.sin(0.5498), 0], atol=1e-4)


def test_phi_gamma_zero_is_phi_plus():
    np.testing.assert_allclose(states.make_phi_gamma(0.0), states.bell_phi_plus(), atol=1e-15)


def test_phi_gamma_half_pi_matches_psi_plus_up_to_local_z():
    # the family's literal form gives the singlet here; Z on qubit 0 maps it to |01>+|10>
    phi = states.make_phi_gamma(np.pi / 2)
    np.testing.assert_allclose(np.kron(Z, np.eye(2)) @ phi, states.bell_psi_plus(), atol=1e-15)


def test_phi_gamma_quarter_pi_is_graph_state_up_to_local_z():
    phi = states.make_phi_gamma(np.pi / 4)
    best = max(
        abs(np.vdot(states.graph_state(), np.kron(a, b) @ phi))
        for a in (np.eye(2), Z)
        for b in (np.eye(2), Z)
    )
    assert best == pytest.approx(1.0, abs=1e-15)


def test_phi_gamma_is_local_ry_on_phi_plus():
    for g in np.linspace(0, np.pi / 2, 7):
        np.testing.assert_allclose(
            states.make_phi_gamma(g), np.kron(np.eye(2), states.ry(2 * g)) @ states.bell_phi_plus(), atol=1e-15
        )


def test_phi_gamma_marginals_maximally_mixed():
    for g in np.linspace(0, 2 * np.pi, 50):
        rho = dm(states.make_phi_gamma(g))
        for q in (0, 1):
            assert np.max(np.abs(qmath.partial_trace(rho, [q], 2) - np.eye(2) / 2)) < 1e-12


def test_concurrence_of_psi_theta_is_sin_2theta():
    for t in np.linspace(0, np.pi / 2, 19):
        assert measures.concurrence(states.make_psi_theta(t)) == pytest.approx(abs(np.sin(2 * t)), abs=1e-12)


def test_ghz_and_basis():
    g = states.ghz(3)
    assert abs(g[0]) ** 2 == pytest.approx(0.5) and abs(g[7]) ** 2 == pytest.approx(0.5)
    assert states.basis_state("110")[6] == 1


def test_euler_examples():
    np.testing.assert_allclose(states.euler_unitary((0, 0, 0)), np.eye(2), atol=1e-15)
    out = states.euler_unitary((0, np.pi, 0)) @ np.array([1, 0])
    assert abs(abs(out[1]) - 1) < 1e-15


@given(angles, angles, angles)
@settings(max_examples=50, deadline=None)
def test_euler_unitary_and_vectorized(a, b, d):
    u = states.euler_unitary((a, b, d))
    assert np.max(np.abs(u @ u.conj().T - np.eye(2))) < 1e-12
    np.testing.assert_allclose(states.euler_unitaries([[a, b, d]])[0], u, atol=1e-14)


def test_encoding_identity_and_x():
    psi = states.bell_phi_plus()
    np.testing.assert_allclose(states.apply_encoding(psi, states.Encoding.identity(2)), psi, atol=1e-15)
    # Ry(pi) Rz(pi) = -iX
    enc = states.Encoding(((0, np.pi, np.pi), (0, 0, 0)))
    out = dm(states.apply_encoding(psi, enc))
    np.testing.assert_allclose(out, dm(states.bell_psi_plus()), atol=1e-15)
    assert measures.concurrence(out) == pytest.approx(1.0, abs=1e-12)


def test_encoding_preserves_concurrence_and_spectrum(rng):
    for _ in range(20):
        enc = states.Encoding.from_flat(rng.uniform(0, 2 * np.pi, 6))
        psi = states.make_psi_theta(rng.uniform(0, np.pi / 2))
        assert measures.concurrence(states.apply_encoding(psi, enc)) == pytest.approx(
            measures.concurrence(psi), abs=1e-10
        )
        rho = states.random_density_matrix(2, rng)
        np.testing.assert_allclose(
            qmath.eigvalsh(states.apply_encoding(rho, enc)), qmath.eigvalsh(rho), atol=1e-10
        )


def test_encoding_validation():
    with pytest.raises(ValueError):
        states.Encoding(((0, 0),))
    with pytest.raises(ValueError):
        states.apply_encoding(states.bell_phi_plus(), states.Encoding.identity(3))


def test_encoding_wrapped():
    enc = states.Encoding(((-1.0, 7.0, 2 * np.pi),)).wrapped()
    for a in enc.angles[0]:
        assert 0 <= a < 2 * np.pi


def test_validation_errors():
    with pytest.raises(states.InvalidStateError):
        states.validate_pure([1, 0, 0])
    with pytest.raises(states.InvalidStateError):
        states.validate_pure([1, 1])
    with pytest.raises(states.InvalidStateError):
        states.validate_density(np.diag([0.5, 0.6]))
    with pytest.raises(states.InvalidStateError):
        states.validate_density(np.diag([1.2, -0.2]))
    with pytest.raises(states.InvalidStateError):
        states.validate_density(np.array([[0.5, 0.1], [0.3, 0.5]]))
    with pytest.raises(states.InvalidStateError):
        states.normalize([0, 0])


def test_json_round_trip(rng):
    psi = states.random_pure_state(3, rng)
    obj = json.loads(json.dumps(states.state_to_json(psi)))
    np.testing.assert_allclose(states.state_from_json(obj), psi, atol=1e-15)
    obj["amplitudes"][0] = [5.0, 0.0]
    with pytest.raises(states.InvalidStateError):
        states.state_from_json(obj)
    with pytest.raises(states.InvalidStateError):
        states.state_from_json({"n_qubits": 2, "amplitudes": [[1, 0], [0, 0]]})
