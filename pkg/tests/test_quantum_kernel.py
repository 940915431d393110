import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from waybell import quantum_kernel as qk
from waybell.errors import DimensionError, DomainError, NonHermitianError, UnsupportedStateError
from waybell.quantum_kernel import I2, SIGMA_X, SIGMA_Y, SIGMA_Z, StateKind

angles = st.floats(-20.0, 20.0, allow_nan=False)
R = 1 / math.sqrt(2)


def test_pauli_squares():
    for s in (SIGMA_X, SIGMA_Y, SIGMA_Z):
        np.testing.assert_allclose(s @ s, I2, atol=1e-12)
        assert qk.is_hermitian(s)


@pytest.mark.parametrize("alpha, expected", [(0.0, SIGMA_Z), (math.pi / 2, SIGMA_X)])
def test_spin_observable_axes(alpha, expected):
    np.testing.assert_allclose(qk.spin_observable(alpha), expected, atol=1e-15)


def test_spin_observable_diagonal_direction():
    m = qk.spin_observable(math.pi / 4)
    np.testing.assert_allclose(m, (SIGMA_X + SIGMA_Z) / math.sqrt(2), atol=1e-15)
    # eigen-decomposition oracle
    vals, vecs = np.linalg.eigh(m)
    np.testing.assert_allclose(vals, [-1.0, 1.0], atol=1e-12)
    plus = qk.spin_eigenstate(math.pi / 4, +1)
    assert abs(abs(np.vdot(vecs[:, 1], plus)) - 1) < 1e-12


@pytest.mark.parametrize("bad", [math.nan, math.inf, -math.inf])
def test_spin_observable_rejects_non_finite(bad):
    with pytest.raises(DomainError):
        qk.spin_observable(bad)


@given(angles)
@settings(max_examples=1000, deadline=None)
def test_spin_observable_hermitian_involution(alpha):
    m = qk.spin_observable(alpha)
    np.testing.assert_allclose(m, m.conj().T, atol=1e-12)
    np.testing.assert_allclose(m @ m, I2, atol=1e-12)


@given(angles, st.sampled_from([1, -1]))
def test_spin_eigenstate(alpha, sign):
    v = qk.spin_eigenstate(alpha, sign)
    np.testing.assert_allclose(qk.spin_observable(alpha) @ v, sign * v, atol=1e-12)


@pytest.mark.parametrize(
    "kind, amps",
    [
        ("singlet", (0, R, -R, 0)),
        ("triplet_psi_plus", (0, R, R, 0)),
        ("triplet_phi_minus", (R, 0, 0, -R)),
    ],
)
def test_bell_states(kind, amps):
    state = qk.bell_state(kind)
    np.testing.assert_allclose(state.amplitudes, amps, atol=1e-15)
    assert abs(np.linalg.norm(state.amplitudes) - 1) < 1e-12
    assert state.kind is StateKind(kind)


def test_bell_state_rejects_custom():
    with pytest.raises(UnsupportedStateError):
        qk.bell_state("custom")
    with pytest.raises(UnsupportedStateError):
        qk.bell_state("nonsense")


def test_custom_state_validation():
    qk.TwoQubitState([1, 0, 0, 0])
    with pytest.raises(ValueError):
        qk.TwoQubitState([1, 1, 0, 0])
    with pytest.raises(DimensionError):
        qk.TwoQubitState([1, 0])


def test_state_is_immutable():
    state = qk.bell_state("singlet")
    with pytest.raises(ValueError):
        state.amplitudes[0] = 1


def test_tensor_examples():
    np.testing.assert_array_equal(qk.tensor(I2, I2), np.eye(4))
    np.testing.assert_array_equal(np.diag(qk.tensor(SIGMA_Z, SIGMA_Z)).real, [1, -1, -1, 1])
    np.testing.assert_array_equal(np.fliplr(qk.tensor(SIGMA_X, SIGMA_X)).diagonal().real, [1, 1, 1, 1])
    with pytest.raises(DimensionError):
        qk.tensor(np.ones((2, 3)), I2)


def test_tensor_index_layout():
    rng = np.random.default_rng(0)
    a, b = rng.normal(size=(2, 2)), rng.normal(size=(3, 3))
    t = qk.tensor(a, b)
    assert t.shape == (6, 6)
    for i, j, k, l in np.ndindex(2, 2, 3, 3):
        assert t[i * 3 + k, j * 3 + l] == a[i, j] * b[k, l]


def test_expectation_examples():
    singlet = qk.bell_state("singlet")
    assert qk.expectation(qk.tensor(SIGMA_Z, SIGMA_Z), singlet) == pytest.approx(-1, abs=1e-12)
    # direct 4x4 evaluation with hand-written matrices
    xx = np.array([[0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0], [1, 0, 0, 0]])
    psi = np.array([0, R, -R, 0])
    assert psi @ xx @ psi == pytest.approx(-1, abs=1e-12)
    assert qk.expectation(qk.tensor(SIGMA_X, SIGMA_X), singlet) == pytest.approx(-1, abs=1e-12)
    assert qk.expectation(qk.tensor(SIGMA_Z, SIGMA_Z), [1, 0, 0, 0]) == 1.0
    assert qk.expectation(SIGMA_Z, [0, 1]) == -1.0


def test_expectation_errors():
    with pytest.raises(DimensionError):
        qk.expectation(SIGMA_Z, qk.bell_state("singlet"))
    with pytest.raises(NonHermitianError):
        qk.expectation(np.array([[0, 1], [0, 0]]), [1, 0])


@pytest.mark.parametrize(
    "alpha, beta, expected",
    [(0.0, 0.0, -1.0), (0.0, math.pi / 2, 0.0), (math.pi / 6, math.pi / 2, -0.5)],
)
def test_qm_correlation_singlet(alpha, beta, expected):
    assert qk.qm_correlation("singlet", alpha, beta) == pytest.approx(expected, abs=1e-12)


def test_qm_correlation_oracle_grid():
    grid = np.linspace(0, 2 * math.pi, 32, endpoint=False)
    worst = max(
        abs(qk.qm_correlation("singlet", a, b) + math.cos(a - b)) for a in grid for b in grid
    )
    assert worst <= 1e-12


@given(angles, angles, angles)
def test_singlet_rotational_invariance(a, b, d):
    lhs = qk.qm_correlation("singlet", a, b)
    rhs = qk.qm_correlation("singlet", a + d, b + d)
    assert abs(lhs - rhs) <= 1e-12


def test_triplet_correlations_depend_on_angle_sum():
    # <XX> and <ZZ> of each triplet fix the xz-plane correlation
    a, b = 0.3, 1.1
    assert qk.qm_correlation("triplet_psi_plus", a, b) == pytest.approx(-math.cos(a + b), abs=1e-12)
    assert qk.qm_correlation("triplet_phi_minus", a, b) == pytest.approx(math.cos(a + b), abs=1e-12)


def test_commutator_examples():
    np.testing.assert_allclose(qk.commutator(SIGMA_X, SIGMA_Y), 2j * SIGMA_Z, atol=1e-15)
    np.testing.assert_array_equal(qk.commutator(SIGMA_Z, SIGMA_Z), np.zeros((2, 2)))
    np.testing.assert_array_equal(
        qk.commutator(qk.tensor(SIGMA_X, I2), qk.tensor(I2, SIGMA_Y)), np.zeros((4, 4))
    )
    with pytest.raises(DimensionError):
        qk.commutator(SIGMA_X, np.eye(4))


@pytest.mark.parametrize(
    "kind", ["singlet", "triplet_psi_plus", "triplet_phi_minus"]
)
def test_delta_L_state_two_ways(kind):
    table = qk.DELTA_L_TABLE[StateKind(kind)]
    assert qk.delta_L_state(kind) == pytest.approx(table, abs=1e-12)


def test_delta_L_state_values():
    assert qk.delta_L_state("singlet") == pytest.approx(0.0, abs=1e-12)
    assert qk.delta_L_state("triplet_psi_plus") == pytest.approx(1.0, abs=1e-12)
    assert qk.delta_L_state("triplet_phi_minus") == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize(
    "alpha, beta, expected",
    [(0.4, 0.4, 0.0), (0.0, math.pi / 2, 1.0), (0.0, math.pi / 6, 0.5)],
)
def test_way_numerator_examples(alpha, beta, expected):
    assert qk.way_numerator("singlet", alpha, beta) == pytest.approx(expected, abs=1e-10)


def test_way_numerator_grid():
    for theta in np.linspace(0, math.pi, 181):
        assert abs(qk.way_numerator("singlet", 0.0, theta) - abs(math.sin(theta))) <= 1e-10


@given(angles, st.floats(0, math.pi))
def test_way_numerator_rotation_invariant(alpha, theta):
    assert abs(qk.way_numerator("singlet", alpha, alpha + theta) - math.sin(theta)) <= 1e-10


def test_way_numerator_rejects_triplets():
    with pytest.raises(UnsupportedStateError):
        qk.way_numerator("triplet_psi_plus", 0.0, 1.0)


def test_measurement_angles_theta():
    ang = qk.MeasurementAngles(0.5, 2.0)
    assert ang.theta == pytest.approx(1.5)
    assert qk.MeasurementAngles(6.0, 0.1).theta == pytest.approx(5.9)
