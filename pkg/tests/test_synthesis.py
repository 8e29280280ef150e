import numpy as np
import pytest
import scipy.signal

from dptcrane import (
    REFERENCE_POLES,
    GainMatrix,
    InvalidParameters,
    PlacementFailed,
    PoleSet,
    Uncontrollable,
    closed_loop_eigs,
    controllability_matrix,
    controllability_rank,
    reference_gain,
    place_poles,
)
from dptcrane.synthesis import numerical_rank, sort_eigs


def random_controllable(rng, n=6, m=2):
    while True:
        A = rng.normal(size=(n, n))
        B = rng.normal(size=(n, m))
        if np.linalg.matrix_rank(controllability_matrix((A, B))) == n:
            return A, B


def test_kalman_matrix_layout():
    A = np.array([[0.0, 1.0], [0.0, 0.0]])
    B = np.array([[0.0], [1.0]])
    np.testing.assert_array_equal(controllability_matrix((A, B)), [[0, 1], [1, 0]])


def test_crane_fully_controllable(model):
    assert controllability_rank(model) == 8


def test_block_scaling_prevents_spurious_rank_loss():
    # Columns differing by 12 orders of magnitude are still independent.
    Mx = np.diag([1.0, 1e-12])
    assert numerical_rank(Mx) == 1
    assert numerical_rank(Mx, block_cols=1) == 2


def test_uncontrollable_detected():
    A = np.diag([-1.0, -2.0, -3.0])
    B = np.array([[1.0], [1.0], [0.0]])
    assert controllability_rank((A, B)) == 2
    with pytest.raises(Uncontrollable):
        place_poles((A, B), [-1, -2, -3])


def test_double_integrator_gain():
    A = np.array([[0.0, 1.0], [0.0, 0.0]])
    B = np.array([[0.0], [1.0]])
    np.testing.assert_allclose(place_poles((A, B), [-1, -2]), [[2, 3]], atol=1e-12)


def test_crane_placement_accuracy(model):
    G = place_poles(model, REFERENCE_POLES)
    assert isinstance(G, GainMatrix) and G.shape == (model.n_inputs, 8)
    err = np.max(np.abs(closed_loop_eigs(model, G.K) - REFERENCE_POLES.poles))
    assert err < 1e-8
    assert G.info["max_eig_error"] < 1e-8


def test_crane_placement_matches_scipy_spectrum(model):
    # The gains differ (multi-input placement is not unique) but the spectra agree.
    ref = scipy.signal.place_poles(model.A, model.B, REFERENCE_POLES.poles.real).gain_matrix
    ours = place_poles(model, REFERENCE_POLES).K
    np.testing.assert_allclose(closed_loop_eigs(model, ours), closed_loop_eigs(model, ref), atol=1e-8)


@pytest.mark.parametrize("seed", range(20))
def test_placement_on_random_systems(seed):
    # Multi-input systems with distinct poles: single-input high-order
    # placement is intrinsically ill-conditioned, so it is tested separately.
    rng = np.random.default_rng(seed)
    A, B = random_controllable(rng, n=int(rng.integers(3, 9)), m=int(rng.integers(2, 4)))
    n = A.shape[0]
    poles = -np.sort(rng.choice(np.arange(1, 17), n, replace=False) * 0.5)
    K = place_poles((A, B), poles)
    got = closed_loop_eigs((A, B), K)
    assert np.max(np.abs(got - sort_eigs(poles))) < 1e-8


def test_complex_poles(params):
    from dptcrane import analytic_linearization

    m = analytic_linearization(params, "fully_actuated")
    poles = PoleSet([-1 + 1j, -1 - 1j, -2, -2.5, -3 + 0.5j, -3 - 0.5j, -0.5, -4])
    K = place_poles(m, poles).K
    assert np.max(np.abs(closed_loop_eigs(m, K) - poles.poles)) < 1e-8


def test_repeated_poles_single_input():
    A = np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [0.0, 0.0, 0.0]])
    B = np.array([[0.0], [0.0], [1.0]])
    K = place_poles((A, B), [-1, -1, -1])
    np.testing.assert_allclose(K, [[1, 3, 3]], atol=1e-9)


def test_single_input_matches_characteristic_polynomial():
    rng = np.random.default_rng(7)
    A, B = random_controllable(rng, n=5, m=1)
    poles = [-1, -2, -3, -4, -5]
    K = place_poles((A, B), poles)
    np.testing.assert_allclose(np.poly(A - B @ K), np.poly(poles), rtol=1e-8)


def test_reference_gains_place_poles_to_rounding(model):
    K = reference_gain(model.variant).K
    err = np.max(np.abs(closed_loop_eigs(model, K) - REFERENCE_POLES.poles))
    assert err < 1e-2


def test_pole_set_validation():
    with pytest.raises(InvalidParameters):
        PoleSet([-1 + 1j, -2])
    with pytest.raises(InvalidParameters):
        PoleSet([])
    ps = PoleSet([-2, -1 + 1j, -1 - 1j])
    assert list(ps.poles) == [-2, -1 - 1j, -1 + 1j]
    assert PoleSet.from_list(ps.to_list()).to_list() == ps.to_list()
    assert ps.is_stable and not ps.is_real


def test_wrong_pole_count(model):
    with pytest.raises(InvalidParameters):
        place_poles(model, [-1, -2])


def test_gain_matrix_shape_checked():
    with pytest.raises(InvalidParameters):
        GainMatrix(np.zeros((3, 8)), "fully_actuated")


def test_rank_deficient_input_matrix():
    A = np.diag([1.0, 2.0])
    B = np.array([[1.0, 2.0], [1.0, 2.0]])
    with pytest.raises((PlacementFailed, Uncontrollable)):
        place_poles((A, B), [-1, -2])
