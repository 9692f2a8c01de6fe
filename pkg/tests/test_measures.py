import json

import numpy as np
import pytest

from tailfactor.errors import InvalidAlphaError, ZeroColumnError
from tailfactor.measures import (
    DiscreteMeasure,
    ModelSpec,
    make_measure,
    measure_from_json,
    measure_to_json,
    spectral_measure_of,
    validate_measure,
)

RNG = np.random.default_rng(1234)


def test_identity_columns_give_symmetric_measure():
    mu = spectral_measure_of(np.eye(2), alpha=2.0)
    assert np.allclose(mu.atoms, [[0, 1], [1, 0]])
    assert np.allclose(mu.weights, [0.5, 0.5])


def test_diagonal_column_norms_weight_by_alpha_power():
    # column norms 2 and 1, alpha=1 -> weights 2/3 and 1/3
    mu = spectral_measure_of(np.diag([2.0, 1.0]), alpha=1.0)
    assert np.allclose(mu.atoms, [[0, 1], [1, 0]])
    assert np.allclose(mu.weights, [1 / 3, 2 / 3])


def test_coincident_directions_merge_into_one_atom():
    mu = spectral_measure_of(np.array([[1.0, 1.0], [0.0, 0.0]]), alpha=2.0)
    assert mu.n_atoms == 1
    assert np.allclose(mu.atoms, [[1, 0]])
    assert np.allclose(mu.weights, [1.0])


def test_zero_column_rejected():
    with pytest.raises(ZeroColumnError):
        spectral_measure_of(np.array([[1.0, 0.0], [1.0, 0.0]]), alpha=1.0)


def test_nonpositive_alpha_rejected():
    with pytest.raises(InvalidAlphaError):
        spectral_measure_of(np.eye(2), alpha=0.0)


def test_total_column_scaling_leaves_measure_unchanged():
    for _ in range(50):
        A = RNG.uniform(0.1, 3.0, size=(3, 4))
        alpha = RNG.uniform(0.3, 3.0)
        t = RNG.uniform(0.1, 10.0)
        mu = spectral_measure_of(A, alpha)
        mu_t = spectral_measure_of(t * A, alpha)
        assert np.allclose(mu.atoms, mu_t.atoms, atol=1e-12)
        assert np.allclose(mu.weights, mu_t.weights, atol=1e-12)


def test_column_permutation_invariance():
    for _ in range(50):
        A = RNG.uniform(0.1, 3.0, size=(2, 5))
        alpha = RNG.uniform(0.3, 3.0)
        perm = RNG.permutation(5)
        mu = spectral_measure_of(A, alpha)
        mu_p = spectral_measure_of(A[:, perm], alpha)
        assert np.allclose(mu.atoms, mu_p.atoms, atol=1e-12)
        assert np.allclose(mu.weights, mu_p.weights, atol=1e-12)


def test_weights_sum_to_one_on_random_matrices():
    for _ in range(200):
        d = int(RNG.integers(2, 5))
        m = int(RNG.integers(d, d + 4))
        A = RNG.uniform(0.01, 5.0, size=(d, m))
        mu = spectral_measure_of(A, RNG.uniform(0.2, 4.0))
        assert abs(np.sum(mu.weights) - 1.0) <= 1e-12


def test_validate_measure_accepts_single_vertex():
    mu = make_measure([[1.0, 0.0]], [1.0])
    assert validate_measure(mu)


def test_validate_measure_rejects_mass_deficit():
    mu = DiscreteMeasure(atoms=np.array([[0.5, 0.5]]), weights=np.array([0.9]))
    assert not validate_measure(mu)


def test_validate_measure_rejects_off_simplex_atom():
    mu = DiscreteMeasure(atoms=np.array([[0.6, 0.5]]), weights=np.array([1.0]))
    assert not validate_measure(mu)


def test_make_measure_merges_near_duplicates():
    mu = make_measure([[1.0, 0.0], [1.0 - 1e-12, 1e-12]], [0.4, 0.6])
    assert mu.n_atoms == 1
    assert np.isclose(mu.weights[0], 1.0)


def test_json_round_trip_is_exact():
    mu = spectral_measure_of(RNG.uniform(0.1, 2.0, size=(3, 3)), 1.7)
    text = measure_to_json(mu)
    back = measure_from_json(text)
    assert np.array_equal(np.asarray(mu.atoms), np.asarray(back.atoms))
    assert np.array_equal(np.asarray(mu.weights), np.asarray(back.weights))
    doc = json.loads(text)
    assert set(doc) == {"atoms", "weights"}


def test_model_spec_validation():
    with pytest.raises(Exception):
        ModelSpec(A=np.eye(2), alpha=1.0, s=0.7)  # s out of range
    with pytest.raises(Exception):
        ModelSpec(A=np.ones((3, 2)), alpha=1.0, s=0.2)  # m < d
    spec = ModelSpec(A=np.eye(2), alpha=1.0, s=0.2)
    assert spec.d == 2 and spec.m == 2
