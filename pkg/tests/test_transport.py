import numpy as np
import pytest
from scipy.optimize import linprog

from tailfactor.errors import DimensionMismatchError
from tailfactor.measures import make_measure
from tailfactor.transport import (
    ground_cost,
    solve_transport,
    wasserstein_p,
    wasserstein_pp,
)

RNG = np.random.default_rng(777)


def _random_measure(k, d):
    pts = RNG.uniform(0, 1, size=(k, d))
    pts = pts / pts.sum(axis=1, keepdims=True)
    w = RNG.uniform(0.1, 1.0, size=k)
    return make_measure(pts, w / w.sum())


def _linprog_cost(mu, nu, p):
    """Independent LP oracle for the transport objective."""
    a = np.asarray(mu.weights)
    b = np.asarray(nu.weights)
    b = b * (a.sum() / b.sum())
    xa = np.asarray(mu.atoms)
    xb = np.asarray(nu.atoms)
    m, n = len(a), len(b)
    cost = np.abs(xa[:, None, :] - xb[None, :, :]).sum(axis=2) ** p
    A_eq = []
    for i in range(m):
        row = np.zeros(m * n)
        row[i * n : (i + 1) * n] = 1.0
        A_eq.append(row)
    for j in range(n):
        row = np.zeros(m * n)
        row[j::n] = 1.0
        A_eq.append(row)
    res = linprog(
        cost.ravel(),
        A_eq=np.array(A_eq)[:-1],  # drop one redundant constraint
        b_eq=np.concatenate([a, b])[:-1],
        bounds=(0, None),
        method="highs",
    )
    assert res.success
    return float(res.fun)


def test_ground_cost_examples():
    assert ground_cost([1, 0], [0, 1], 1.0) == pytest.approx(2.0)
    assert ground_cost([1, 0], [0, 1], 2.0) == pytest.approx(4.0)
    with pytest.raises(DimensionMismatchError):
        ground_cost([1, 0], [1, 0, 0])
    with pytest.raises(ValueError):
        ground_cost([1, 0], [0, 1], 0.5)


def test_w1_two_atom_example():
    # Move 0.3 of mass across the full diagonal of the 2-simplex:
    # W1 = 0.3 * |(1,0)-(0,1)|_1 = 0.6
    mu = make_measure([[1.0, 0.0], [0.0, 1.0]], [0.8, 0.2])
    nu = make_measure([[1.0, 0.0], [0.0, 1.0]], [0.5, 0.5])
    assert wasserstein_p(mu, nu, 1.0) == pytest.approx(0.6, abs=1e-12)


def test_w1_dirac_to_dirac():
    mu = make_measure([[1.0, 0.0]], [1.0])
    nu = make_measure([[0.0, 1.0]], [1.0])
    assert wasserstein_p(mu, nu, 1.0) == pytest.approx(2.0, abs=1e-12)


def test_w2_between_vertex_mixtures():
    # Half the mass moves between opposite vertices at l1-distance 2:
    # W2^2 = 0.5 * 2^2 = 2, W2 = sqrt(2)
    mu = make_measure([[1.0, 0.0]], [1.0])
    nu = make_measure([[1.0, 0.0], [0.0, 1.0]], [0.5, 0.5])
    obj, _ = wasserstein_pp(mu, nu, 2.0)
    assert obj == pytest.approx(2.0, abs=1e-12)
    assert wasserstein_p(mu, nu, 2.0) == pytest.approx(np.sqrt(2.0), abs=1e-12)


def test_identity_of_indiscernibles_and_symmetry():
    for _ in range(20):
        mu = _random_measure(int(RNG.integers(1, 7)), 3)
        nu = _random_measure(int(RNG.integers(1, 7)), 3)
        assert wasserstein_p(mu, mu, 1.0) == pytest.approx(0.0, abs=1e-10)
        d1 = wasserstein_p(mu, nu, 1.0)
        d2 = wasserstein_p(nu, mu, 1.0)
        assert d1 == pytest.approx(d2, abs=1e-10)
        assert d1 >= 0


def test_triangle_inequality():
    for _ in range(30):
        mu = _random_measure(int(RNG.integers(2, 6)), 2)
        nu = _random_measure(int(RNG.integers(2, 6)), 2)
        rho = _random_measure(int(RNG.integers(2, 6)), 2)
        assert wasserstein_p(mu, nu, 1.0) <= (
            wasserstein_p(mu, rho, 1.0) + wasserstein_p(rho, nu, 1.0) + 1e-10
        )


@pytest.mark.parametrize("p", [1.0, 2.0])
def test_against_linprog_oracle(p):
    for _ in range(25):
        mu = _random_measure(int(RNG.integers(2, 9)), int(RNG.integers(2, 4)))
        nu = _random_measure(int(RNG.integers(2, 9)), mu.dim)
        obj, plan = wasserstein_pp(mu, nu, p)
        assert obj == pytest.approx(_linprog_cost(mu, nu, p), abs=1e-8)
        # plan feasibility
        gamma = plan.gamma
        assert gamma.shape == (mu.n_atoms, nu.n_atoms)
        assert gamma.min() >= -1e-12
        assert np.allclose(gamma.sum(axis=1), mu.weights, atol=1e-9)
        assert np.allclose(gamma.sum(axis=0), nu.weights, atol=1e-9)


def test_total_variation_upper_bound():
    # Measures on the simplex live in an l1-ball of diameter 2, so
    # W_p^p <= 2^p * TV for measures sharing the same atom list.
    for p in (1.0, 2.0, 3.0):
        for _ in range(20):
            k = int(RNG.integers(2, 6))
            pts = RNG.uniform(0, 1, size=(k, 3))
            pts = pts / pts.sum(axis=1, keepdims=True)
            wa = RNG.uniform(0.05, 1.0, size=k)
            wb = RNG.uniform(0.05, 1.0, size=k)
            wa, wb = wa / wa.sum(), wb / wb.sum()
            mu = make_measure(pts, wa)
            nu = make_measure(pts, wb)
            tv = 0.5 * np.abs(np.asarray(mu.weights) - np.asarray(nu.weights)).sum()
            obj, _ = wasserstein_pp(mu, nu, p)
            assert obj <= 2.0**p * tv + 1e-9


def test_dimension_mismatch_rejected():
    mu = make_measure([[1.0, 0.0]], [1.0])
    nu = make_measure([[1.0, 0.0, 0.0]], [1.0])
    with pytest.raises(DimensionMismatchError):
        wasserstein_p(mu, nu)


def test_solver_handles_degenerate_ties():
    # Equal supplies/demands with tied costs exercise degenerate pivots.
    a = np.full(6, 1.0 / 6)
    b = np.full(6, 1.0 / 6)
    cost = np.ones((6, 6))
    cost[np.diag_indices(6)] = 0.0
    flow, obj = solve_transport(a, b, cost)
    assert obj == pytest.approx(0.0, abs=1e-12)
    assert np.allclose(np.diag(flow), 1.0 / 6)
