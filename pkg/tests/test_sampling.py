import math

import numpy as np
import pytest
from scipy import integrate, stats

from tailfactor.errors import MaxTrialsExceededError, WorstCaseDimensionError
from tailfactor.measures import ModelSpec
from tailfactor.sampling import (
    RngStream,
    generate_dataset,
    pareto_quantile,
    read_batch,
    sample_conditional_pareto_vec,
    sample_latent_batch,
    sample_pareto,
    sample_tilted_pareto,
    tail_threshold,
    tilted_pareto_quantile,
    worst_case_tilts,
    write_batch,
)


def test_pareto_quantile_examples():
    # u = 0.75, alpha = 2: (1-u)^(-1/2) - 1 = 1
    assert pareto_quantile(0.75, 2.0) == pytest.approx(1.0, abs=1e-15)
    assert pareto_quantile(0.0, 1.0) == pytest.approx(0.0, abs=1e-15)
    # tilted by c divides the untilted value
    assert tilted_pareto_quantile(0.75, 2.0, 2.0) == pytest.approx(0.5, abs=1e-15)


@pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0])
def test_pareto_sampler_matches_cdf(alpha):
    gen = RngStream(7, 0).generator()
    x = sample_pareto(alpha, gen, size=200_000)
    # CDF of the shifted Pareto: F(x) = 1 - (1+x)^(-alpha)
    stat, _ = stats.kstest(x, lambda t: 1.0 - (1.0 + t) ** (-alpha))
    assert stat < 0.01


def test_tilted_sampler_matches_cdf():
    alpha, c = 2.0, 1.3
    gen = RngStream(11, 0).generator()
    x = sample_tilted_pareto(alpha, c, gen, size=200_000)
    stat, _ = stats.kstest(x, lambda t: 1.0 - (1.0 + c * t) ** (-alpha))
    assert stat < 0.01


def test_conditional_sampler_against_quadrature():
    # P(z1 > 10 | z1 + z2 >= 5) for two i.i.d. Pareto(2) components,
    # computed by numerical integration of the joint density.
    alpha, t, q = 2.0, 5.0, 10.0

    def dens(z1):
        return alpha * (1.0 + z1) ** (-alpha - 1.0)

    def tail(z2_lo):
        return (1.0 + max(z2_lo, 0.0)) ** (-alpha)

    # numerator: z1 > q implies the norm condition holds (q > t)
    num, _ = integrate.quad(lambda z: dens(z), q, np.inf)
    den1, _ = integrate.quad(lambda z: dens(z) * tail(t - z), 0, t)
    den2, _ = integrate.quad(lambda z: dens(z), t, np.inf)
    target = num / (den1 + den2)

    gen = RngStream(23, 0).generator()
    draws = np.array(
        [sample_conditional_pareto_vec(2, alpha, t, gen) for _ in range(40_000)]
    )
    assert np.all(draws.sum(axis=1) >= t)
    frac = float((draws[:, 0] > q).mean())
    assert frac == pytest.approx(target, rel=0.02)


def test_conditional_sampler_max_trials_budget():
    # An absurdly high threshold with a tiny trial budget must fail loudly.
    gen = RngStream(1, 0).generator()
    with pytest.raises(MaxTrialsExceededError):
        sample_conditional_pareto_vec(2, 2.0, 1e12, gen, max_trials=64)


def test_rejection_cost_scales_with_acceptance_probability():
    # Count uniform draws the bulk rejection sampler consumes per accepted
    # vector; the per-vector cost must track 1/P(accept), not worse.
    from tailfactor.sampling import _conditional_pareto_bulk, default_max_trials

    class CountingGen:
        def __init__(self, seed):
            self.gen = RngStream(seed, 0).generator()
            self.rows = 0

        def random(self, size=None):
            if size is not None:
                self.rows += int(np.atleast_1d(size)[0])
            return self.gen.random(size)

    alpha = 1.0
    costs = {}
    for t in (10.0, 100.0):
        cg = CountingGen(5)
        out = _conditional_pareto_bulk(
            500, 2, alpha, t, cg, default_max_trials(2, alpha, t)
        )
        assert out.shape == (500, 2)
        assert np.all(out.sum(axis=1) >= t)
        costs[t] = cg.rows / 500
    # P(||z||_1 >= t) ~ 2/t for alpha=1, so tenfold threshold means
    # roughly tenfold cost; allow slack for chunk-size overshoot.
    ratio = costs[100.0] / costs[10.0]
    assert 3.0 < ratio < 40.0
    assert costs[100.0] < 100.0 / 2.0 * 20.0  # within 20x of the ideal 1/p


def test_worst_case_tilts_and_threshold_formulas():
    c1, c2 = worst_case_tilts(10_000, 0.5)  # n^-0.5 = 0.01
    assert c1 == pytest.approx(1.01)
    assert c2 == pytest.approx(0.99)
    # zeta * n^((1-2s)/alpha): n=256, s=0.25, alpha=1 -> 256^0.5 = 16
    assert tail_threshold(256, 1.0, 0.25, 1.0) == pytest.approx(16.0)
    assert tail_threshold(256, 1.0, 0.25, 2.0) == pytest.approx(32.0)


def test_worst_case_latent_needs_two_factors():
    spec = ModelSpec(A=np.eye(3), alpha=2.0, s=0.2, latent_kind="tilted-worst-case")
    gen = RngStream(0, 0).generator()
    with pytest.raises(WorstCaseDimensionError):
        sample_latent_batch(spec, 10, 10, gen)


def test_worst_case_batch_is_pareto_above_threshold():
    # Above t the worst-case law coincides with the untilted product law
    # conditioned on the norm; check the tails of z1 look Pareto(alpha).
    spec = ModelSpec(A=np.eye(2), alpha=2.0, s=0.4, latent_kind="tilted-worst-case")
    n = 200_000
    gen = RngStream(99, 0).generator()
    z = sample_latent_batch(spec, n, n, gen)
    assert z.shape == (n, 2)
    assert np.all(z >= 0)
    t = tail_threshold(n, 2.0, 0.4)
    sub = z[z.sum(axis=1) >= t]
    assert sub.shape[0] > 100  # threshold regime leaves a real tail


def test_generate_dataset_deterministic_and_stream_separated():
    spec = ModelSpec(A=np.diag([2.0, 1.0]), alpha=1.5, s=0.3)
    b1 = generate_dataset(spec, 500, seed=42, stream_id=0)
    b2 = generate_dataset(spec, 500, seed=42, stream_id=0)
    b3 = generate_dataset(spec, 500, seed=42, stream_id=1)
    assert np.array_equal(b1.xs, b2.xs)
    assert not np.array_equal(b1.xs, b3.xs)
    # X = A Z with A = diag(2, 1): column-0 marginal is twice a Pareto draw
    assert b1.xs.shape == (500, 2)
    assert not b1.xs.flags.writeable


def test_batch_csv_round_trip(tmp_path):
    spec = ModelSpec(A=np.diag([1.5, 0.5]), alpha=2.0, s=0.2)
    batch = generate_dataset(spec, 64, seed=3, stream_id=7)
    path = tmp_path / "batch.csv"
    write_batch(batch, path)
    back = read_batch(path)
    assert np.array_equal(batch.xs, back.xs)
    assert back.seed == 3 and back.stream_id == 7
    assert back.spec.alpha == spec.alpha and back.spec.s == spec.s
    assert np.array_equal(back.spec.A, spec.A)
    header = path.read_text().splitlines()[0]
    assert header == "x1,x2"


def test_custom_latent_kind_scales_coordinates():
    spec = ModelSpec(
        A=np.eye(2), alpha=1.0, s=0.2, latent_kind="custom", custom_scales=[1.0, 4.0]
    )
    gen = RngStream(17, 0).generator()
    z = sample_latent_batch(spec, 100_000, 100_000, gen)
    # medians scale inversely with the per-coordinate factor
    med = np.median(z, axis=0)
    assert med[0] / med[1] == pytest.approx(4.0, rel=0.1)
