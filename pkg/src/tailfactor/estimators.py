"""Spectral-measure estimators: peak-over-threshold and the two-step method.

The conventional estimator thresholds the samples radially, normalizes the
survivors onto the simplex and summarizes them with k-means.  The two-step
estimator first recovers the column directions from a very high threshold
(only O(log n) exceedances), inverts that direction matrix to decouple the
coordinates, then solves a one-dimensional tail-frequency equation per
coordinate to recover the column magnitudes.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    NoExceedancesError,
    NoSolutionError,
    TooFewPointsError,
)
from .measures import DiscreteMeasure, SampleBatch, make_measure, spectral_measure_of
from .numerics import KMeansConfig, invert_square_matrix, kmeans


@dataclass(frozen=True)
class ConvConfig:
    """Peak-over-threshold estimator settings."""

    kappa_bar: float
    alpha: float
    s: float
    collapse_k: int = 2
    kmeans: KMeansConfig = field(default_factory=lambda: KMeansConfig(k=2))

    def __post_init__(self):
        if self.kappa_bar <= 0 or self.collapse_k < 1:
            raise ValueError(f"invalid conventional config {self}")


@dataclass(frozen=True)
class TwoStepConfig:
    """Two-step estimator settings (square case d = m)."""

    kappa_tilde: float
    kappa: float
    alpha: float
    s: float
    m: int = 2
    r_hat: float = 1.0
    kmeans: KMeansConfig = field(default_factory=lambda: KMeansConfig(k=2))
    det_tol: float = 1e-10

    def __post_init__(self):
        if self.kappa_tilde <= 0 or self.kappa <= 0 or self.m < 2 or self.r_hat <= 0:
            raise ValueError(f"invalid two-step config {self}")


def _thresholded_points(xs: np.ndarray, tau: float):
    """Normalized samples with l1-norm strictly above tau, in sample order."""
    norms = np.abs(xs).sum(axis=1)
    mask = norms > tau
    n_tau = int(mask.sum())
    if n_tau == 0:
        raise NoExceedancesError(f"no sample above tau={tau}")
    return xs[mask] / norms[mask, None], n_tau


def empirical_angular_measure(batch, tau: float):
    """Empirical angular measure of the samples above the radial threshold.

    Returns (measure, n_tau) where atoms are the normalized exceedances with
    uniform weight 1/n_tau (duplicates merged).
    """
    if tau < 0:
        raise ValueError(f"need tau >= 0, got {tau}")
    xs = batch.xs if isinstance(batch, SampleBatch) else np.asarray(batch)
    points, n_tau = _thresholded_points(xs, tau)
    mu = make_measure(points, np.full(n_tau, 1.0 / n_tau))
    return mu, n_tau


def conventional_threshold(n: int, cfg: ConvConfig) -> float:
    """Rate-optimal radial threshold, switching on the deviation regime."""
    critical = 1.0 / (2.0 + max(1.0, cfg.alpha))
    if cfg.s >= critical:
        exponent = 1.0 / min(2.0 + cfg.alpha, 3.0 * cfg.alpha)
    else:
        exponent = (1.0 - 2.0 * cfg.s) / cfg.alpha
    return cfg.kappa_bar * float(n) ** exponent


def estimate_conventional(batch: SampleBatch, cfg: ConvConfig):
    """POT estimate: k-means summary of the thresholded angular samples.

    Returns (measure, n_tau).
    """
    tau = conventional_threshold(batch.n, cfg)
    points, n_tau = _thresholded_points(batch.xs, tau)
    if n_tau < cfg.collapse_k:
        raise TooFewPointsError(f"n_tau={n_tau} below k={cfg.collapse_k}")
    km = kmeans(points, _with_k(cfg.kmeans, cfg.collapse_k))
    return make_measure(km.centers, km.weights), n_tau


def _with_k(kcfg: KMeansConfig, k: int) -> KMeansConfig:
    if kcfg.k == k:
        return kcfg
    return KMeansConfig(
        k=k,
        max_iters=kcfg.max_iters,
        tol=kcfg.tol,
        restarts=kcfg.restarts,
        seed=kcfg.seed,
    )


def direction_threshold(n: int, cfg: TwoStepConfig) -> float:
    """Direction-recovery threshold, leaving only O(log n) exceedances."""
    if n < 3:
        raise ValueError(f"need n >= 3, got {n}")
    return cfg.kappa_tilde * (n / math.log(n)) ** (1.0 / cfg.alpha)


def estimate_directions(batch: SampleBatch, cfg: TwoStepConfig):
    """Direction matrix: k-means centers of the high-threshold angular cloud.

    Returns (matrix with unit-l1 columns sorted lexicographically, n_tau_tilde).
    """
    tau_tilde = direction_threshold(batch.n, cfg)
    try:
        points, n_tt = _thresholded_points(batch.xs, tau_tilde)
    except NoExceedancesError:
        raise TooFewPointsError(f"n_tau_tilde=0 below m={cfg.m}") from None
    if n_tt < cfg.m:
        raise TooFewPointsError(f"n_tau_tilde={n_tt} below m={cfg.m}")
    km = kmeans(points, _with_k(cfg.kmeans, cfg.m))
    centers = km.centers / np.abs(km.centers).sum(axis=1, keepdims=True)
    return centers.T.copy(), n_tt


def solve_theta(count: int, n: int, r_hat: float, tau: float, alpha: float) -> float:
    """Closed-form solution of count/n = r_hat * (1 + tau/theta)^(-alpha)."""
    if count <= 0:
        raise NoExceedancesError("zero exceedances in estimating equation")
    ratio = count / (n * r_hat)
    if ratio >= 1.0:
        raise NoSolutionError(f"tail frequency {ratio:.3g} >= 1 admits no solution")
    return tau / (ratio ** (-1.0 / alpha) - 1.0)


def two_step_from_directions(batch: SampleBatch, cfg: TwoStepConfig, a_dir):
    """Magnitude stage of the two-step estimator, given the direction matrix.

    Decouples coordinates with the inverse of ``a_dir``, then solves the
    tail-frequency equation per coordinate.  Returns (A_hat, measure).
    """
    a_dir = np.asarray(a_dir, dtype=np.float64)
    a_inv = invert_square_matrix(a_dir, cfg.det_tol)
    transformed = batch.xs @ a_inv.T
    n = batch.n
    tau = cfg.kappa * float(n) ** ((1.0 - 2.0 * cfg.s) / cfg.alpha)
    thetas = np.empty(cfg.m)
    for i in range(cfg.m):
        count = int((transformed[:, i] > tau).sum())
        thetas[i] = solve_theta(count, n, cfg.r_hat, tau, cfg.alpha)
    a_hat = a_dir * thetas[None, :]
    return a_hat, spectral_measure_of(a_hat, cfg.alpha)


def estimate_two_step(batch: SampleBatch, cfg: TwoStepConfig):
    """Two-step estimate of the spectral measure.

    Returns (A_hat, measure, n_tau_tilde).  Any stage failure raises a typed
    error; callers treat that as a failed replicate.
    """
    d = batch.xs.shape[1]
    if d != cfg.m:
        raise ValueError(f"two-step estimator needs d = m, got d={d}, m={cfg.m}")
    a_dir, n_tt = estimate_directions(batch, cfg)
    a_hat, measure = two_step_from_directions(batch, cfg, a_dir)
    return a_hat, measure, n_tt
