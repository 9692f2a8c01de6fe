"""Latent-factor samplers and dataset generation for X = A Z.

All randomness flows through counter-based Philox streams keyed by
(seed, stream_id), so replicates are independent, order-free and
bit-reproducible across platforms.
"""

import json
import math
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

from .errors import MaxTrialsExceededError, WorstCaseDimensionError
from .measures import ModelSpec, SampleBatch, _fmt

PILOT_DRAWS = 10_000


@dataclass(frozen=True)
class RngStream:
    """Named (seed, stream_id) pair; distinct ids give independent streams."""

    seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        return np.random.Generator(
            np.random.Philox(key=[self.seed & (2**64 - 1), self.stream_id & (2**64 - 1)])
        )


def _as_generator(rng) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError(f"expected RngStream or numpy Generator, got {type(rng)!r}")


def pareto_quantile(u, alpha: float):
    """Inverse CDF of the density alpha*(1+x)^-(alpha+1) on [0, inf)."""
    return (1.0 - np.asarray(u, dtype=np.float64)) ** (-1.0 / alpha) - 1.0


def tilted_pareto_quantile(u, alpha: float, c: float):
    """Inverse CDF of the scaled density alpha*c*(1+c*z)^-(alpha+1)."""
    return pareto_quantile(u, alpha) / c


def sample_pareto(alpha: float, rng, size=None):
    """Draw from the Pareto law with density alpha*(1+x)^-(alpha+1)."""
    gen = _as_generator(rng)
    u = gen.random(size)
    return pareto_quantile(u, alpha)


def sample_tilted_pareto(alpha: float, c: float, rng, size=None):
    """Draw from the tilted Pareto with density alpha*c*(1+c*z)^-(alpha+1)."""
    gen = _as_generator(rng)
    u = gen.random(size)
    return tilted_pareto_quantile(u, alpha, c)


@lru_cache(maxsize=256)
def _pilot_exceed_prob(m: int, alpha: float, t: float) -> float:
    """Monte Carlo pre-estimate of P(||z||_1 >= t) for m i.i.d. Pareto(alpha).

    Uses a private stream derived from the parameters so the estimate is
    deterministic and does not consume entropy from caller streams.
    """
    k0 = np.uint64(0x9E3779B97F4A7C15) ^ np.uint64(m)
    k1 = np.float64(alpha).view(np.uint64) ^ np.uint64(
        int(np.float64(t).view(np.uint64)) >> 1
    )
    gen = np.random.Generator(np.random.Philox(key=[int(k0), int(k1)]))
    z = pareto_quantile(gen.random((PILOT_DRAWS, m)), alpha)
    hits = int((z.sum(axis=1) >= t).sum())
    return max(hits, 1) / PILOT_DRAWS


def default_max_trials(m: int, alpha: float, t: float) -> int:
    """Trial budget: 1000 draws per expected acceptance, never less than 1000."""
    if t <= 0:
        return 1000
    p_hat = _pilot_exceed_prob(m, float(alpha), float(t))
    return 1000 * math.ceil(1.0 / p_hat)


def _conditional_pareto_bulk(count, m, alpha, t, gen, max_trials):
    """Fill ``count`` i.i.d. Pareto(alpha) vectors conditioned on l1-norm >= t.

    Chunked vectorized rejection; raises MaxTrialsExceededError once the
    total number of draws exceeds count * max_trials.
    """
    if count == 0:
        return np.empty((0, m))
    out = np.empty((count, m))
    filled = 0
    total_draws = 0
    p_hat = _pilot_exceed_prob(m, float(alpha), float(t)) if t > 0 else 1.0
    while filled < count:
        need = count - filled
        chunk = max(1024, min(int(4 * need / p_hat), 4_000_000))
        z = pareto_quantile(gen.random((chunk, m)), alpha)
        acc = z[z.sum(axis=1) >= t]
        take = min(acc.shape[0], need)
        out[filled : filled + take] = acc[:take]
        filled += take
        total_draws += chunk
        if filled < count and total_draws > max_trials * count:
            raise MaxTrialsExceededError(
                f"no acceptance after {total_draws} draws (t={t}, m={m})"
            )
    return out


def sample_conditional_pareto_vec(m, alpha, t, rng, max_trials=None):
    """One vector of m i.i.d. Pareto(alpha) components given ||z||_1 >= t."""
    gen = _as_generator(rng)
    if max_trials is None:
        max_trials = default_max_trials(m, alpha, t)
    trials = 0
    while trials < max_trials:
        chunk = min(max_trials - trials, 4096)
        z = pareto_quantile(gen.random((chunk, m)), alpha)
        hit = np.nonzero(z.sum(axis=1) >= t)[0]
        if hit.size:
            return z[hit[0]]
        trials += chunk
    raise MaxTrialsExceededError(f"no acceptance in {max_trials} trials (t={t})")


def worst_case_tilts(n: int, s: float):
    """Per-coordinate tilts (1 + n^-s, 1 - n^-s) of the two-factor worst case."""
    eps = float(n) ** (-s)
    return 1.0 + eps, 1.0 - eps


def tail_threshold(n: int, alpha: float, s: float, zeta: float = 1.0) -> float:
    """Radial level zeta * n^((1-2s)/alpha) above which the law is pure Pareto."""
    return zeta * float(n) ** ((1.0 - 2.0 * s) / alpha)


def sample_latent_batch(spec: ModelSpec, n: int, n_context: int, gen) -> np.ndarray:
    """n latent vectors in R^m_+ per the spec's latent kind.

    ``n_context`` is the sample size entering tilts and thresholds of the
    worst-case law (normally equal to n).
    """
    m, alpha = spec.m, spec.alpha
    if spec.latent_kind == "iid-pareto":
        return pareto_quantile(gen.random((n, m)), alpha)
    if spec.latent_kind == "custom":
        z = pareto_quantile(gen.random((n, m)), alpha)
        return z / spec.custom_scales[None, :]
    # tilted worst case
    if m != 2:
        raise WorstCaseDimensionError(f"worst-case latent law needs m=2, got m={m}")
    if n_context < 2:
        raise ValueError(f"worst-case law needs n_context >= 2, got {n_context}")
    c1, c2 = worst_case_tilts(n_context, spec.s)
    t = tail_threshold(n_context, alpha, spec.s, spec.zeta)
    u = gen.random((n, 2))
    z = np.column_stack(
        [
            tilted_pareto_quantile(u[:, 0], alpha, c1),
            tilted_pareto_quantile(u[:, 1], alpha, c2),
        ]
    )
    mask = z.sum(axis=1) >= t
    k = int(mask.sum())
    if k:
        max_trials = default_max_trials(2, alpha, t)
        z[mask] = _conditional_pareto_bulk(k, 2, alpha, t, gen, max_trials)
    return z


def sample_latent(spec: ModelSpec, n_context: int, rng) -> np.ndarray:
    """Single latent vector; see sample_latent_batch."""
    gen = _as_generator(rng)
    return sample_latent_batch(spec, 1, n_context, gen)[0]


def generate_dataset(
    spec: ModelSpec, n: int, seed: int, stream_id: int = 0
) -> SampleBatch:
    """n observations X = A Z, bit-reproducible given (seed, stream_id)."""
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    gen = RngStream(seed, stream_id).generator()
    z = sample_latent_batch(spec, n, n, gen)
    xs = z @ spec.A.T
    xs.setflags(write=False)
    return SampleBatch(spec=spec, seed=seed, stream_id=stream_id, xs=xs)


# ---------------------------------------------------------------------------
# CSV + sidecar persistence


def write_batch(batch: SampleBatch, csv_path) -> None:
    csv_path = Path(csv_path)
    d = batch.xs.shape[1]
    lines = [",".join(f"x{j + 1}" for j in range(d))]
    for row in batch.xs:
        lines.append(",".join(_fmt(v) for v in row))
    csv_path.write_text("\n".join(lines) + "\n")

    spec = batch.spec
    sidecar = {
        "A": [[float(_fmt(v)) for v in row] for row in spec.A],
        "alpha": spec.alpha,
        "s": spec.s,
        "latent_kind": spec.latent_kind,
        "zeta": spec.zeta,
        "custom_scales": None
        if spec.custom_scales is None
        else [float(v) for v in spec.custom_scales],
        "seed": batch.seed,
        "stream_id": batch.stream_id,
        "n": batch.n,
    }
    csv_path.with_suffix(".json").write_text(json.dumps(sidecar, indent=2) + "\n")


def read_batch(csv_path) -> SampleBatch:
    csv_path = Path(csv_path)
    xs = np.loadtxt(csv_path, delimiter=",", skiprows=1, ndmin=2)
    doc = json.loads(csv_path.with_suffix(".json").read_text())
    spec = ModelSpec(
        A=np.asarray(doc["A"], dtype=np.float64),
        alpha=doc["alpha"],
        s=doc["s"],
        latent_kind=doc["latent_kind"],
        zeta=doc.get("zeta", 1.0),
        custom_scales=doc.get("custom_scales"),
    )
    xs.setflags(write=False)
    return SampleBatch(spec=spec, seed=doc["seed"], stream_id=doc["stream_id"], xs=xs)
