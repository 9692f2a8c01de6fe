"""Command-line interface: simulate, estimate, experiment, wasserstein.

Exit codes: 0 success, 1 runtime/domain error, 2 config or usage error.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .errors import ConfigError, TailFactorError
from .estimators import (
    ConvConfig,
    TwoStepConfig,
    estimate_conventional,
    estimate_two_step,
)
from .harness import (
    ExperimentConfig,
    emit_outputs,
    run_convergence_experiment,
)
from .measures import (
    ModelSpec,
    measure_from_json,
    measure_to_json,
    spectral_measure_of,
    validate_measure,
    _fmt,
)
from .numerics import KMeansConfig
from .sampling import generate_dataset, read_batch, write_batch, worst_case_tilts
from .transport import wasserstein_p

TOP_KEYS = {"model", "estimator", "experiment"}


def _check_keys(doc: dict, allowed, path: str):
    unknown = set(doc) - set(allowed)
    if unknown:
        raise ConfigError(f"{path}: unknown key(s) {sorted(unknown)}")


def _require(doc: dict, key: str, path: str):
    if key not in doc:
        raise ConfigError(f"{path}.{key}: missing required field")
    return doc[key]


def _number(doc, key, path, lo=None, hi=None, integer=False, default=None):
    if key not in doc:
        if default is not None:
            return default
        raise ConfigError(f"{path}.{key}: missing required field")
    v = doc[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{path}.{key}: expected a number, got {v!r}")
    if integer and int(v) != v:
        raise ConfigError(f"{path}.{key}: expected an integer, got {v!r}")
    if lo is not None and v <= lo:
        raise ConfigError(f"{path}.{key}: must be > {lo}, got {v}")
    if hi is not None and v >= hi:
        raise ConfigError(f"{path}.{key}: must be < {hi}, got {v}")
    return int(v) if integer else float(v)


def load_config(path) -> dict:
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config root must be a JSON object")
    _check_keys(doc, TOP_KEYS, "config")
    return doc


def _kmeans_from(doc: dict, path: str, k: int) -> KMeansConfig:
    _check_keys(doc, {"k", "max_iters", "tol", "restarts", "seed"}, path)
    return KMeansConfig(
        k=int(doc.get("k", k)),
        max_iters=_number(doc, "max_iters", path, lo=0, integer=True, default=100),
        tol=_number(doc, "tol", path, lo=0, default=1e-9),
        restarts=_number(doc, "restarts", path, lo=0, integer=True, default=10),
        seed=_number(doc, "seed", path, integer=True, default=0),
    )


def _model_alpha_s(cfg: dict):
    model = cfg.get("model", {})
    return model.get("alpha"), model.get("s")


def model_spec_from(cfg: dict, n: int) -> ModelSpec:
    model = _require(cfg, "model", "config")
    _check_keys(
        model,
        {"A", "alpha", "s", "latent", "zeta", "n", "seed", "stream_id"},
        "model",
    )
    alpha = _number(model, "alpha", "model", lo=0)
    s = _number(model, "s", "model", lo=0, hi=0.5)
    zeta = _number(model, "zeta", "model", lo=0, default=1.0)
    latent = model.get("latent", "tilted-worst-case")
    custom = None
    if isinstance(latent, dict):
        _check_keys(latent, {"custom"}, "model.latent")
        custom = np.asarray(_require(latent, "custom", "model.latent"), dtype=float)
        latent = "custom"
    A_field = model.get("A", "worst-case-diag")
    if A_field == "worst-case-diag":
        c1, c2 = worst_case_tilts(n, s)
        A = np.diag([c1, c2])
    else:
        A = np.asarray(A_field, dtype=np.float64)
        if A.ndim != 2:
            raise ConfigError("model.A: expected a 2-d matrix")
    try:
        return ModelSpec(
            A=A, alpha=alpha, s=s, latent_kind=latent, zeta=zeta, custom_scales=custom
        )
    except (ValueError, TailFactorError) as exc:
        raise ConfigError(f"model: {exc}") from exc


def conv_config_from(cfg: dict) -> ConvConfig:
    est = _require(cfg, "estimator", "config")
    _check_keys(est, {"conv", "two_step", "ground_truth"}, "estimator")
    conv = _require(est, "conv", "estimator")
    _check_keys(conv, {"kappa_bar", "alpha", "s", "collapse_k", "kmeans"}, "estimator.conv")
    alpha_m, s_m = _model_alpha_s(cfg)
    alpha = conv.get("alpha", alpha_m)
    s = conv.get("s", s_m)
    if alpha is None or s is None:
        raise ConfigError("estimator.conv: alpha and s required (or set them in model)")
    k = _number(conv, "collapse_k", "estimator.conv", lo=0, integer=True, default=2)
    return ConvConfig(
        kappa_bar=_number(conv, "kappa_bar", "estimator.conv", lo=0),
        alpha=float(alpha),
        s=float(s),
        collapse_k=k,
        kmeans=_kmeans_from(conv.get("kmeans", {}), "estimator.conv.kmeans", k),
    )


def two_step_config_from(cfg: dict) -> TwoStepConfig:
    est = _require(cfg, "estimator", "config")
    _check_keys(est, {"conv", "two_step", "ground_truth"}, "estimator")
    ts = _require(est, "two_step", "estimator")
    _check_keys(
        ts,
        {"kappa_tilde", "kappa", "alpha", "s", "m", "r_hat", "det_tol", "kmeans"},
        "estimator.two_step",
    )
    alpha_m, s_m = _model_alpha_s(cfg)
    alpha = ts.get("alpha", alpha_m)
    s = ts.get("s", s_m)
    if alpha is None or s is None:
        raise ConfigError(
            "estimator.two_step: alpha and s required (or set them in model)"
        )
    m = _number(ts, "m", "estimator.two_step", lo=1, integer=True, default=2)
    return TwoStepConfig(
        kappa_tilde=_number(ts, "kappa_tilde", "estimator.two_step", lo=0),
        kappa=_number(ts, "kappa", "estimator.two_step", lo=0),
        alpha=float(alpha),
        s=float(s),
        m=m,
        r_hat=_number(ts, "r_hat", "estimator.two_step", lo=0, default=1.0),
        det_tol=_number(ts, "det_tol", "estimator.two_step", lo=0, default=1e-10),
        kmeans=_kmeans_from(ts.get("kmeans", {}), "estimator.two_step.kmeans", m),
    )


def experiment_config_from(cfg: dict, seed_override=None) -> ExperimentConfig:
    exp = _require(cfg, "experiment", "config")
    _check_keys(
        exp,
        {"n_grid", "replicates", "base_seed", "aggregate", "p", "estimators"},
        "experiment",
    )
    model = _require(cfg, "model", "config")
    alpha = _number(model, "alpha", "model", lo=0)
    s = _number(model, "s", "model", lo=0, hi=0.5)
    zeta = _number(model, "zeta", "model", lo=0, default=1.0)
    latent = model.get("latent", "tilted-worst-case")
    if not isinstance(latent, str):
        raise ConfigError("experiment runs support string latent kinds only")
    n_grid = _require(exp, "n_grid", "experiment")
    if not isinstance(n_grid, list) or not all(isinstance(v, int) for v in n_grid):
        raise ConfigError("experiment.n_grid: expected a list of integers")
    tags = exp.get("estimators", ["conv", "two-step"])
    fixed_A = None
    if model.get("A", "worst-case-diag") != "worst-case-diag":
        fixed_A = np.asarray(model["A"], dtype=np.float64)
    base_seed = _number(exp, "base_seed", "experiment", integer=True)
    if seed_override is not None:
        base_seed = seed_override
    try:
        return ExperimentConfig(
            alpha=alpha,
            s=s,
            n_grid=tuple(n_grid),
            replicates=_number(exp, "replicates", "experiment", lo=0, integer=True),
            base_seed=base_seed,
            conv=conv_config_from(cfg) if "conv" in tags else None,
            two_step=two_step_config_from(cfg) if "two-step" in tags else None,
            aggregate=exp.get("aggregate", "median"),
            p=_number(exp, "p", "experiment", lo=0, default=1.0),
            latent_kind=latent,
            zeta=zeta,
            fixed_A=fixed_A,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _ground_truth_measure(cfg: dict):
    est = cfg.get("estimator", {})
    gt = est.get("ground_truth")
    if gt is None:
        return None
    _check_keys(gt, {"A", "alpha"}, "estimator.ground_truth")
    alpha_m, _ = _model_alpha_s(cfg)
    alpha = gt.get("alpha", alpha_m)
    if alpha is None:
        raise ConfigError("estimator.ground_truth.alpha: missing required field")
    A = np.asarray(_require(gt, "A", "estimator.ground_truth"), dtype=np.float64)
    return spectral_measure_of(A, float(alpha))


# ---------------------------------------------------------------------------
# subcommand implementations


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    model = _require(cfg, "model", "config")
    n = _number(model, "n", "model", lo=0, integer=True)
    seed = _number(model, "seed", "model", integer=True)
    if args.seed_override is not None:
        seed = args.seed_override
    stream_id = _number(model, "stream_id", "model", integer=True, default=0)
    spec = model_spec_from(cfg, n)
    batch = generate_dataset(spec, n, seed, stream_id)
    write_batch(batch, args.out)
    return 0


def cmd_estimate(args) -> int:
    cfg = load_config(args.config)
    batch = read_batch(args.batch)
    if args.kind == "conv":
        mu, _ = estimate_conventional(batch, conv_config_from(cfg))
    else:
        _, mu, _ = estimate_two_step(batch, two_step_config_from(cfg))
    Path(args.out).write_text(measure_to_json(mu) + "\n")
    truth = _ground_truth_measure(cfg)
    if truth is not None:
        print(_fmt(wasserstein_p(mu, truth, 1.0)))
    return 0


def cmd_experiment(args) -> int:
    cfg = load_config(args.config)
    exp_cfg = experiment_config_from(cfg, seed_override=args.seed_override)
    out_dir = Path(args.out)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"IoError: {exc}", file=sys.stderr)
        return 1
    result = run_convergence_experiment(exp_cfg, threads=args.threads)
    emit_outputs(result, out_dir)
    for tag, (slope, _, r2, _) in sorted(result.slope_fits.items()):
        print(f"{tag}: slope={_fmt(slope)} r2={_fmt(r2)}")
    return 0


def cmd_wasserstein(args) -> int:
    try:
        mu = measure_from_json(Path(args.mu).read_text())
        nu = measure_from_json(Path(args.nu).read_text())
    except (OSError, ValueError, TailFactorError) as exc:
        raise ConfigError(f"cannot load measure: {exc}") from exc
    if not validate_measure(mu) or not validate_measure(nu):
        raise ConfigError("input measure violates simplex-measure invariants")
    print(_fmt(wasserstein_p(mu, nu, args.p)))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tailfactor",
        description="Heavy-tailed factor models: simulation, spectral-measure "
        "estimation and convergence-rate experiments.",
    )
    parser.add_argument("--seed-override", type=int, default=None)
    parser.add_argument("--threads", type=int, default=1)
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="generate a sample batch CSV")
    p_sim.add_argument("--config", required=True)
    p_sim.add_argument("--out", required=True)
    p_sim.set_defaults(func=cmd_simulate)

    p_est = sub.add_parser("estimate", help="estimate the spectral measure")
    p_est.add_argument("kind", choices=["conv", "two-step"])
    p_est.add_argument("batch", help="sample batch CSV (with JSON sidecar)")
    p_est.add_argument("--config", required=True)
    p_est.add_argument("--out", required=True)
    p_est.set_defaults(func=cmd_estimate)

    p_exp = sub.add_parser("experiment", help="run a convergence-rate sweep")
    p_exp.add_argument("--config", required=True)
    p_exp.add_argument("--out", required=True, help="output directory")
    p_exp.set_defaults(func=cmd_experiment)

    p_w = sub.add_parser("wasserstein", help="W_p between two measure JSONs")
    p_w.add_argument("mu")
    p_w.add_argument("nu")
    p_w.add_argument("--p", type=float, default=1.0)
    p_w.set_defaults(func=cmd_wasserstein)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"ConfigError: {exc}", file=sys.stderr)
        return 2
    except TailFactorError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"IoError: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
