"""Command line front end for data preparation, sampler runs and reports.

Subcommands: generate, ingest, run, diagnose, saturation, compare.  Runs
are driven by a JSON config with a strict schema (unknown keys are
rejected); a resolved copy with every default filled in is written next
to the trace, and re-running that copy reproduces the trace bit for bit.
Exit codes: 0 success, 2 usage or config error, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from .data import DataError, generate, ingest_csv, load_dataset, save_dataset
from .diagnostics import (
    compare_posteriors,
    eval_summary,
    gelman_rubin,
    write_autocorrelation_csv,
    write_fraction_histogram_csv,
)
from .models import FAMILIES, ModelError, default_cauchy_prior
from .proxy import ProxyError, ProxyPolicy, build_proxy
from .samplers import (
    ConfidenceConfig,
    FireflyBoundError,
    RandomWalkProposal,
    austerity_run,
    confidence_run,
    default_scale,
    delayed_acceptance_run,
    eps0_from_proposal_scale,
    find_map,
    firefly_run,
    load_trace,
    mh_run,
    pm_mh_run,
    save_trace,
    save_weighted_trace,
    sgld_run,
)
from .samplers.pseudo_marginal import gaussian_loglik_floor

GENERATE_KINDS = ("gaussian_1d", "lognormal_1d", "logistic_two_gaussians",
                  "gamma_from_covariates")
SAMPLERS = ("mh", "confidence", "austerity", "firefly", "pseudo_marginal",
            "sgld", "delayed")

_MODEL_KEYS = {"family", "prior", "kappa", "coef_scale", "intercept_scale"}
_PROPOSAL_KEYS = {"scale", "target_accept", "adapt_horizon"}
_CONFIG_KEYS = {"model", "dataset", "sampler", "params", "n_iter", "seed",
                "out", "theta0", "proposal"}
_PARAM_KEYS = {
    "mh": set(),
    "confidence": {"delta", "batch_growth", "t_init", "with_replacement",
                   "proxy", "alpha", "radius"},
    "austerity": {"eps_pvalue", "t_init", "growth"},
    "firefly": {"resample_fraction", "radius"},
    "pseudo_marginal": {"t", "eps"},
    "sgld": {"t_sub", "fraction", "eps0", "exponent"},
    "delayed": {"n_batches"},
}


class UsageError(Exception):
    """Bad arguments or config; exits with code 2."""


def _check_keys(block: dict, allowed, where: str) -> None:
    unknown = sorted(set(block) - set(allowed))
    if unknown:
        raise UsageError("unknown keys in %s: %s" % (where, ", ".join(unknown)))


def _build_model(block: dict, dataset):
    _check_keys(block, _MODEL_KEYS, "model")
    family = block.get("family")
    if family not in FAMILIES:
        raise UsageError("model.family must be one of %s" %
                         ", ".join(sorted(FAMILIES)))
    prior_name = block.get("prior", "flat")
    if prior_name == "flat":
        prior = None
    elif prior_name == "cauchy":
        prior = default_cauchy_prior(dataset,
                                     coef_scale=block.get("coef_scale", 2.5),
                                     intercept_scale=block.get("intercept_scale", 10.0))
    else:
        raise UsageError("model.prior must be 'flat' or 'cauchy'")
    if family == "gamma":
        kappa = block.get("kappa", dataset.meta.get("kappa"))
        if kappa is None:
            raise UsageError("gamma model needs model.kappa (not present in "
                             "dataset metadata)")
        return FAMILIES[family](kappa=float(kappa), prior=prior)
    if "kappa" in block:
        raise UsageError("model.kappa only applies to the gamma family")
    return FAMILIES[family](prior=prior)


def _resolve_run_config(cfg: dict, args) -> dict:
    """Validate the config, apply flag overrides, fill every default."""
    _check_keys(cfg, _CONFIG_KEYS, "config")
    cfg = dict(cfg)
    if args.dataset is not None:
        cfg["dataset"] = args.dataset
    if args.out is not None:
        cfg["out"] = args.out
    if args.seed is not None:
        cfg["seed"] = args.seed
    if args.n_iter is not None:
        cfg["n_iter"] = args.n_iter
    for key in ("model", "dataset", "sampler", "n_iter", "seed", "out"):
        if key not in cfg:
            raise UsageError("config is missing %r" % key)
    if cfg["sampler"] not in SAMPLERS:
        raise UsageError("unknown sampler %r; valid names: %s"
                         % (cfg["sampler"], ", ".join(SAMPLERS)))
    params = dict(cfg.get("params", {}))
    _check_keys(params, _PARAM_KEYS[cfg["sampler"]],
                "params for sampler %r" % cfg["sampler"])
    cfg["params"] = params
    prop = dict(cfg.get("proposal", {}))
    _check_keys(prop, _PROPOSAL_KEYS, "proposal")
    cfg["proposal"] = prop
    if not Path(cfg["dataset"]).exists():
        raise UsageError("dataset path does not exist: %s" % cfg["dataset"])
    return cfg


def cmd_run(args) -> int:
    with open(args.config) as fh:
        try:
            cfg = json.load(fh)
        except json.JSONDecodeError as exc:
            raise UsageError("config is not valid JSON: %s" % exc)
    cfg = _resolve_run_config(cfg, args)

    dataset = load_dataset(cfg["dataset"])
    model = _build_model(cfg["model"], dataset)
    n_iter, seed = int(cfg["n_iter"]), int(cfg["seed"])
    out_dir = Path(cfg["out"])
    out_dir.mkdir(parents=True, exist_ok=True)

    if cfg.get("theta0") is not None:
        theta0 = np.asarray(cfg["theta0"], dtype=np.float64)
    else:
        theta0 = find_map(model, dataset).theta
    cfg["theta0"] = [float(v) for v in theta0]

    prop = cfg["proposal"]
    scale = prop.get("scale")
    if scale is None:
        scale = default_scale(dataset.n, model.param_dim(dataset))
    proposal = RandomWalkProposal(
        scale=float(scale),
        target_accept=prop.get("target_accept", 0.5),
        adapt_horizon=int(prop.get("adapt_horizon", 1000)),
    )
    cfg["proposal"] = {"scale": proposal.scale,
                       "target_accept": proposal.target_accept,
                       "adapt_horizon": proposal.adapt_horizon}

    name = cfg["sampler"]
    params = cfg["params"]
    trace = _dispatch_sampler(name, params, model, dataset, proposal, theta0,
                              n_iter, seed, out_dir)

    trace.meta["dataset_hash"] = dataset.content_hash()
    trace.meta["model"] = model.describe()
    if name == "sgld":
        save_weighted_trace(trace, out_dir)
    else:
        save_trace(trace, out_dir)
    with open(out_dir / "run_config.json", "w") as fh:
        json.dump(cfg, fh, indent=2, sort_keys=True)
    print("wrote trace to %s (%d iterations)" % (out_dir, n_iter))
    return 0


def _dispatch_sampler(name, params, model, dataset, proposal, theta0,
                      n_iter, seed, out_dir):
    if name == "mh":
        return mh_run(model, dataset, proposal, theta0, n_iter, seed)

    if name == "confidence":
        config = ConfidenceConfig(
            delta=params.setdefault("delta", 0.1),
            batch_growth=params.setdefault("batch_growth", 1.5),
            t_init=int(params.setdefault("t_init", 1)),
            with_replacement=params.setdefault("with_replacement", True),
        )
        mode = params.setdefault("proxy", "single")
        policy = None
        if mode == "none":
            pass
        elif mode == "single":
            policy = ProxyPolicy("single",
                                 radius=params.setdefault("radius", 1.0))
        elif mode == "drop":
            policy = ProxyPolicy("drop",
                                 alpha=int(params.setdefault("alpha", 10)),
                                 radius=params.setdefault("radius", 1.0))
        else:
            raise UsageError("params.proxy must be 'none', 'single' or 'drop'")
        return confidence_run(model, dataset, config, proposal, theta0,
                              n_iter, seed, policy=policy, store_dir=out_dir)

    if name == "austerity":
        return austerity_run(model, dataset, proposal, theta0, n_iter, seed,
                             eps_pvalue=params.setdefault("eps_pvalue", 0.05),
                             t_init=int(params.setdefault("t_init", 100)),
                             growth=params.setdefault("growth", 2.0))

    if name == "firefly":
        proxy = build_proxy(model, dataset, theta0,
                            radius=params.setdefault("radius", 1.0),
                            store_dir=out_dir)
        try:
            return firefly_run(
                model, dataset, proposal, theta0, n_iter, seed, proxy=proxy,
                resample_fraction=params.setdefault("resample_fraction", 0.1))
        finally:
            proxy.release()

    if name == "pseudo_marginal":
        if model.family != "gaussian":
            raise UsageError("pseudo_marginal needs a per-datum log-likelihood "
                             "floor; built in only for the gaussian family")
        return pm_mh_run(model, dataset, proposal, theta0, n_iter, seed,
                         t=int(params.setdefault("t", 10)),
                         eps=params.setdefault("eps", 0.1),
                         a_fn=gaussian_loglik_floor(dataset))

    if name == "sgld":
        t_sub = params.get("t_sub")
        if t_sub is None:
            frac = params.setdefault("fraction", 0.1)
            t_sub = max(1, int(round(frac * dataset.n)))
        params["t_sub"] = int(t_sub)
        eps0 = params.get("eps0")
        if eps0 is None:
            eps0 = eps0_from_proposal_scale(proposal.scale)
        params["eps0"] = float(eps0)
        return sgld_run(model, dataset, params["t_sub"], theta0, n_iter, seed,
                        eps0=params["eps0"],
                        exponent=params.setdefault("exponent", 1.0 / 3.0))

    if name == "delayed":
        return delayed_acceptance_run(
            model, dataset, proposal, theta0, n_iter, seed,
            n_batches=int(params.setdefault("n_batches", 10)))

    raise UsageError("unknown sampler %r" % name)


def cmd_generate(args) -> int:
    if args.kind not in GENERATE_KINDS:
        raise UsageError("unknown kind %r; valid kinds: %s"
                         % (args.kind, ", ".join(GENERATE_KINDS)))
    params = {}
    for item in args.param:
        if "=" not in item:
            raise UsageError("--param expects key=value, got %r" % item)
        key, val = item.split("=", 1)
        params[key] = float(val)
    dataset = generate(args.kind, args.n, args.seed, **params)
    save_dataset(dataset, args.out)
    print("wrote %s dataset (n=%d, d=%d) to %s"
          % (args.kind, dataset.n, dataset.d, args.out))
    return 0


def cmd_ingest(args) -> int:
    if not Path(args.csv).exists():
        raise UsageError("csv path does not exist: %s" % args.csv)

    def cols(spec):
        if spec is None:
            return None
        return [int(c) if c.lstrip("-").isdigit() else c
                for c in spec.split(",")]

    feature_cols = cols(args.features)
    label, response = args.label, args.response
    label = int(label) if label is not None and label.lstrip("-").isdigit() else label
    response = (int(response) if response is not None
                and response.lstrip("-").isdigit() else response)
    dataset = ingest_csv(
        args.csv, feature_cols=feature_cols, label_col=label,
        response_col=response, standardize=args.standardize,
        add_intercept=args.add_intercept, header=not args.no_header,
    )
    save_dataset(dataset, args.out)
    print("ingested %d rows, %d feature columns -> %s"
          % (dataset.n, dataset.d, args.out))
    return 0


def cmd_diagnose(args) -> int:
    for path in args.trace:
        if not Path(path).exists():
            raise UsageError("missing trace: %s" % path)
    if args.reference is not None and not Path(args.reference).exists():
        raise UsageError("missing reference trace: %s" % args.reference)
    traces = [load_trace(p) for p in args.trace]
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    first = traces[0]
    max_lag = args.max_lag
    if max_lag is None:
        max_lag = min(200, first.n_iter - 1)
    series = {"theta_%d" % j: first.states[:, j] for j in range(first.dim)}
    write_autocorrelation_csv(out_dir / "autocorrelation.csv", series, max_lag)
    write_fraction_histogram_csv(out_dir / "eval_fractions.csv", first)

    report = {"traces": args.trace, "n_chains": len(traces)}
    if len(traces) >= 2:
        dim = traces[0].dim
        report["gelman_rubin"] = [
            gelman_rubin([t.states[:, j] for t in traces]) for j in range(dim)
        ]
    else:
        report["gelman_rubin"] = None
        report["note"] = "Gelman-Rubin needs at least 2 chains; skipped"
    report["eval_summary"] = []
    for path, t in zip(args.trace, traces):
        s = eval_summary(t)
        report["eval_summary"].append({
            "trace": path,
            "mean_fraction": s.mean_fraction,
            "median_fraction": s.median_fraction,
            "quantiles": s.quantiles,
            "acceptance_rate": t.acceptance_rate(),
        })
    if args.reference is not None:
        ref = load_trace(args.reference)
        report["comparison"] = []
        for path, t in zip(args.trace, traces):
            m = compare_posteriors(t, ref)
            report["comparison"].append({
                "trace": path,
                "mean_diff": [float(v) for v in m["mean_diff"]],
                "std_diff": [float(v) for v in m["std_diff"]],
                "wasserstein1": [float(v) for v in m["wasserstein1"]],
            })
    with open(out_dir / "report.json", "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
    print("wrote report to %s" % (out_dir / "report.json"))
    if report["gelman_rubin"] is None:
        print("note: Gelman-Rubin skipped (needs at least 2 chains)")
    return 0


_SATURATION_MODEL = {
    "gaussian_1d": "gaussian",
    "lognormal_1d": "gaussian",
    "logistic_two_gaussians": "logistic",
    "gamma_from_covariates": "gamma",
}


def cmd_saturation(args) -> int:
    if args.kind not in GENERATE_KINDS:
        raise UsageError("unknown kind %r; valid kinds: %s"
                         % (args.kind, ", ".join(GENERATE_KINDS)))
    sizes = sorted(set(args.n))
    low = [n for n in sizes if n < 10]
    if low:
        raise UsageError(
            "n below 10 refused (%s): with so few points the concentration "
            "bound is degenerate and every decision is a full sweep"
            % ", ".join(str(n) for n in low))
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    rows = []
    for n in sizes:
        dataset = generate(args.kind, n, args.seed)
        model = _build_model({"family": _SATURATION_MODEL[args.kind]}, dataset)
        theta0 = find_map(model, dataset).theta
        proposal = RandomWalkProposal(
            scale=default_scale(n, model.param_dim(dataset)))
        config = ConfidenceConfig(delta=args.delta)
        trace = confidence_run(
            model, dataset, config, proposal, theta0, args.n_iter, args.seed,
            policy=ProxyPolicy("single"), store_dir=out_dir)
        med = float(np.median(trace.evals))
        rows.append({
            "n": n,
            "median_evals": med,
            "median_fraction": med / n,
            "median_log10_fraction": float(np.log10(med / n)),
            "mean_fraction": float(trace.evals.mean()) / n,
        })

    table_path = out_dir / "saturation.csv"
    with open(table_path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        w.writerows(rows)
    for r in rows:
        print("n=%-9d median L=%-9.0f median log10(L/n)=%.3f"
              % (r["n"], r["median_evals"], r["median_log10_fraction"]))
    print("wrote %s" % table_path)
    return 0


def cmd_compare(args) -> int:
    for path in (args.trace_a, args.trace_b):
        if not Path(path).exists():
            raise UsageError("missing trace: %s" % path)
    metrics = compare_posteriors(load_trace(args.trace_a),
                                 load_trace(args.trace_b))
    rows = [["coordinate", "mean_diff", "std_diff", "wasserstein1"]]
    for j in range(metrics["mean_diff"].shape[0]):
        rows.append([str(j),
                     "%.17g" % metrics["mean_diff"][j],
                     "%.17g" % metrics["std_diff"][j],
                     "%.17g" % metrics["wasserstein1"][j]])
    if args.out is not None:
        with open(args.out, "w", newline="") as fh:
            csv.writer(fh).writerows(rows)
        print("wrote %s" % args.out)
    else:
        for row in rows:
            print(",".join(row))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tallmh",
        description="Subsampling MCMC for tall data: datasets, sampler runs "
                    "and diagnostics.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a synthetic dataset store")
    p.add_argument("--kind", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--param", action="append", default=[],
                   help="extra generator parameter as key=value (repeatable)")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("ingest", help="ingest a CSV file into a dataset store")
    p.add_argument("--csv", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--features", help="comma-separated column names or indices")
    p.add_argument("--label", help="binary label column (mapped to -1/+1)")
    p.add_argument("--response", help="real response column")
    p.add_argument("--standardize", action="store_true")
    p.add_argument("--add-intercept", action="store_true")
    p.add_argument("--no-header", action="store_true")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("run", help="run a sampler from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--dataset", help="override config dataset path")
    p.add_argument("--out", help="override config output directory")
    p.add_argument("--seed", type=int, help="override config seed")
    p.add_argument("--n-iter", type=int, help="override config n_iter")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("diagnose", help="report on one or more saved traces")
    p.add_argument("--trace", action="append", required=True,
                   help="trace directory (repeat for multiple chains)")
    p.add_argument("--reference", help="reference trace for comparisons")
    p.add_argument("--out", required=True)
    p.add_argument("--max-lag", type=int)
    p.set_defaults(func=cmd_diagnose)

    p = sub.add_parser("saturation",
                       help="per-iteration cost of the adaptive sampler "
                            "across dataset sizes")
    p.add_argument("--kind", required=True)
    p.add_argument("--n", type=int, action="append", required=True,
                   help="dataset size (repeatable)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-iter", type=int, default=500)
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_saturation)

    p = sub.add_parser("compare", help="posterior gap metrics for two traces")
    p.add_argument("--trace-a", required=True)
    p.add_argument("--trace-b", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_compare)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2
    except (DataError, ModelError, ProxyError, FireflyBoundError, ValueError,
            OSError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
