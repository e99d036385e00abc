"""Command line interface.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical error.
HORSERULE_THREADS (default 1) caps the BLAS thread pools; it must be set
before numpy loads, which is why this module configures the environment
first.
"""

import os
import sys

_threads_raw = os.environ.get("HORSERULE_THREADS")
_threads_bad = None
_threads = 1
if _threads_raw is not None:
    try:
        _threads = int(_threads_raw)
        if _threads < 1:
            raise ValueError
    except ValueError:
        _threads_bad = _threads_raw
        _threads = 1
for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
    os.environ.setdefault(_var, str(_threads))

import argparse
import csv

import numpy as np

from . import _split
from .data import encode_with_schema, load_csv
from .dss import dss_summarize, lambda_path
from .errors import DataError, NumericError
from .estimator import FitConfig, fit_dataset
from .evaluate import run_cv, run_simulation
from .inference import predict, rule_importance, ruleheat_export, variable_importance
from .model_io import load_model, save_model
from .sampler import PriorSpec
from .trees import TreeGenConfig


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(1)


def _add_fit_flags(p):
    g = p.add_argument_group("ensemble")
    g.add_argument("--ntree", type=int, default=1000, help="number of trees (default 1000)")
    g.add_argument("--L", type=float, default=5.0, dest="L",
                   help="mean leaves per tree (default 5)")
    g.add_argument("--nmin", type=int, default=None,
                   help="min rows per leaf (default: ceil(n^(1/3)))")
    g.add_argument("--mix", type=float, default=0.3,
                   help="fraction of bootstrap-forest trees (default 0.3)")
    g.add_argument("--rf-mtry", type=int, default=None,
                   help="columns sampled per node in forest trees (default p/3)")
    g.add_argument("--gbm-shrinkage", type=float, default=0.1)
    g.add_argument("--gbm-subsample", type=float, default=0.5)
    g = p.add_argument_group("prior")
    g.add_argument("--mu", type=float, default=1.0, help="support exponent (default 1)")
    g.add_argument("--eta", type=float, default=2.0, help="length exponent (default 2)")
    g.add_argument("--linear-a", type=float, default=1.0,
                   help="prior scale for linear terms (default 1)")
    g.add_argument("--unshrunk-linear", action="store_true",
                   help="exclude linear terms from the horseshoe")
    g.add_argument("--no-linear", action="store_true", help="drop linear terms entirely")
    g = p.add_argument_group("sampler")
    g.add_argument("--niter", type=int, default=1000)
    g.add_argument("--burnin", type=int, default=100)
    g.add_argument("--thin", type=int, default=1)
    p.add_argument("--ytransform", choices=["none", "log"], default="none")
    p.add_argument("--seed", type=int, default=0)


def _config_from_args(args) -> FitConfig:
    return FitConfig(
        trees=TreeGenConfig(
            ntree=args.ntree, L=args.L, n_min=args.nmin, mix=args.mix,
            rf_mtry=args.rf_mtry, gbm_shrinkage=args.gbm_shrinkage,
            gbm_subsample=args.gbm_subsample,
        ),
        prior=PriorSpec(
            mu=args.mu, eta=args.eta, linear_A=args.linear_a,
            unshrunk_linear=args.unshrunk_linear,
        ),
        niter=args.niter, burnin=args.burnin, thin=args.thin,
        y_transform=args.ytransform,
        linear_terms=not args.no_linear,
        seed=args.seed,
    )


def _schema_overrides(args):
    over = {}
    for name in args.categorical or []:
        over[name] = "categorical"
    for name in args.numeric or []:
        over[name] = "numeric"
    return over or None


def _write_csv(path, header, rows):
    if path is None:
        w = csv.writer(sys.stdout)
        w.writerow(header)
        w.writerows(rows)
    else:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            w.writerows(rows)


def _say(msg):
    print(msg, file=sys.stderr, flush=True)


def cmd_fit(args):
    ds = load_csv(args.data, target=args.target, schema_overrides=_schema_overrides(args))
    cfg = _config_from_args(args)
    _say(f"loaded {ds.X.shape[0]} rows, {ds.X.shape[1]} encoded covariates "
         f"(split backend: {_split.active_backend()})")
    progress = None if args.quiet else (
        lambda it, total: _say(f"  gibbs {it}/{total}"))
    model = fit_dataset(ds, cfg, progress=progress)
    save_model(model, args.out)
    c = model.config
    _say(f"rules: {c['n_rules_raw']} extracted, {c['n_rules']} after deduplication")
    _say(f"retained draws: {model.n_draws}, train RMSE: {model.train_rmse:.4f}")
    _say(f"model written to {args.out}")
    return 0


def cmd_predict(args):
    model = load_model(args.model)
    X, _ = encode_with_schema(args.data, model.schema)
    if args.interval is not None:
        mean, lo, hi = predict(model, X, interval=args.interval)
        _write_csv(args.out, ["prediction", "lower", "upper"],
                   [[repr(float(m)), repr(float(a)), repr(float(b))]
                    for m, a, b in zip(mean, lo, hi)])
    else:
        mean = predict(model, X)
        _write_csv(args.out, ["prediction"], [[repr(float(m))] for m in mean])
    return 0


def cmd_importance(args):
    model = load_model(args.model)
    if args.variables:
        names, J = variable_importance(model)
        mean = J.mean(axis=0)
        q05 = np.quantile(J, 0.05, axis=0)
        q95 = np.quantile(J, 0.95, axis=0)
        order = np.argsort(-mean)
        if args.top:
            order = order[: args.top]
        rows = [[names[i], f"{mean[i]:.6g}", f"{q05[i]:.6g}", f"{q95[i]:.6g}"] for i in order]
        _write_csv(args.out, ["variable", "importance", "q05", "q95"], rows)
    else:
        rows = rule_importance(model)
        if args.top:
            rows = rows[: args.top]
        out = [
            [
                r["kind"], r["name"],
                "" if r["support"] is None else f"{r['support']:.6g}",
                "" if r["length"] is None else r["length"],
                f"{r['importance']:.6g}", f"{r['importance_q05']:.6g}",
                f"{r['importance_q95']:.6g}", f"{r['beta_mean']:.6g}",
            ]
            for r in rows
        ]
        _write_csv(
            args.out,
            ["kind", "term", "support", "length", "importance", "q05", "q95", "beta_mean"],
            out,
        )
    return 0


def cmd_ruleheat(args):
    model = load_model(args.model)
    X, y = encode_with_schema(args.data, model.schema)
    if y is None:
        raise DataError(
            f"ruleheat needs the outcome column {model.schema.get('target')!r} in --data"
        )
    table = ruleheat_export(model, X, y, args.top)
    header = table.rule_ids + ["outcome"]
    sign_row = [str(s) for s in table.signs] + [""]
    text_row = table.texts + [model.schema.get("target") or "outcome"]
    rows = [text_row, sign_row]
    for i in range(len(y)):
        rows.append([str(int(v)) for v in table.activations[i]] + [repr(float(y[i]))])
    _write_csv(args.out, header, rows)
    return 0


def cmd_dss(args):
    from .inference import design_from_model

    model = load_model(args.model)
    X, _ = encode_with_schema(args.data, model.schema)
    Z = design_from_model(model, X)
    if args.lambda_dss is not None:
        summ = dss_summarize(model, Z, args.lambda_dss)
        _say(f"lambda={summ.lambda_dss:.6g}: {len(summ.nonzero)} nonzero terms, "
             f"fit gap {summ.fit_gap:.3e} ({summ.sweeps} sweeps)")
        rows = [
            [summ.names[j], f"{summ.gamma[j]:.6g}", f"{summ.gamma_original[j]:.6g}"]
            for j in summ.nonzero
        ]
        _write_csv(args.out, ["term", "gamma_std", "gamma_original"], rows)
    else:
        beta_bar = model.draws.beta.mean(axis=0)
        lams = lambda_path(Z, beta_bar, n_points=args.points)
        rows = []
        warm = None
        for lam in lams:
            summ = dss_summarize(model, Z, float(lam), gamma0=warm)
            warm = summ.gamma
            rows.append([f"{lam:.6g}", len(summ.nonzero), f"{summ.fit_gap:.6g}", summ.sweeps])
        _write_csv(args.out, ["lambda", "nonzero", "fit_gap", "sweeps"], rows)
    return 0


def _parse_grid(spec: str) -> dict:
    out = {}
    for part in spec.split(","):
        part = part.strip()
        if not part:
            continue
        if "=" not in part:
            raise DataError(f"bad grid entry {part!r}: expected key=value")
        key, val = part.split("=", 1)
        out[key.strip()] = val.strip()
    if not out:
        raise DataError(f"empty grid specification {spec!r}")
    return out


_GRID_KEYS = {
    "ntree": ("trees", "ntree", int),
    "L": ("trees", "L", float),
    "nmin": ("trees", "n_min", int),
    "mix": ("trees", "mix", float),
    "rf_mtry": ("trees", "rf_mtry", int),
    "gbm_shrinkage": ("trees", "gbm_shrinkage", float),
    "gbm_subsample": ("trees", "gbm_subsample", float),
    "mu": ("prior", "mu", float),
    "eta": ("prior", "eta", float),
    "linear_a": ("prior", "linear_A", float),
    "niter": (None, "niter", int),
    "burnin": (None, "burnin", int),
    "thin": (None, "thin", int),
    "ytransform": (None, "y_transform", str),
}


def _apply_grid(base: FitConfig, grid: dict) -> FitConfig:
    import copy

    cfg = copy.deepcopy(base)
    for key, raw in grid.items():
        spec = _GRID_KEYS.get(key)
        if spec is None:
            raise DataError(f"unknown grid key {key!r} (have {sorted(_GRID_KEYS)})")
        section, attr, typ = spec
        val = typ(raw)
        if section is None:
            setattr(cfg, attr, val)
        else:
            setattr(getattr(cfg, section), attr, val)
    return cfg


def cmd_cv(args):
    ds = load_csv(args.data, target=args.target, schema_overrides=_schema_overrides(args))
    base = _config_from_args(args)
    if args.grid:
        configs = {g: _apply_grid(base, _parse_grid(g)) for g in args.grid}
    else:
        configs = {"fit": base}
    progress = None if args.quiet else (
        lambda r, f, rmses: _say(
            "repeat %d fold %d: %s" % (r, f, ", ".join(f"{k}={v:.3f}" for k, v in rmses.items()))
        ))
    rows, aggregates = run_cv(
        ds.X, ds.y, args.k, configs, args.seed, repeats=args.repeats,
        feature_names=ds.column_names,
        feature_sources=[c.source for c in ds.columns],
        include_ols=not args.no_ols, progress=progress,
    )
    out = [[r["method"], r["repeat"], r["fold"], f"{r['rmse']:.6g}", f"{r['rrmse']:.6g}"]
           for r in rows]
    for a in aggregates:
        out.append([a["method"], "", "mean", f"{a['mean_rmse']:.6g}", f"{a['mean_rrmse']:.6g}"])
    _write_csv(args.out, ["method", "repeat", "fold", "rmse", "rrmse"], out)
    return 0


def cmd_simulate(args):
    cfg = _config_from_args(args)
    progress = None if args.quiet else (
        lambda rep: _say(
            f"rep {rep.rep}: rmse_truth={rep.rmse_truth:.3f} "
            f"d_true={rep.delta_beta_true:.3f} d_noise={rep.delta_beta_noise:.3f}"
        ))
    reps = run_simulation(args.n, args.p, args.reps, cfg, seed=args.seed,
                          n_test=args.n_test, progress=progress)
    rows = [
        [r.rep, f"{r.rmse_truth:.6g}", f"{r.rmse_test:.6g}",
         f"{r.delta_beta_true:.6g}", f"{r.delta_beta_noise:.6g}", r.n_rules]
        for r in reps
    ]
    rows.append([
        "mean",
        f"{np.mean([r.rmse_truth for r in reps]):.6g}",
        f"{np.mean([r.rmse_test for r in reps]):.6g}",
        f"{np.mean([r.delta_beta_true for r in reps]):.6g}",
        f"{np.mean([r.delta_beta_noise for r in reps]):.6g}",
        "",
    ])
    _write_csv(args.out, ["rep", "rmse_truth", "rmse_test", "delta_beta_true",
                          "delta_beta_noise", "n_rules"], rows)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="horserule",
                     description="Rule ensembles with horseshoe shrinkage")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit a model from a CSV file")
    p.add_argument("--data", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--out", required=True, help="model file to write")
    p.add_argument("--categorical", action="append", metavar="COL",
                   help="force a column to be treated as categorical")
    p.add_argument("--numeric", action="append", metavar="COL",
                   help="force a column to be treated as numeric")
    p.add_argument("--quiet", action="store_true")
    _add_fit_flags(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("predict", help="predict with a saved model")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", default=None)
    p.add_argument("--interval", type=float, default=None,
                   help="credible level for interval columns, e.g. 0.9")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("importance", help="posterior importance summaries")
    p.add_argument("--model", required=True)
    p.add_argument("--top", type=int, default=None)
    p.add_argument("--variables", action="store_true",
                   help="aggregate to source variables")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_importance)

    p = sub.add_parser("ruleheat", help="rule activation table for heatmaps")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--top", type=int, required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_ruleheat)

    p = sub.add_parser("dss", help="sparsify the posterior mean fit")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True, help="training CSV (rebuilds the design)")
    p.add_argument("--lambda", dest="lambda_dss", type=float, default=None)
    p.add_argument("--points", type=int, default=50, help="path length without --lambda")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_dss)

    p = sub.add_parser("cv", help="k-fold cross-validation")
    p.add_argument("--data", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--repeats", type=int, default=1)
    p.add_argument("--grid", action="append", metavar="K=V[,K=V...]",
                   help="configuration override set; repeatable")
    p.add_argument("--no-ols", action="store_true", help="skip the least-squares baseline")
    p.add_argument("--categorical", action="append", metavar="COL")
    p.add_argument("--numeric", action="append", metavar="COL")
    p.add_argument("--quiet", action="store_true")
    p.add_argument("--out", default=None)
    _add_fit_flags(p)
    p.set_defaults(func=cmd_cv)

    p = sub.add_parser("simulate", help="synthetic sparse-linear benchmark")
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--p", type=int, default=100)
    p.add_argument("--reps", type=int, default=20)
    p.add_argument("--n-test", type=int, default=1000)
    p.add_argument("--quiet", action="store_true")
    p.add_argument("--out", default=None)
    _add_fit_flags(p)
    p.set_defaults(func=cmd_simulate)

    return parser


def main(argv=None) -> int:
    if _threads_bad is not None:
        print(f"error: HORSERULE_THREADS={_threads_bad!r} is not a positive integer",
              file=sys.stderr)
        return 2
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
