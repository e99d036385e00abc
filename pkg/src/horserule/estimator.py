"""End-to-end fitting: trees -> rules -> design -> Gibbs -> FittedModel."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .data import Dataset, standardize
from .errors import DataError
from .inference import FittedModel, predict
from .rules import build_design_matrix, dedup_rules, extract_rules
from .sampler import PriorSpec, assemble_prior, gibbs_run
from .trees import TreeGenConfig, default_n_min, generate_ensemble

__all__ = ["FitConfig", "fit_model", "fit_dataset"]


@dataclass
class FitConfig:
    trees: TreeGenConfig = field(default_factory=TreeGenConfig)
    prior: PriorSpec = field(default_factory=PriorSpec)
    niter: int = 1000
    burnin: int = 100
    thin: int = 1
    y_transform: str = "none"
    linear_terms: bool = True  # include standardized covariates as columns
    seed: int = 0

    def validate(self):
        self.trees.validate()
        self.prior.validate()
        if self.y_transform not in ("none", "log"):
            raise DataError(f"unknown y_transform {self.y_transform!r}")


def _component_seeds(seed: int):
    ss = np.random.SeedSequence(int(seed))
    s = ss.generate_state(3, np.uint64)
    return int(s[0]), int(s[1]), int(s[2])


def fit_model(
    X,
    y,
    config: FitConfig | None = None,
    feature_names=None,
    feature_sources=None,
    schema: dict | None = None,
    progress=None,
) -> FittedModel:
    """Fit the full model on an encoded covariate matrix.

    X is numeric (categoricals already one-hot encoded). feature_sources
    maps each encoded column to its source variable name (defaults to the
    column's own name); schema, when supplied, is stored for CSV
    re-encoding at prediction time.
    """
    config = config or FitConfig()
    config.validate()
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2:
        raise DataError("X must be 2-dimensional")
    n, p = X.shape
    if y.shape != (n,):
        raise DataError("y length does not match X rows")
    if not np.all(np.isfinite(X)):
        raise DataError("X contains non-finite values")
    if not np.all(np.isfinite(y)):
        raise DataError("y contains non-finite values")

    names = list(feature_names) if feature_names is not None else [f"x{j}" for j in range(p)]
    sources = list(feature_sources) if feature_sources is not None else list(names)
    if len(names) != p or len(sources) != p:
        raise DataError("feature name/source lists must match X columns")
    if schema is None:
        schema = {
            "target": "y",
            "variables": [{"name": s, "kind": "numeric", "levels": None} for s in
                          dict.fromkeys(sources)],
        }

    ensemble_seed, rules_seed, gibbs_seed = _component_seeds(config.seed)

    # Standardize the response (and find constant covariate columns). Trees
    # see the transformed, unstandardized target: split selection is
    # invariant to affine changes of y, and thresholds stay in raw x units.
    _, ys, scaling = standardize(X, y, config.y_transform)
    t = np.log(y) if config.y_transform == "log" else y

    ensemble = generate_ensemble(X, t, config.trees, ensemble_seed)

    rules_rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(rules_seed)))
    raw_rules = []
    for source, tree in ensemble:
        raw_rules.extend(extract_rules(tree, rules_rng, source=source))
    rules = dedup_rules(raw_rules, X)

    linear_cols = [int(j) for j in scaling.kept] if config.linear_terms else []
    design = build_design_matrix(rules, X, linear_cols, names)

    prior = assemble_prior(design, config.prior)
    draws = gibbs_run(
        design, ys, prior,
        niter=config.niter, burnin=config.burnin, thin=config.thin,
        seed=gibbs_seed, progress=progress,
    )

    resolved = {
        "trees": {
            "ntree": config.trees.ntree,
            "L": config.trees.L,
            "n_min": config.trees.n_min if config.trees.n_min is not None else default_n_min(n),
            "mix": config.trees.mix,
            "rf_mtry": config.trees.rf_mtry if config.trees.rf_mtry is not None else max(1, p // 3),
            "gbm_shrinkage": config.trees.gbm_shrinkage,
            "gbm_subsample": config.trees.gbm_subsample,
        },
        "prior": {
            "mu": config.prior.mu,
            "eta": config.prior.eta,
            "linear_A": config.prior.linear_A,
            "unshrunk_linear": config.prior.unshrunk_linear,
        },
        "sampler": {
            "niter": config.niter,
            "burnin": config.burnin,
            "thin": config.thin,
        },
        "y_transform": config.y_transform,
        "linear_terms": config.linear_terms,
        "seed": config.seed,
        "n_train": n,
        "n_rules_raw": len(raw_rules),
        "n_rules": len(rules),
    }

    model = FittedModel(
        config=resolved,
        schema=schema,
        feature_names=names,
        feature_sources=sources,
        columns=design.columns,
        rules=design.rules,
        scaling=scaling,
        draws=draws,
    )
    fitted = predict(model, X)
    model.train_rmse = float(np.sqrt(np.mean((y - fitted) ** 2)))
    return model


def fit_dataset(dataset: Dataset, config: FitConfig | None = None, progress=None) -> FittedModel:
    """Fit from a loaded Dataset (handles names, sources, and schema)."""
    if dataset.y is None:
        raise DataError("dataset has no target column")
    return fit_model(
        dataset.X,
        dataset.y,
        config=config,
        feature_names=dataset.column_names,
        feature_sources=[c.source for c in dataset.columns],
        schema=dataset.schema(),
        progress=progress,
    )
