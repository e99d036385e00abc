"""Fitted-model container, prediction, and posterior importance summaries."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .data import ScalingInfo
from .errors import DataError
from .rules import ColumnMeta, Rule, evaluate_rule
from .sampler import PosteriorDraws

__all__ = [
    "FittedModel",
    "design_from_model",
    "predict",
    "importance_draws",
    "rule_importance",
    "variable_importance",
    "RuleHeatTable",
    "ruleheat_export",
]


@dataclass
class FittedModel:
    """Everything needed to predict and summarize: the deduplicated rules,
    per-column standardization stats, target scaling, the posterior draws,
    and the resolved configuration snapshot."""

    config: dict
    schema: dict  # dataset schema for re-encoding CSV input
    feature_names: list[str]  # encoded covariate names
    feature_sources: list[str]  # source variable per encoded covariate
    columns: list[ColumnMeta]
    rules: list[Rule]
    scaling: ScalingInfo
    draws: PosteriorDraws
    train_rmse: float | None = None
    extras: dict = field(default_factory=dict)

    @property
    def n_linear(self) -> int:
        return sum(1 for c in self.columns if c.kind == "linear")

    @property
    def n_draws(self) -> int:
        return self.draws.beta.shape[0]


def design_from_model(model: FittedModel, X) -> np.ndarray:
    """Standardized design for new rows using the stats stored at fit time.

    On the training matrix this reproduces the training design exactly.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != len(model.feature_names):
        raise DataError(
            f"expected {len(model.feature_names)} covariate columns, got shape {X.shape}"
        )
    if not np.all(np.isfinite(X)):
        raise DataError("covariates contain non-finite values")
    cols = []
    for meta in model.columns:
        if meta.kind == "linear":
            raw = X[:, meta.source_col]
        else:
            raw = evaluate_rule(model.rules[meta.rule_index], X)
        cols.append((raw - meta.mean) / meta.sd)
    return np.column_stack(cols)


def _inverse_transform(vals, scaling: ScalingInfo):
    out = scaling.y_mean + scaling.y_sd * vals
    if scaling.y_transform == "log":
        out = np.exp(out)
    return out


def predict(model: FittedModel, X, interval: float | None = None):
    """Posterior mean of the regression function at X.

    With ``interval`` in (0, 1), also returns equal-tailed credible bounds
    for the regression function at that coverage: (mean, lower, upper).
    """
    Z = design_from_model(model, X)
    beta = model.draws.beta
    if interval is None and model.scaling.y_transform == "none":
        # posterior mean commutes with the affine back-transform
        point = _inverse_transform(Z @ beta.mean(axis=0), model.scaling)
        return point
    per_draw = _inverse_transform(Z @ beta.T, model.scaling)  # (n, D)
    point = per_draw.mean(axis=1)
    if interval is None:
        return point
    if not 0.0 < interval < 1.0:
        raise DataError("interval must lie in (0, 1)")
    a = 0.5 * (1.0 - interval)
    lower = np.quantile(per_draw, a, axis=1)
    upper = np.quantile(per_draw, 1.0 - a, axis=1)
    return point, lower, upper


def importance_draws(model: FittedModel) -> np.ndarray:
    """Per-draw column importance: |coefficient| x column sd, normalized.

    Design columns are unit-sd, so this is |beta| on the standardized
    scale, divided by the largest value in the draw; every draw's most
    important column scores exactly 1.
    """
    imp = np.abs(model.draws.beta)
    mx = imp.max(axis=1, keepdims=True)
    np.divide(imp, mx, out=imp, where=mx > 0)
    return imp


def beta_mean_original(model: FittedModel) -> np.ndarray:
    """Posterior-mean coefficients rescaled to the raw column units
    (on the transformed-target scale when a y transform is in use)."""
    beta_std = model.draws.beta.mean(axis=0)
    sds = np.array([c.sd for c in model.columns])
    return beta_std * (model.scaling.y_sd / sds)


def rule_importance(model: FittedModel):
    """Per-column summary rows sorted by posterior mean importance.

    Each row: name, kind, support, length, posterior mean and 5%/95%
    quantiles of normalized importance, and the posterior-mean coefficient
    in original column units.
    """
    imp = importance_draws(model)
    mean = imp.mean(axis=0)
    q05 = np.quantile(imp, 0.05, axis=0)
    q95 = np.quantile(imp, 0.95, axis=0)
    borig = beta_mean_original(model)
    rows = []
    for j, meta in enumerate(model.columns):
        rows.append(
            {
                "name": meta.name,
                "kind": meta.kind,
                "support": meta.support,
                "length": meta.length,
                "importance": float(mean[j]),
                "importance_q05": float(q05[j]),
                "importance_q95": float(q95[j]),
                "beta_mean": float(borig[j]),
            }
        )
    rows.sort(key=lambda r: -r["importance"])
    return rows


def variable_importance(model: FittedModel):
    """Per-draw importance of each source variable.

    A variable collects the importance of its own linear columns plus, for
    every rule constraining it, the rule's importance split evenly over the
    distinct variables in the rule. Draws are re-normalized to max 1.
    Returns (names, draws) with draws of shape (D, n_variables).
    """
    var_names = [v["name"] for v in model.schema["variables"]]
    var_index = {v: i for i, v in enumerate(var_names)}
    P = len(model.columns)
    V = np.zeros((P, len(var_names)))
    for j, meta in enumerate(model.columns):
        if meta.kind == "linear":
            V[j, var_index[model.feature_sources[meta.source_col]]] = 1.0
        else:
            rule = model.rules[meta.rule_index]
            srcs = {model.feature_sources[c.col] for c in rule.conditions}
            share = 1.0 / len(srcs)
            for s in srcs:
                V[j, var_index[s]] += share
    J = importance_draws(model) @ V
    mx = J.max(axis=1, keepdims=True)
    np.divide(J, mx, out=J, where=mx > 0)
    return var_names, J


@dataclass
class RuleHeatTable:
    rule_ids: list[str]
    texts: list[str]
    signs: list[int]  # sign of the posterior-mean coefficient
    activations: np.ndarray  # (n, k) 0/1
    outcome: np.ndarray  # (n,)


def ruleheat_export(model: FittedModel, X, y, top_k: int) -> RuleHeatTable:
    """Activation table of the top_k most important rules on the given
    rows, for heatmap-style display: rules ordered by posterior mean
    importance, each with the sign of its mean coefficient, plus the
    outcome column."""
    rule_cols = [j for j, c in enumerate(model.columns) if c.kind == "rule"]
    if not 1 <= top_k <= len(rule_cols):
        raise DataError(f"top_k must be in [1, {len(rule_cols)}]")
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if y.shape != (X.shape[0],):
        raise DataError("y length does not match X rows")

    imp_mean = importance_draws(model).mean(axis=0)
    borig = beta_mean_original(model)
    order = sorted(rule_cols, key=lambda j: (-imp_mean[j], j))[:top_k]
    acts = np.column_stack(
        [evaluate_rule(model.rules[model.columns[j].rule_index], X) for j in order]
    )
    return RuleHeatTable(
        rule_ids=[f"r{i + 1}" for i in range(top_k)],
        texts=[model.columns[j].name for j in order],
        signs=[1 if borig[j] >= 0 else -1 for j in order],
        activations=acts,
        outcome=y,
    )
