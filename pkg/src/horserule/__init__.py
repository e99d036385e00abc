"""Rule ensembles with rule-structured horseshoe shrinkage.

Decision rules are harvested from a mixed bootstrap-forest / boosted tree
ensemble, joined with linear terms in a standardized design, and fit by
Gibbs sampling under a horseshoe prior whose per-rule scales favor simple,
high-support rules. Attribute access is lazy so the CLI can configure BLAS
threading before numpy loads.
"""

import importlib

__version__ = "0.1.0"

_EXPORTS = {
    "load_csv": "horserule.data",
    "encode_with_schema": "horserule.data",
    "standardize": "horserule.data",
    "kfold": "horserule.data",
    "Dataset": "horserule.data",
    "TreeGenConfig": "horserule.trees",
    "PriorSpec": "horserule.sampler",
    "gibbs_run": "horserule.sampler",
    "rule_prior_scale": "horserule.sampler",
    "Rule": "horserule.rules",
    "Condition": "horserule.rules",
    "extract_rules": "horserule.rules",
    "dedup_rules": "horserule.rules",
    "build_design_matrix": "horserule.rules",
    "FitConfig": "horserule.estimator",
    "fit_model": "horserule.estimator",
    "fit_dataset": "horserule.estimator",
    "FittedModel": "horserule.inference",
    "predict": "horserule.inference",
    "rule_importance": "horserule.inference",
    "variable_importance": "horserule.inference",
    "ruleheat_export": "horserule.inference",
    "dss_summarize": "horserule.dss",
    "lambda_path": "horserule.dss",
    "save_model": "horserule.model_io",
    "load_model": "horserule.model_io",
    "run_cv": "horserule.evaluate",
    "run_simulation": "horserule.evaluate",
    "HorseRuleError": "horserule.errors",
    "DataError": "horserule.errors",
    "NumericError": "horserule.errors",
    "ConvergenceError": "horserule.errors",
}

__all__ = sorted(_EXPORTS) + ["__version__"]


def __getattr__(name):
    module = _EXPORTS.get(name)
    if module is None:
        raise AttributeError(f"module 'horserule' has no attribute {name!r}")
    value = getattr(importlib.import_module(module), name)
    globals()[name] = value
    return value


def __dir__():
    return __all__
