"""Shared fixtures. The Boston CSV ships in tests/fixtures; the small
fitted model is reused by the inference, sparsification and IO tests."""

import os
import pathlib

import numpy as np
import pytest

FIXTURES = pathlib.Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def boston_path():
    return str(FIXTURES / "boston.csv")


@pytest.fixture(scope="session")
def boston(boston_path):
    from horserule.data import load_csv

    return load_csv(boston_path, target="medv")


@pytest.fixture(scope="session")
def boston_model(boston):
    """Small but real end-to-end fit shared across read-only tests."""
    from horserule.estimator import FitConfig, fit_dataset
    from horserule.trees import TreeGenConfig

    cfg = FitConfig(trees=TreeGenConfig(ntree=100), niter=300, burnin=50, seed=1)
    return fit_dataset(boston, cfg)


@pytest.fixture()
def rng():
    return np.random.Generator(np.random.PCG64(12345))
