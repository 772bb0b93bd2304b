"""Shared fixtures: small synthetic datasets and their models."""

import numpy as np
import pytest

from tallmh import (GammaModel, GaussianModel, LogisticModel,
                    default_cauchy_prior, generate)


@pytest.fixture(scope="session")
def gauss_ds():
    return generate("gaussian_1d", 400, seed=101)


@pytest.fixture(scope="session")
def lognorm_ds():
    return generate("lognormal_1d", 400, seed=102)


@pytest.fixture(scope="session")
def logit_ds():
    return generate("logistic_two_gaussians", 300, seed=103, d=2)


@pytest.fixture(scope="session")
def gamma_ds():
    return generate("gamma_from_covariates", 300, seed=104, d=3, kappa=2.0)


@pytest.fixture
def gauss_model():
    return GaussianModel()


@pytest.fixture
def logit_model(logit_ds):
    return LogisticModel(default_cauchy_prior(logit_ds))


@pytest.fixture
def gamma_model():
    return GammaModel(kappa=2.0)


@pytest.fixture
def rng():
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(999)))


@pytest.fixture
def model_dataset_pairs(gauss_ds, logit_ds, gamma_ds):
    """The three families on their matching fixtures."""
    return [
        (GaussianModel(), gauss_ds),
        (LogisticModel(), logit_ds),
        (GammaModel(kappa=2.0), gamma_ds),
    ]
