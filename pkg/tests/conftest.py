import numpy as np
import pytest

from heisenberg_hodge import oscillator as osc


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def model_n1():
    return osc.build_model(osc.ModelConfig(n=1))


@pytest.fixture(scope="session")
def model_n2():
    return osc.build_model(osc.ModelConfig(n=2))


def single_slice(n, lam, M=8):
    """Model on one lambda; its quadrature weight is 1 so norms are plain l2."""
    return osc.build_model(osc.ModelConfig(n=n, lambdas=(lam,), M=M))
