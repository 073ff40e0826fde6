"""
Shared fixtures.
"""
import numpy as np
import pytest

from eicsr.core.dataset import Dataset


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)


@pytest.fixture
def probe() -> Dataset:
    """256 rows, two inputs ~ Uniform(1, 5), zero target."""
    return Dataset.uniform(2, 256, 1.0, 5.0, np.random.default_rng(0))


@pytest.fixture
def probe_1d() -> Dataset:
    """256 rows of x1 ~ Uniform(1, 2)."""
    return Dataset.uniform(1, 256, 1.0, 2.0, np.random.default_rng(1))


@pytest.fixture
def linear_data() -> Dataset:
    """y = 2*x1 + 3*x2 + 1 on 200 rows."""
    X = np.random.default_rng(7).uniform(1.0, 5.0, size=(200, 2))
    y = 2.0 * X[:, 0] + 3.0 * X[:, 1] + 1.0
    return Dataset.from_arrays(X, y)


@pytest.fixture
def product_data() -> Dataset:
    """y = x1 * x2 on 120 rows; small enough for quick searches."""
    X = np.random.default_rng(3).uniform(1.0, 5.0, size=(120, 2))
    return Dataset.from_arrays(X, X[:, 0] * X[:, 1])


_TOY_TARGETS = {
    "product": lambda x1, x2: x1 * x2,
    "ratio": lambda x1, x2: x1 / x2,
    "harmonic": lambda x1, x2: x1 * x2 / (x1 + x2),
    "square_plus": lambda x1, x2: x1 * x1 + x2,
    "root_product": lambda x1, x2: np.sqrt(x1 * x2),
}


@pytest.fixture
def noisy_toy():
    """
    Factory for two-input toy problems with Gaussian target noise.

    noisy_toy(name, seed) draws 120 rows of x ~ Uniform(1, 5) and adds noise
    with std 0.1 * Std[y].
    """

    def build(name: str, seed: int) -> Dataset:
        rng = np.random.default_rng(np.random.SeedSequence(1000, spawn_key=(seed,)))
        X = rng.uniform(1.0, 5.0, size=(120, 2))
        y = _TOY_TARGETS[name](X[:, 0], X[:, 1])
        y = y + rng.normal(0.0, 0.1 * float(np.std(y)), size=y.shape)
        return Dataset.from_arrays(X, y)

    build.names = tuple(_TOY_TARGETS)
    return build
