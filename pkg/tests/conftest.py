import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

WORKED = "0001001001001101"


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


@pytest.fixture(scope="session")
def bernoulli07():
    """Seeded iid Bernoulli(0.7) stream of 2e5 bits."""
    return (np.random.default_rng(70).random(200_000) < 0.7).astype(np.uint8)


@pytest.fixture(scope="session")
def uniform_1e6():
    return np.random.default_rng(1_000_000).integers(0, 2, 10**6, dtype=np.uint8)
