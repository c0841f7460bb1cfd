import numpy as np
import pytest

from src.config import PipelineConfig
from src.models import SceneSpec
from src.services import generate_pair, initialize_weights


SMALL_NETWORK = {
    "egnn_hidden": 16,
    "egnn_layers": 2,
    "enriched_dim": 32,
    "embedding_dim": 16,
    "tnn_slices": 4,
}


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def small_config():
    """Pipeline config with a narrow network"""
    return PipelineConfig(**SMALL_NETWORK)


@pytest.fixture
def small_weights():
    return initialize_weights(seed=0, hidden_dim=16, layers=2, enriched_dim=32, embedding_dim=16, slices=4)


@pytest.fixture(scope="session")
def synthetic_pair():
    return generate_pair(SceneSpec(seed=11))
