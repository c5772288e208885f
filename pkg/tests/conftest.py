import numpy as np
import pytest

from vecdrive.config import ModelConfig, SceneGenConfig, TrainConfig
from vecdrive.scene import Dataset, generate_dataset

# Small-but-complete settings shared by the unit tests. Evaluation-related
# tests need 6-point trajectories; everything else is shrunk.
SMALL_MODEL = ModelConfig(map_instances=6, map_points=8, agent_queries=4,
                          agent_modes=3, traj_points=6, ego_modes=3,
                          ego_points=6, d_model=32, n_heads=2, n_layers=1)

SMALL_SCENE = SceneGenConfig(resolution=4.0, forward_range=40.0,
                             backward_range=8.0, lateral_range=20.0,
                             agent_count_min=1, agent_count_max=4)


@pytest.fixture(scope="session")
def small_dataset():
    cfg = SMALL_SCENE.validate()
    return Dataset(cfg, generate_dataset(500, 6, cfg))


@pytest.fixture()
def rng():
    return np.random.default_rng(0)


def small_train_config(**overrides):
    base = dict(learning_rate=2e-4, epochs=2, batch_size=3, seed=0,
                checkpoint_every=1)
    base.update(overrides)
    return TrainConfig(**base).validate()
