import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from fixtures import make_attrs_doc, make_detections_doc, make_fixture_room  # noqa: E402


@pytest.fixture
def room_image():
    return make_fixture_room()


@pytest.fixture
def detections_doc():
    return make_detections_doc()


@pytest.fixture
def attrs_doc():
    return make_attrs_doc()


@pytest.fixture(scope="session")
def tiny_model():
    """A quickly trained real model for pipeline tests (accuracy irrelevant)."""
    from icdh.features import split_shuffle, synth_generate
    from icdh.nn import TrainConfig, init_model, train

    dataset = synth_generate(120, seed=3, noise=0.05)
    train_set, val_set = split_shuffle(dataset, 0.8, seed=3)
    model, _ = train(init_model(0), train_set, val_set, TrainConfig(epochs=5, seed=0))
    return model
