import numpy as np
import pytest

from voebench.core import EventCategory
from voebench.dataset import generate_dataset, load_manifest
from voebench.scenarios import sample_trial, subtype_allocation


@pytest.fixture(scope="session")
def desk_dataset(tmp_path_factory):
    """Small generated dataset shared across tests (20 trials per category)."""
    root = tmp_path_factory.mktemp("dataset")
    counts = {cat: 20 for cat in EventCategory}
    generate_dataset(root, counts, seed=7)
    return load_manifest(root)


@pytest.fixture(scope="session")
def sample_trials():
    """A handful of built trial pairs covering every sub-type."""
    trials = {}
    for cat in EventCategory:
        alloc = subtype_allocation(cat, 6)
        trials[cat] = [sample_trial(13, cat, st, i) for i, st in enumerate(alloc)]
    return trials


@pytest.fixture()
def rng():
    return np.random.default_rng(0)
