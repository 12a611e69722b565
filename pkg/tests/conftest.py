"""Session fixtures over the shared synthetic data factories."""

import pytest

from synthdata import make_blobs, make_planted_corpus, make_random_corpus, make_theme_corpus


@pytest.fixture(scope="session")
def blobs_8():
    return make_blobs(n_blobs=8, per_blob=25, sigma=0.1, dim=5, seed=0)


@pytest.fixture(scope="session")
def planted_corpus():
    return make_planted_corpus(seed=11)


@pytest.fixture(scope="session")
def theme_corpus():
    return make_theme_corpus(seed=5)


@pytest.fixture(scope="session")
def random_corpus():
    return make_random_corpus(seed=3)
