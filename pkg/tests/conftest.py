import random

import pytest
from hypothesis import settings

from feh.gen import TermGen

settings.register_profile("default", max_examples=100, deadline=None)
settings.load_profile("default")


def term_from_seed(seed: int, depth: int = 4, scope=("a", "b")):
    """A random term whose free variables come from ``scope``."""
    return TermGen(random.Random(seed)).comp(list(scope), depth)


@pytest.fixture
def corpus_dir():
    from feh.library import corpus_dir

    return corpus_dir()
