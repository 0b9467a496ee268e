from __future__ import annotations

import functools

import numpy as np
import pytest

from simplex_steiner.solver import optimal_steiner_tree, regular_simplex


@functools.lru_cache(maxsize=None)
def simplex_optimum(d: int):
    """Exact search on the regular d-simplex, shared across test modules."""
    return optimal_steiner_tree(regular_simplex(d))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
