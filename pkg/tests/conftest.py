import numpy as np
import pytest

from tokenprune import TokenGrid


@pytest.fixture
def grid_2x2():
    return TokenGrid(2, 2, 2)


@pytest.fixture
def grid_3x3():
    return TokenGrid(3, 3, 3)


def random_scores(rng: np.random.Generator, grid: TokenGrid) -> np.ndarray:
    return rng.uniform(0.0, 1.0, size=grid.total())
