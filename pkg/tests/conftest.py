import numpy as np
import pytest

from omwu.game import MatrixGame


@pytest.fixture(scope="session")
def anchored_game():
    """2x2 game with the mixed equilibrium x*=(1/2,1/2), y*=(1/4,3/4), v=3/2."""
    return MatrixGame([[3.0, 1.0], [0.0, 2.0]])


@pytest.fixture(scope="session")
def matching_pennies():
    return MatrixGame([[1.0, -1.0], [-1.0, 1.0]])


@pytest.fixture(scope="session")
def dominated_row_game():
    """3x2 game whose third row pays strictly below the value."""
    return MatrixGame([[3.0, 1.0], [0.0, 2.0], [1.0, 1.0]])


def random_dirichlet(rng: np.random.Generator, n: int) -> np.ndarray:
    p = rng.dirichlet(np.ones(n))
    # dirichlet occasionally returns exact zeros at float precision
    p = np.clip(p, 1e-12, None)
    return p / p.sum()
