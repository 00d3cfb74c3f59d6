import math
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from lpmhd import (
    IterationConfig,
    build_filter_bank,
    make_grid,
    run_iteration,
    taylor_green_data,
)


@pytest.fixture(scope="session")
def grid():
    return make_grid(2, 64, 2.0 * math.pi)


@pytest.fixture(scope="session")
def bank(grid):
    return build_filter_bank(grid)


@pytest.fixture(scope="session")
def acceptance_run():
    """Full-depth cellular-data run shared by the slow acceptance checks.

    tolerance = 0 disables early convergence exit, so all twelve iterates
    are produced and monitored.
    """
    config = IterationConfig(max_iterations=12, tolerance=0.0)
    data = taylor_green_data(config.grid())
    return data, config, run_iteration(data, config)
