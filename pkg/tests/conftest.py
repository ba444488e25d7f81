import numpy as np
import pytest

from pittrans.block_model import BlockModel, GridSpec

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def random_model(rng, nx=8, ny=8, nz=8, ug_prob=0.2, ore_prob=0.25):
    """Random block model: waste with scattered ore, sparse profitable stopes.

    Stopes always satisfy vu > cu.
    """
    grid = GridSpec(nx, ny, nz, 10.0, 10.0, 10.0)
    shape = grid.shape
    tonnes = np.full(shape, 1000.0)
    ore = rng.random(shape) < ore_prob
    ore_tonnes = np.where(ore, 1000.0, 0.0)
    vp = np.where(ore, rng.integers(500, 4000, shape), 0).astype(np.int64)
    cp = rng.integers(100, 600, shape).astype(np.int64)
    ug_mask = (rng.random(shape) < ug_prob) & (np.arange(nz)[:, None, None] >= 1)
    cu = rng.integers(100, 1500, shape).astype(np.int64)
    vu = cu + rng.integers(1, 2500, shape)
    present = np.ones(shape, bool)
    return BlockModel(grid, present, tonnes, ore_tonnes, vp, cp, ug_mask,
                      np.where(ug_mask, vu, 0), np.where(ug_mask, cu, 0))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
