import numpy as np
import pytest
from hypothesis import strategies as st

from equispec.graphs import BlockStructure


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def cp_structure():
    return BlockStructure((500, 2000), ((10, 4), (1, 0)))


@st.composite
def equitable_structures(draw, max_blocks=3, max_unit=6):
    """Random feasible equitable structures.

    Sizes are ``n * w_a`` with ``n`` even, off-diagonal degrees
    ``c_ab = t_ab * w_b`` so that ``N_a c_ab = N_b c_ba`` holds by
    construction.
    """
    m = draw(st.integers(1, max_blocks))
    n = 2 * draw(st.integers(2, max_unit))
    w = [draw(st.integers(1, 2)) for _ in range(m)]
    sizes = [n * wa for wa in w]
    c = [[0] * m for _ in range(m)]
    for a in range(m):
        c[a][a] = draw(st.integers(0, min(3, sizes[a] - 1)))
        for b in range(a + 1, m):
            t = draw(st.integers(0, 2))
            c[a][b] = t * w[b]
            c[b][a] = t * w[a]
    return BlockStructure(sizes, c)
