import os
import sys

import numpy as np
import pytest

from hexlens.mesh import build_topology, make_grid

TESTS_DIR = os.path.dirname(os.path.abspath(__file__))
DATA_DIR = os.path.join(TESTS_DIR, "data")
GOLDEN_DIR = os.path.join(TESTS_DIR, "golden")

sys.path.insert(0, TESTS_DIR)


@pytest.fixture
def cube():
    verts = np.array([
        [0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0],
        [0, 0, 1], [1, 0, 1], [1, 1, 1], [0, 1, 1],
    ], dtype=np.float64)
    cells = np.array([[0, 1, 2, 3, 4, 5, 6, 7]])
    return build_topology(verts, cells)


@pytest.fixture
def grid222():
    return make_grid(2, 2, 2)


def grid_counts(n1, n2, n3):
    """Closed-form element counts of an n1 x n2 x n3 cell grid."""
    v = (n1 + 1) * (n2 + 1) * (n3 + 1)
    e = (n1 * (n2 + 1) * (n3 + 1) + (n1 + 1) * n2 * (n3 + 1)
         + (n1 + 1) * (n2 + 1) * n3)
    f = ((n1 + 1) * n2 * n3 + n1 * (n2 + 1) * n3 + n1 * n2 * (n3 + 1))
    c = n1 * n2 * n3
    return v, e, f, c
