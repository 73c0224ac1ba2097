"""Shared random generators for the test suite."""

import numpy as np

from dcgames.cones import DCCone


def random_cone(rng, d=None, max_cells=3, max_normals=3, sparse=True):
    d = d or int(rng.integers(2, 5))
    cells = []
    for _ in range(int(rng.integers(1, max_cells + 1))):
        normals = []
        for _ in range(int(rng.integers(1, max_normals + 1))):
            p = rng.dirichlet(np.ones(d))
            if sparse and rng.random() < 0.3:
                p = np.eye(d)[int(rng.integers(d))]
            normals.append(p)
        cells.append(normals)
    return DCCone(d, cells)
