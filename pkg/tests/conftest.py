import os

import numpy as np
import pytest
from hypothesis import settings

from advfv import baseline_params, build_structured_rect, from_triangulation

settings.register_profile("advfv", deadline=None)
settings.load_profile("advfv")


@pytest.fixture(scope="session")
def mesh_cache_dir(tmp_path_factory):
    # Keep generated disk meshes out of the user's real cache.
    path = tmp_path_factory.mktemp("advfv-meshes")
    old = os.environ.get("ADVFV_DATA_DIR")
    os.environ["ADVFV_DATA_DIR"] = str(path)
    yield path
    if old is None:
        os.environ.pop("ADVFV_DATA_DIR", None)
    else:
        os.environ["ADVFV_DATA_DIR"] = old


@pytest.fixture(scope="session")
def square16():
    return build_structured_rect(16, 16)


@pytest.fixture(scope="session")
def params():
    return baseline_params(0.15)


@pytest.fixture(scope="session")
def acute_pair():
    # Two acute triangles sharing the edge (0,0)-(1,0); both circumcenters
    # are interior, so the mesh is admissible.  Geometry frozen from
    # tests/oracles/pair_mesh_geometry.py.
    points = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, 0.8], [0.5, -0.8]])
    triangles = np.array([[0, 1, 2], [0, 1, 3]])
    return from_triangulation(points, triangles)
