import json

import numpy as np
import pytest

from ricci_bounds import MetricChain, build_mmk_chain


@pytest.fixture(scope="session")
def mmk_2_4():
    return build_mmk_chain(2, 4, 40)


@pytest.fixture(scope="session")
def mmk_5_10():
    return build_mmk_chain(5, 10, 60)


def line_chain(coords, kernel, origin=None):
    coords = np.asarray(coords, dtype=float)
    dist = np.abs(coords[:, None] - coords[None, :])
    return MetricChain(points=tuple(str(c) for c in coords), dist=dist,
                       kernel=np.asarray(kernel, dtype=float),
                       origin_hint=origin, coords=coords)


def biased_reflecting_walk(n_states, p_up):
    """Zero-curvature line walk: up with p_up, down (reflecting at 0) otherwise."""
    kernel = np.zeros((n_states, n_states))
    for i in range(n_states):
        if i + 1 < n_states:
            kernel[i, i + 1] = p_up
        else:
            kernel[i, i] += p_up
        if i > 0:
            kernel[i, i - 1] = 1.0 - p_up
        else:
            kernel[i, i] += 1.0 - p_up
    return line_chain(np.arange(n_states, dtype=float), kernel, origin=0)


def write_chain_json(path, points, dist, kernel, origin=None):
    doc = {"points": list(points), "dist": np.asarray(dist).tolist(),
           "kernel": np.asarray(kernel).tolist()}
    if origin is not None:
        doc["origin"] = origin
    path.write_text(json.dumps(doc), encoding="utf-8")
    return path
