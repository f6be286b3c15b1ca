import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from minkolab.measure import DirectionalMeasure, theta  # noqa: E402
from minkolab.polytope import from_halfspaces, from_vertices  # noqa: E402
from minkolab.stability import recenter_weights  # noqa: E402


def random_polygon(rng, k=None):
    k = k or int(rng.integers(4, 13))
    return from_vertices(rng.standard_normal((k, 2)))


def random_polyhedron(rng, k=None):
    k = k or int(rng.integers(8, 25))
    return from_vertices(rng.standard_normal((k, 3)))


def random_body(rng, dim):
    return random_polygon(rng) if dim == 2 else random_polyhedron(rng)


def random_simple_body(rng, dim, k=None):
    """Random halfspaces in general position; every vertex is simple."""
    from minkolab.errors import UnboundedBody
    while True:
        m = k or int(rng.integers(6, 13)) + 4 * (dim - 2)
        U = rng.standard_normal((m, dim))
        try:
            return from_halfspaces(U / np.linalg.norm(U, axis=1)[:, None],
                                   rng.uniform(0.8, 1.2, m))
        except UnboundedBody:
            continue


def random_centered_measure(rng, dim=2, m=None, min_theta=0.3):
    """Random directions and weights, recentered; rejects low dispersion."""
    while True:
        k = m or int(rng.integers(4, 13))
        U = rng.standard_normal((k, dim))
        U /= np.linalg.norm(U, axis=1)[:, None]
        w = recenter_weights(U, rng.uniform(0.5, 1.5, k))
        if w is None:
            continue
        mu = DirectionalMeasure(U, w)
        if theta(mu) >= min_theta:
            return mu


def random_measure(rng, dim=2, m=None):
    k = m or int(rng.integers(3, 9))
    U = rng.standard_normal((k, dim))
    return DirectionalMeasure(U, rng.uniform(0.2, 1.0, k))


def equal_mass_pair(rng, dim=2):
    a, b = random_measure(rng, dim), random_measure(rng, dim)
    return a, b.scaled(a.total_mass / b.total_mass)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def square_measure():
    I = np.eye(2)
    return DirectionalMeasure(np.vstack([I, -I]), np.ones(4))


@pytest.fixture
def unit_square():
    """[-1/2, 1/2]^2."""
    I = np.eye(2)
    return from_halfspaces(np.vstack([I, -I]), np.full(4, 0.5))
