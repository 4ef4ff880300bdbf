import numpy as np
import pytest

from curvmean.spaces import Euclidean, Hyperbolic, Sphere


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture(params=["s2", "s3", "h2", "h3", "e3"])
def any_space(request):
    return {
        "s2": Sphere(2, 1.0),
        "s3": Sphere(3, 1.0),
        "h2": Hyperbolic(2, -1.0),
        "h3": Hyperbolic(3, -1.0),
        "e3": Euclidean(3),
    }[request.param]


@pytest.fixture(params=["s3", "h3"])
def curved_space(request):
    return {"s3": Sphere(3, 1.0), "h3": Hyperbolic(3, -1.0)}[request.param]


def pole_of(space):
    x = np.zeros(space.ambient_dim)
    if space.kind != "euclidean":
        x[-1] = space.radius
    return x


def random_tangent(space, x, rng, scale=1.0):
    basis = space.tangent_basis(x)
    return space.tangent_from_coords(x, scale * rng.standard_normal(space.dim),
                                     basis)
