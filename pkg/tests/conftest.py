import numpy as np
import pytest

from meshmark.generate import (
    icosahedron,
    octahedron,
    semiregular_mesh,
    tetrahedron,
)


@pytest.fixture(scope="session")
def tetra():
    return tetrahedron()


@pytest.fixture(scope="session")
def octa():
    return octahedron()


@pytest.fixture(scope="session")
def icosa():
    return icosahedron()


@pytest.fixture(scope="session")
def icosphere3():
    return semiregular_mesh("icosa", 3, "sphere")


@pytest.fixture(scope="session")
def octasphere3():
    return semiregular_mesh("octa", 3, "sphere")


@pytest.fixture(scope="session")
def tetrasphere4():
    return semiregular_mesh("tetra", 4, "sphere")


@pytest.fixture(scope="session")
def fixtures_by_name(icosphere3, octasphere3, tetrasphere4):
    return {
        "icosphere3": icosphere3,
        "octasphere3": octasphere3,
        "tetrasphere4": tetrasphere4,
    }


def random_rotation(seed):
    """Uniform-ish random rotation matrix from a seeded generator."""
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(3, 3))
    q, r = np.linalg.qr(a)
    q *= np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q
