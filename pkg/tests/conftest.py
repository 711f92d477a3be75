import pytest

from levysheet.basis import TensorBasisOrdering, build_ortho_polys
from levysheet.measures import two_point_measure


@pytest.fixture(scope="session")
def two_point():
    return two_point_measure()


@pytest.fixture(scope="session")
def system(two_point):
    return build_ortho_polys(two_point)


@pytest.fixture(scope="session")
def ordering1():
    return TensorBasisOrdering(n=1)


@pytest.fixture(scope="session")
def ordering2():
    return TensorBasisOrdering(n=2)
