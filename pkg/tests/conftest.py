import pytest

from liouflow.arith import build_weakmixing_pair, build_yoccoz_pair


@pytest.fixture(scope="session")
def yoccoz_q3():
    return build_yoccoz_pair(1, 3)


@pytest.fixture(scope="session")
def yoccoz_q2():
    return build_yoccoz_pair(1, 2)


@pytest.fixture(scope="session")
def weakmix_q3():
    return build_weakmixing_pair(1, 3)


@pytest.fixture(scope="session")
def weakmix_q2():
    return build_weakmixing_pair(1, 2)
