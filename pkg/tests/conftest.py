import pytest

from riesz_lab.operators import (
    BesselParams,
    LaguerreParams,
    build_bessel,
    build_hermite,
    build_laguerre,
    tensor_product,
)


@pytest.fixture(scope="session")
def laguerre0():
    return build_laguerre(LaguerreParams(0.0, 32))


@pytest.fixture(scope="session")
def laguerre1():
    return build_laguerre(LaguerreParams(1.0, 32))


@pytest.fixture(scope="session")
def hermite():
    return build_hermite(32)


@pytest.fixture(scope="session")
def bessel0():
    return build_bessel(BesselParams(0.0, 40.0, 400, 32))


@pytest.fixture(scope="session")
def bessel1():
    return build_bessel(BesselParams(1.0, 40.0, 400, 32))


@pytest.fixture(scope="session")
def tensor2():
    factor = build_laguerre(LaguerreParams(0.0, 11))
    return tensor_product([factor, factor], 10)


@pytest.fixture(scope="session")
def systems_1d(laguerre0, laguerre1, hermite, bessel0, bessel1):
    return [laguerre0, laguerre1, hermite, bessel0, bessel1]


@pytest.fixture(scope="session")
def all_systems(systems_1d, tensor2):
    return systems_1d + [tensor2]


@pytest.fixture(params=["laguerre0", "laguerre1", "hermite", "bessel0", "bessel1"])
def system_1d(request):
    return request.getfixturevalue(request.param)


@pytest.fixture(params=["laguerre0", "laguerre1", "hermite", "bessel0", "bessel1", "tensor2"])
def any_system(request):
    return request.getfixturevalue(request.param)


ACCEPTANCE_LOG = pytest.StashKey[list]()


@pytest.fixture
def acceptance_log(request):
    return request.config.stash.setdefault(ACCEPTANCE_LOG, [])


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE_LOG, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
