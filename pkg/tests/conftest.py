import pytest

from fairprice import TrustParams


@pytest.fixture
def fig2_no_reset():
    return TrustParams("0.5", "0.66", 1, 1, reset=False)


@pytest.fixture
def fig2_reset():
    return TrustParams("0.5", "0.66", 1, 1, reset=True)


@pytest.fixture
def fig2_recovery():
    return TrustParams("0.5", "0.66", "1.33", 1, reset=True)
