import os
import pytest

from furst.store import RegressionStore
from furst.structure import SUnitParams


@pytest.fixture
def level():
    """
    values for FURST_TEST_LEVEL:
        fast = unit sizes, a few seconds per module
        full = acceptance sizes used by verify-all full
    """

    return os.environ.get("FURST_TEST_LEVEL", "fast").strip()


@pytest.fixture
def bases():
    return SUnitParams(2, 3)


@pytest.fixture
def store(tmp_path):
    return RegressionStore(tmp_path / "regression.csv")
