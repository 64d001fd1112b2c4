import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from rendezvous.explorer import default_table  # noqa: E402

GOLDEN = Path(__file__).parent / "golden"


@pytest.fixture(scope="session")
def table():
    return default_table()


@pytest.fixture
def golden():
    return GOLDEN
