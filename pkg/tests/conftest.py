import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from rxnbalance.equivalence import default_rules


@pytest.fixture(scope="session")
def rules():
    return default_rules()


@pytest.fixture(scope="session")
def fixture_dir() -> Path:
    return Path(__file__).parent / "fixtures"
