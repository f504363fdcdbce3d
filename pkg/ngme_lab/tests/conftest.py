import numpy as np
import pytest

from config import HALF, SEED
from ngme.settings import get_settings
from ngme.state_factory import make_dicke, make_generalized_w, make_ghz


@pytest.fixture(autouse=True)
def isolated_ledger(tmp_path, monkeypatch):
    """Every test writes discrepancies to its own ledger file."""
    path = tmp_path / "discrepancies.jsonl"
    monkeypatch.setenv("NGME_LEDGER_PATH", str(path))
    get_settings.cache_clear()
    yield path
    get_settings.cache_clear()


@pytest.fixture
def rng():
    return np.random.default_rng(SEED)


@pytest.fixture
def ghz3():
    return make_ghz(3, 2, [HALF, HALF])


@pytest.fixture
def w3():
    return make_generalized_w([1 / np.sqrt(3)] * 3)


@pytest.fixture
def dicke42():
    return make_dicke(4, 2, 2)
