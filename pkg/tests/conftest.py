import pytest

from psifloor.engine import clear_results
from psifloor.recursion import clear_memo


@pytest.fixture
def fresh_state(monkeypatch):
    """Empty recursion memo and result store, and no cache from the environment."""
    monkeypatch.delenv("PSIFLOOR_CACHE", raising=False)
    clear_memo()
    clear_results()
    yield
    clear_memo()
    clear_results()
