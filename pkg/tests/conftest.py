import os
import sys

import pytest
from hypothesis import settings

# Same flat import layout as src/main.py
sys.path.insert(0, os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "src"))

settings.register_profile("default", max_examples=50, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running numerical checks (deselect with -m 'not slow')")


@pytest.fixture(autouse=True)
def _clean_env(monkeypatch):
    for name in ("NCQM_QUAD_TOL", "NCQM_ROOT_TOL", "NCQM_CRIT_TOL", "NCQM_THREADS"):
        monkeypatch.delenv(name, raising=False)
