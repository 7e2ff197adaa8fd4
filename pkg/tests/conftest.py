from __future__ import annotations

import pytest

from glbc import chars, oracle


@pytest.fixture(scope="session", autouse=True)
def green_gate(tmp_path_factory):
    """Isolated cache directory, then validate the cuspidal formula once for the session."""
    mp = pytest.MonkeyPatch()
    mp.setenv("GLBC_CACHE_DIR", str(tmp_path_factory.mktemp("glbc-cache")))
    chars.reset_green_gate()
    results = oracle.validate_green_formula(oracle.DEFAULT_VALIDATION_GROUPS, persist=True)
    assert all(r["pass"] for r in results), results
    yield results
    mp.undo()
