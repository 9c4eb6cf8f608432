"""Shared fixtures for the test suite."""

from pathlib import Path

import pytest

import fpt

PACKAGE_ROOT = Path(fpt.__file__).resolve().parent


@pytest.fixture(scope="session")
def paper_data_dir():
    """Directory holding the bundled golden operator files."""
    return PACKAGE_ROOT / "data" / "paper"


@pytest.fixture(scope="session")
def mutations_dir():
    """Directory holding deliberately perturbed operator files."""
    return PACKAGE_ROOT / "data" / "mutations"


@pytest.fixture(scope="session")
def fixtures_dir():
    """Directory holding miscellaneous operator fixtures."""
    return PACKAGE_ROOT / "data" / "fixtures"
