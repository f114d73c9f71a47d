"""Shared fixtures."""

from __future__ import annotations

import pytest

from radiolb import C2Params


@pytest.fixture
def params12():
    return C2Params(1, 2)


@pytest.fixture
def params22():
    return C2Params(2, 2)
