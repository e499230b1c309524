"""
conftest.py – shared fixtures and auto-skip logic for the pqw test suite.

Mark summary
────────────
  slow      π₁ of the n = 4 families, minutes each.       Enable: --slow
  stretch   n = 5 instances; may stop at default limits.  Enable: --stretch

Example runs
────────────
  pytest                                   # everything up to n = 3
  pytest --slow                            # + n = 4
  pytest --slow --stretch                  # + n = 5
  pytest tests/test_fpgroup.py -k tietze   # one area
"""

import os
import sys

import pytest

_HERE = os.path.dirname(os.path.abspath(__file__))
REPO_ROOT = os.path.normpath(os.path.join(_HERE, ".."))
_SRC = os.path.join(REPO_ROOT, "src", "pqw")
if _SRC not in sys.path:
    sys.path.insert(0, _SRC)

import families  # noqa: E402
from finite_group import make_abelian_group  # noqa: E402


# ── CLI options ───────────────────────────────────────────────────────────────

def pytest_addoption(parser):
    parser.addoption(
        "--slow", action="store_true", default=False,
        help="Enable π₁ computations at n = 4",
    )
    parser.addoption(
        "--stretch", action="store_true", default=False,
        help="Enable n = 5 instances",
    )


# ── Auto-skip wiring ──────────────────────────────────────────────────────────

def pytest_collection_modifyitems(config, items):
    skip = {
        "slow":    pytest.mark.skip(reason="pass --slow to enable"),
        "stretch": pytest.mark.skip(reason="pass --stretch to enable"),
    }
    slow    = config.getoption("--slow")
    stretch = config.getoption("--stretch")

    for item in items:
        marks = {m.name for m in item.iter_markers()}
        if "slow"    in marks and not slow:    item.add_marker(skip["slow"])
        if "stretch" in marks and not stretch: item.add_marker(skip["stretch"])


# ── Fixtures ──────────────────────────────────────────────────────────────────

@pytest.fixture(scope="session")
def repo_root():
    return REPO_ROOT


@pytest.fixture
def z4x4():
    return make_abelian_group([4, 4])


@pytest.fixture(scope="session")
def x_spec():
    """Factory: x_spec(n) → X_n, cached per n for the session."""
    cache = {}

    def build(n):
        if n not in cache:
            cache[n] = families.x_family(n)
        return cache[n]
    return build


@pytest.fixture(scope="session")
def y_spec():
    cache = {}

    def build(n):
        if n not in cache:
            cache[n] = families.y_family(n)
        return cache[n]
    return build
