import os
import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

from ealm.grid import BinaryGrid, GridSpec  # noqa: E402


def grid_of(cells, outside=False):
    cells = np.asarray(cells, dtype=bool)
    h, w = cells.shape
    return BinaryGrid(GridSpec(w, h, (0.0, float(w)), (0.0, float(h))), cells, outside)


@st.composite
def grids(draw, min_side=3, max_side=12, guard=0):
    h = draw(st.integers(min_side, max_side))
    w = draw(st.integers(min_side, max_side))
    cells = draw(hnp.arrays(bool, (h, w)))
    if guard:
        cells[:guard] = cells[-guard:] = False
        cells[:, :guard] = cells[:, -guard:] = False
    return grid_of(cells)


@st.composite
def elements(draw):
    from ealm.morphology import StructuringElement
    mask = draw(st.lists(st.lists(st.sampled_from((1, 0, -1)), min_size=3, max_size=3), min_size=3, max_size=3))
    if all(v == -1 for row in mask for v in row):
        mask[1][1] = 1
    return StructuringElement(tuple(tuple(r) for r in mask))


@pytest.fixture
def out_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("EALM_OUT_DIR", str(tmp_path / "out"))
    return tmp_path / "out"


def pytest_terminal_summary(terminalreporter):
    import test_acceptance
    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in test_acceptance.RESULTS:
            terminalreporter.write_line(line)
