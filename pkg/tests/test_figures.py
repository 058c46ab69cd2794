import sys
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

# Add src directory to path
sys.path.append(str(Path(__file__).parent.parent))

from src.errors import DomainError
from src.figures import CONTOUR_COLUMNS, contour_rows, render
from src.planar import ContourPolyline
from src.utils import CODE_VERSION


def test_contour_rows_layout():
    square = ContourPolyline(1.0, np.array([0, 1, 1 + 1j, 0]), True)
    rows = contour_rows("absV=1", [square])
    assert len(rows) == 4
    assert set(rows[0]) == set(CONTOUR_COLUMNS)
    assert rows[2]["sigma"] == 1.0 and rows[2]["t"] == 1.0
    frame = pd.DataFrame(rows, columns=CONTOUR_COLUMNS)
    assert frame["closed"].all()


def test_argument_profile_figure(tmp_path):
    written = render(5, tmp_path, "abc123")
    names = sorted(p.name for p in written)
    assert names == ["figure5.svg", "figure5_profiles.csv"]

    svg = (tmp_path / "figure5.svg").read_text()
    assert f"<!-- critline version={CODE_VERSION} config=abc123 -->" in svg
    assert "<svg" in svg

    data = pd.read_csv(tmp_path / "figure5_profiles.csv", comment="#")
    assert list(data.columns) == ["sigma", "t", "arg_u"]
    assert set(data["sigma"]) == {0.5, 0.75, 0.753}


def test_argument_profile_svg_is_stable(tmp_path):
    first = (render(5, tmp_path / "a", "abc123")[1]).read_bytes()
    second = (render(5, tmp_path / "b", "abc123")[1]).read_bytes()
    assert first == second


def test_unknown_figure(tmp_path):
    with pytest.raises(DomainError):
        render(7, tmp_path, "abc123")
