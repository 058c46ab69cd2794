import json
import sys
from pathlib import Path

import pandas as pd
import pytest

# Add src directory to path
sys.path.append(str(Path(__file__).parent.parent))

from src.critline import ZeroRecord
from src.utils import (CODE_VERSION, TableCache, remove_partial, to_json, write_csv, write_json, zeros_to_frame)


@pytest.fixture
def records():
    return [
        ZeroRecord("Tplus", 1, complex(0.5, 6.974684), 1e-12, 1e-13),
        ZeroRecord("Tplus", 2, complex(0.5, 10.2101), 3e-12, 2e-13),
    ]


def test_cache_store_and_load(tmp_path, records):
    cache = TableCache(tmp_path)
    path = cache.store("Tplus", 20.0, records)
    first = path.read_bytes()
    loaded = cache.load("Tplus", 20.0)
    assert [r.t for r in loaded] == [r.t for r in records]
    assert [r.index for r in loaded] == [1, 2]
    cache.store("Tplus", 20.0, loaded)
    assert path.read_bytes() == first


def test_cache_key_depends_on_version_and_height(tmp_path):
    assert TableCache(tmp_path).key("Tplus", 20.0) != TableCache(tmp_path, "other").key("Tplus", 20.0)
    assert TableCache(tmp_path).key("Tplus", 20.0) != TableCache(tmp_path).key("Tplus", 30.0)
    assert TableCache(tmp_path).path("Tplus", 20.0).name.startswith("Tplus_")


def test_cache_miss(tmp_path):
    assert TableCache(tmp_path).load("Tminus", 20.0) is None


def test_cache_rejects_other_version(tmp_path, records):
    cache = TableCache(tmp_path)
    path = cache.store("Tplus", 20.0, records)
    sidecar = path.with_suffix(".sha256")
    digest = sidecar.read_text().split()[0]
    sidecar.write_text(f"{digest} critline-0.0.1\n")
    assert cache.load("Tplus", 20.0) is None
    assert not path.exists()


def test_cache_rejects_corrupt_table(tmp_path, records):
    cache = TableCache(tmp_path)
    path = cache.store("Tplus", 20.0, records)
    path.write_text(path.read_text().replace("6.974684", "6.974685"))
    assert cache.load("Tplus", 20.0) is None


def test_get_or_compute_computes_once(tmp_path, records):
    cache = TableCache(tmp_path)
    calls = []

    def compute():
        calls.append(1)
        return records

    cache.get_or_compute("Tplus", 20.0, compute)
    again = cache.get_or_compute("Tplus", 20.0, compute)
    assert len(calls) == 1
    assert len(again) == 2


def test_write_csv_header(tmp_path, records):
    path = write_csv(zeros_to_frame(records), tmp_path / "zeros.csv", "abc123")
    lines = path.read_text().splitlines()
    assert lines[0] == f"# critline version={CODE_VERSION} config=abc123"
    assert lines[1] == "function,index,t,residual,width"
    assert not (tmp_path / "zeros.csv.part").exists()
    frame = pd.read_csv(path, comment="#")
    assert list(frame["index"]) == [1, 2]


def test_json_meta_and_complex(tmp_path):
    text = to_json({"value": 1 + 2j, "missing": None}, "abc123")
    data = json.loads(text)
    assert data["_meta"] == {"config": "abc123", "version": CODE_VERSION}
    assert data["value"] == [1.0, 2.0]
    assert data["missing"] is None
    path = write_json({"x": 1}, tmp_path / "out.json", "abc123")
    assert json.loads(path.read_text())["x"] == 1


def test_remove_partial(tmp_path):
    target = tmp_path / "table.csv"
    target.write_text("half")
    (tmp_path / "table.csv.part").write_text("half")
    remove_partial([target])
    assert not target.exists()
    assert not (tmp_path / "table.csv.part").exists()


def test_remove_partial_keeps_earlier_outputs(tmp_path):
    earlier = tmp_path / "figure2.svg"
    earlier.write_text("<svg/>")
    (tmp_path / "figure2.svg.part").write_text("half")
    fresh = tmp_path / "figure2_marks.csv"
    fresh.write_text("half")
    remove_partial([earlier, fresh], keep=[earlier])
    assert earlier.read_text() == "<svg/>"
    assert not (tmp_path / "figure2.svg.part").exists()
    assert not fresh.exists()
