import json
import sys
from pathlib import Path

import pandas as pd

# Add src directory to path
sys.path.append(str(Path(__file__).parent.parent))

from src import figures
from src.cli import main
from src.errors import PhaseTrackError
from src.main import run


def _common(tmp_path):
    return ["--no-progress", "--cache-dir", str(tmp_path)]


def test_eval_w_at_half(tmp_path, capsys):
    status = main(["eval", "--fn", "W", "--s", "0.5,0"] + _common(tmp_path))
    assert status == 0
    data = json.loads(capsys.readouterr().out)
    assert abs(data["value"][0] + 1) < 1e-9
    assert abs(data["value"][1]) < 1e-9
    assert data["_meta"]["config"]


def test_eval_t_plus(tmp_path, capsys):
    assert main(["eval", "--fn", "Tplus", "--s", "0.5,0"] + _common(tmp_path)) == 0
    data = json.loads(capsys.readouterr().out)
    assert abs(data["value"][0] + 0.488648) < 1e-6


def test_unknown_function_is_a_config_error(tmp_path):
    assert main(["eval", "--fn", "Q", "--s", "0.5,1"] + _common(tmp_path)) == 2


def test_missing_required_flag(tmp_path):
    assert main(["eval", "--fn", "zeta"] + _common(tmp_path)) == 2


def test_height_outside_domain(tmp_path):
    assert main(["eval", "--fn", "zeta", "--s", "0.5,5000"] + _common(tmp_path)) == 3


def test_zeros_command_writes_table(tmp_path, capsys):
    out = tmp_path / "tplus.csv"
    status = main(["zeros", "--fn", "Tplus", "--tmax", "30", "-o", str(out)] + _common(tmp_path))
    assert status == 0
    assert out.read_text().startswith("# critline version=")
    table = pd.read_csv(out, comment="#")
    assert abs(table.loc[0, "t"] - 6.97468) < 1e-4
    # the table also lands in the cache
    assert list(tmp_path.glob("Tplus_*.csv"))
    assert "Tplus zeros" in capsys.readouterr().out


def test_ystar_command(tmp_path, capsys):
    assert main(["ystar", "--y", "7.2"] + _common(tmp_path)) == 0
    data = json.loads(capsys.readouterr().out)
    assert len(data["zeros"]) == 2
    assert abs(data["y_star"] - 7.055507) < 1e-5


def test_entry_point_runs_cli(tmp_path, capsys):
    assert run(["ystar", "--y", "7.0"] + _common(tmp_path)) == 0
    assert json.loads(capsys.readouterr().out)["zeros"] == []


def test_failed_figure_keeps_earlier_artifacts(tmp_path, monkeypatch):
    out = tmp_path / "figs"
    out.mkdir()
    (out / "figure5.svg").write_text("earlier run")

    def broken(number, out_dir, *args):
        (Path(out_dir) / "figure5_profiles.csv").write_text("half")
        raise PhaseTrackError("lost the phase")

    monkeypatch.setattr(figures, "render", broken)
    assert main(["figure", "5", "-o", str(out)] + _common(tmp_path)) == 4
    assert (out / "figure5.svg").read_text() == "earlier run"
    assert not (out / "figure5_profiles.csv").exists()
