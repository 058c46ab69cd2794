import sys
from pathlib import Path

import numpy as np
import pytest

# Add src directory to path
sys.path.append(str(Path(__file__).parent.parent))

from src.config import build_config, parse_complex, parse_window, read_config_file
from src.errors import ConfigError


@pytest.fixture
def clean_env(monkeypatch):
    for name in ("CRITLINE_CACHE", "CRITLINE_WORKERS", "LOG_LEVEL", "LOG_FILE"):
        monkeypatch.delenv(name, raising=False)
    return monkeypatch


def test_parsers():
    assert parse_complex("0.5,14.13") == complex(0.5, 14.13)
    assert parse_complex("0.5+14.13j") == complex(0.5, 14.13)
    assert parse_window("0,1,415,421") == (0.0, 1.0, 415.0, 421.0)
    with pytest.raises(ValueError):
        parse_window("0,1,2")


def test_defaults(clean_env):
    config = build_config("zeros", {"fn": "Tplus", "tmax": 100.0})
    assert config.cache_dir == Path("cache")
    assert config.workers == 4
    assert config.log_level == "INFO"
    assert config.show_progress


def test_precedence_flags_over_file_over_env(clean_env, tmp_path):
    clean_env.setenv("CRITLINE_WORKERS", "2")
    clean_env.setenv("CRITLINE_CACHE", str(tmp_path / "env_cache"))
    assert build_config("zeros", {}).workers == 2

    config_file = tmp_path / "run.conf"
    config_file.write_text("workers=3\ntmax=200\nfn=Tminus\n")
    from_file = build_config("zeros", {}, str(config_file))
    assert from_file.workers == 3
    assert from_file.get("fn") == "Tminus"
    assert from_file.cache_dir == tmp_path / "env_cache"

    from_flags = build_config("zeros", {"workers": 6, "tmax": 50.0}, str(config_file))
    assert from_flags.workers == 6
    assert from_flags.get("tmax") == 50.0
    assert from_flags.get("fn") == "Tminus"


def test_unknown_file_key(tmp_path):
    config_file = tmp_path / "run.conf"
    config_file.write_text("colour=blue\n")
    with pytest.raises(ConfigError) as excinfo:
        read_config_file(str(config_file))
    assert excinfo.value.key == "colour"


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError):
        read_config_file(str(tmp_path / "absent.conf"))


def test_validation_names_the_key(clean_env):
    with pytest.raises(ConfigError) as excinfo:
        build_config("zeros", {"fn": "Tplus", "tmax": 2000.0})
    assert excinfo.value.key == "tmax"
    with pytest.raises(ConfigError) as excinfo:
        build_config("eval", {"fn": "Q"})
    assert excinfo.value.key == "fn"
    with pytest.raises(ConfigError) as excinfo:
        build_config("counterexample", {"delta": 0.3, "t_star": 400.0})
    assert excinfo.value.key == "delta"
    with pytest.raises(ConfigError):
        build_config("contours", {"window": (1.0, 0.0, 400.0, 401.0)})


def test_counterexample_spec_from_config(clean_env):
    config = build_config("counterexample", {"delta": 0.05, "t_star": 418.85})
    zeros = config.spec.zeros()
    assert zeros.size == 4
    assert np.allclose(sorted(zeros[zeros.imag > 0].real), [0.7, 0.8])
    assert build_config("eval", {"fn": "U"}).spec is None
    with pytest.raises(ConfigError):
        build_config("eval", {"fn": "U", "delta": 0.05}).spec


def test_config_hash_ignores_output(clean_env, tmp_path):
    a = build_config("zeros", {"fn": "Tplus", "tmax": 100.0, "output": str(tmp_path / "a.csv")})
    b = build_config("zeros", {"fn": "Tplus", "tmax": 100.0, "output": str(tmp_path / "b.csv"), "workers": 8})
    c = build_config("zeros", {"fn": "Tplus", "tmax": 200.0})
    assert a.config_hash() == b.config_hash()
    assert a.config_hash() != c.config_hash()


def test_positional_n_is_capped(clean_env):
    with pytest.raises(ConfigError) as excinfo:
        build_config("experiment", {"which": "positional", "n": 1501})
    assert excinfo.value.key == "n"
    assert build_config("experiment", {"which": "positional", "n": 1500}).get("n") == 1500


def test_keys_no_command_reads_are_rejected(tmp_path):
    config_file = tmp_path / "run.conf"
    for key in ("t_lo", "t_hi", "step", "sigma", "level"):
        config_file.write_text(f"{key}=1\n")
        with pytest.raises(ConfigError) as excinfo:
            read_config_file(str(config_file))
        assert excinfo.value.key == key
