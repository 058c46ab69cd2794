"""Run configuration: command-line flags over a key=value config file over the environment."""
import hashlib
import json
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

from dotenv import dotenv_values, load_dotenv

from src.combinators import FUNCTION_IDS, CounterexampleSpec
from src.critline import LINE_FUNCTIONS, LINE_T_MAX, POSITIONAL_MAX_N
from src.errors import ConfigError

# Load environment variables
load_dotenv()

DEFAULT_CACHE_DIR = "cache"
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")

# keys that name where things go or how they are reported; they do not change results
_NON_RESULT_KEYS = {"output", "cache_dir", "workers", "log_level", "log_file", "config", "no_progress"}


def parse_window(text: str) -> tuple:
    parts = [float(x) for x in str(text).replace(";", ",").split(",")]
    if len(parts) != 4:
        raise ValueError(f"window needs sigma_lo,sigma_hi,t_lo,t_hi, got {text!r}")
    return tuple(parts)


def parse_complex(text: str) -> complex:
    """'0.5,14.13' or '0.5+14.13j' as a complex number."""
    text = str(text).strip()
    if "," in text:
        re_part, im_part = text.split(",")
        return complex(float(re_part), float(im_part))
    return complex(text.replace(" ", ""))


def parse_float_list(text: str) -> List[float]:
    return [float(x) for x in str(text).split(",") if x.strip()]


def _parse_bool(text: str) -> bool:
    return str(text).strip().lower() in ("1", "true", "yes", "on")


KEY_TYPES: Dict[str, Callable[[str], Any]] = {
    "fn": str,
    "s": parse_complex,
    "y": float,
    "tmax": float,
    "window": parse_window,
    "rect": parse_window,
    "resolution": int,
    "levels": parse_float_list,
    "of": str,
    "variant": str,
    "delta": float,
    "t_star": float,
    "n": int,
    "mode": str,
    "t0": float,
    "t0_grid": parse_float_list,
    "t_values": parse_float_list,
    "which": str,
    "number": int,
    "output": str,
    "cache_dir": str,
    "workers": int,
    "log_level": str,
    "log_file": str,
    "no_progress": _parse_bool,
}


@dataclass
class RunConfig:
    command: str
    params: Dict[str, Any] = field(default_factory=dict)
    cache_dir: Path = Path(DEFAULT_CACHE_DIR)
    output: Optional[Path] = None
    workers: int = 4
    log_level: str = "INFO"
    log_file: Optional[str] = None
    show_progress: bool = True

    def get(self, key: str, default: Any = None) -> Any:
        value = self.params.get(key)
        return default if value is None else value

    @property
    def spec(self) -> Optional[CounterexampleSpec]:
        delta, t_star = self.get("delta"), self.get("t_star")
        if delta is None and t_star is None:
            return None
        if delta is None or t_star is None:
            raise ConfigError("delta" if delta is None else "t_star", "the counterexample needs both delta and t_star")
        return CounterexampleSpec(delta, t_star)

    def config_hash(self) -> str:
        """Short hash over the command and every parameter that affects results."""
        relevant = {k: v for k, v in self.params.items() if k not in _NON_RESULT_KEYS and v is not None}
        payload = json.dumps({"command": self.command, "params": relevant}, sort_keys=True, default=str)
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]


def read_config_file(path: str) -> Dict[str, Any]:
    """key=value file through dotenv_values; keys are lower-cased flag names."""
    if not Path(path).is_file():
        raise ConfigError("config", f"config file {path} not found")
    values: Dict[str, Any] = {}
    for raw_key, raw_value in dotenv_values(path).items():
        key = raw_key.strip().lower().replace("-", "_")
        if key not in KEY_TYPES:
            raise ConfigError(key, f"unknown key in {path}")
        if raw_value is None:
            continue
        try:
            values[key] = KEY_TYPES[key](raw_value)
        except ValueError as e:
            raise ConfigError(key, f"cannot parse {raw_value!r}: {e}")
    return values


def build_config(command: str, flags: Dict[str, Any], config_file: Optional[str] = None) -> RunConfig:
    """Merge the three layers and validate the result."""
    file_values = read_config_file(config_file) if config_file else {}
    params: Dict[str, Any] = dict(file_values)
    for key, value in flags.items():
        if value is not None:
            params[key] = value

    cache_dir = params.get("cache_dir") or os.getenv("CRITLINE_CACHE") or DEFAULT_CACHE_DIR
    log_level = str(params.get("log_level") or os.getenv("LOG_LEVEL", "INFO")).upper()
    log_file = params.get("log_file") or os.getenv("LOG_FILE") or None
    try:
        workers = int(params.get("workers") or os.getenv("CRITLINE_WORKERS", "4"))
    except ValueError:
        raise ConfigError("workers", f"CRITLINE_WORKERS must be an integer, got {os.getenv('CRITLINE_WORKERS')!r}")

    config = RunConfig(
        command=command,
        params=params,
        cache_dir=Path(cache_dir),
        output=Path(params["output"]) if params.get("output") else None,
        workers=workers,
        log_level=log_level,
        log_file=log_file,
        show_progress=not params.get("no_progress", False),
    )
    validate(config)
    logging.debug(f"Config for {command}: {params} (cache {config.cache_dir})")
    return config


def _require(condition: bool, key: str, message: str) -> None:
    if not condition:
        raise ConfigError(key, message)


def validate(config: RunConfig) -> None:
    """Check every numeric parameter against the owning module's preconditions."""
    p = config.params
    _require(config.log_level in LOG_LEVELS, "log_level", f"must be one of {LOG_LEVELS}")
    _require(config.workers >= 1, "workers", "must be at least 1")

    fn = p.get("fn")
    if fn is not None:
        known = set(FUNCTION_IDS) | set(LINE_FUNCTIONS) | {"xi1", "xi", "log_xi1", "logderiv_xi1", "zeta", "zeta_deriv",
                                                           "log_gamma", "digamma"}
        _require(fn in known, "fn", f"unknown function {fn!r}")
    if p.get("tmax") is not None:
        _require(0 < p["tmax"] <= LINE_T_MAX, "tmax", f"must lie in (0, {LINE_T_MAX}]")
    if p.get("y") is not None:
        _require(p["y"] >= 1, "y", "must be >= 1")
    if p.get("resolution") is not None:
        _require(16 <= p["resolution"] and p["resolution"] ** 2 <= 10_000_000, "resolution",
                 "must be at least 16 with resolution^2 <= 1e7")
    if p.get("delta") is not None:
        _require(0 < p["delta"] < 0.25, "delta", "must lie in (0, 1/4)")
    if p.get("t_star") is not None:
        _require(p["t_star"] > 0, "t_star", "must be positive")
    for key in ("window", "rect"):
        if p.get(key) is not None:
            s_lo, s_hi, t_lo, t_hi = p[key]
            _require(s_lo < s_hi and t_lo < t_hi, key, f"needs sigma_lo < sigma_hi and t_lo < t_hi, got {p[key]}")
    if p.get("levels") is not None:
        _require(all(level > 0 for level in p["levels"]), "levels", "contour levels must be positive")
    if p.get("n") is not None:
        _require(1 <= p["n"] <= POSITIONAL_MAX_N, "n", f"must lie in [1, {POSITIONAL_MAX_N}]")
    if p.get("variant") is not None:
        _require(p["variant"] in ("plain", "oa"), "variant", "must be plain or oa")
        if p["variant"] == "oa":
            _require(p.get("delta") is not None and p.get("t_star") is not None, "delta",
                     "variant oa needs delta and t_star")
    if p.get("of") is not None:
        _require(p["of"] in ("absV", "absW"), "of", "must be absV or absW")
