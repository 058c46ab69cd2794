import hashlib
import json
import logging
import os
import threading
from pathlib import Path
from typing import Callable, Dict, Iterable, List, Optional, Sequence

import numpy as np
import pandas as pd

from src.critline import ZeroRecord
from src.errors import CacheError

CODE_VERSION = "critline-1.0.0"
ZERO_TABLE_COLUMNS = ["function", "index", "t", "residual", "width"]
FLOAT_FORMAT = "%.15g"


def zeros_to_frame(records: Sequence[ZeroRecord]) -> pd.DataFrame:
    """Zero table in the fixed CSV layout."""
    return pd.DataFrame(
        [{"function": r.function_id, "index": r.index, "t": r.t, "residual": r.residual, "width": r.width}
         for r in records],
        columns=ZERO_TABLE_COLUMNS,
    )


def frame_to_zeros(df: pd.DataFrame) -> List[ZeroRecord]:
    return [ZeroRecord(str(row.function), int(row.index), complex(0.5, float(row.t)), float(row.residual),
                       float(row.width))
            for row in df.itertuples(index=False)]


def artifact_header(config_hash: str) -> str:
    return f"# critline version={CODE_VERSION} config={config_hash}\n"


def atomic_write(path: Path, text: str) -> None:
    """Write via a sibling temp file so a failed run never leaves half a file behind."""
    path = Path(path)
    tmp = path.with_name(path.name + ".part")
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except OSError as e:
        if tmp.exists():
            tmp.unlink()
        raise CacheError(f"cannot write {path}: {e}")


def write_csv(df: pd.DataFrame, path: Path, config_hash: str) -> Path:
    """CSV with a leading header comment; formatting is deterministic."""
    body = df.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    atomic_write(Path(path), artifact_header(config_hash) + body)
    logging.info(f"Wrote {len(df)} rows to {path}")
    return Path(path)


def read_csv(path: Path) -> pd.DataFrame:
    try:
        return pd.read_csv(path, comment="#")
    except (OSError, pd.errors.ParserError) as e:
        raise CacheError(f"cannot read {path}: {e}")


def _json_default(obj):
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, Path):
        return str(obj)
    raise TypeError(f"{type(obj).__name__} is not JSON serialisable")


def to_json(obj: Dict, config_hash: str) -> str:
    payload = {"_meta": {"version": CODE_VERSION, "config": config_hash}, **obj}
    return json.dumps(payload, indent=2, sort_keys=True, default=_json_default, ensure_ascii=False) + "\n"


def write_json(obj: Dict, path: Path, config_hash: str) -> Path:
    """One JSON object per file; the metadata key stands in for a header comment."""
    atomic_write(Path(path), to_json(obj, config_hash))
    logging.info(f"Wrote report to {path}")
    return Path(path)


def remove_partial(paths: Sequence[Path], keep: Iterable[Path] = ()) -> None:
    """Delete planned outputs and their .part files; paths in keep were there before the run."""
    keep = {Path(k) for k in keep}
    for p in paths:
        p = Path(p)
        candidates = [p.with_name(p.name + ".part")] if p in keep else [p, p.with_name(p.name + ".part")]
        for candidate in candidates:
            if candidate.exists():
                candidate.unlink()
                logging.info(f"Removed partial artifact {candidate}")


class TableCache:
    """Zero tables on disk, keyed by (function, T_max, extra, code version) and checked by sha256."""

    _locks: Dict[Path, threading.Lock] = {}
    _guard = threading.Lock()

    def __init__(self, cache_dir: Path, version: str = CODE_VERSION):
        self.cache_dir = Path(cache_dir)
        self.version = version

    def key(self, function: str, t_max: float, extra: str = "") -> str:
        raw = f"{function}|{float(t_max)!r}|{extra}|{self.version}"
        return hashlib.sha256(raw.encode("utf-8")).hexdigest()[:16]

    def path(self, function: str, t_max: float, extra: str = "") -> Path:
        return self.cache_dir / f"{function}_{self.key(function, t_max, extra)}.csv"

    def _lock(self, path: Path) -> threading.Lock:
        with self._guard:
            return self._locks.setdefault(path, threading.Lock())

    @staticmethod
    def _sidecar(path: Path) -> Path:
        return path.with_suffix(".sha256")

    def store(self, function: str, t_max: float, records: Sequence[ZeroRecord], extra: str = "") -> Path:
        path = self.path(function, t_max, extra)
        text = artifact_header(self.key(function, t_max, extra)) + zeros_to_frame(records).to_csv(
            index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
        digest = hashlib.sha256(text.encode("utf-8")).hexdigest()
        with self._lock(path):
            atomic_write(path, text)
            atomic_write(self._sidecar(path), f"{digest} {self.version}\n")
        logging.info(f"Cached {len(records)} {function} zeros to t = {t_max} at {path}")
        return path

    def _reject(self, path: Path, reason: str) -> None:
        logging.warning(f"Cache entry {path} rejected: {reason}")
        for p in (path, self._sidecar(path)):
            if p.exists():
                p.unlink()

    def load(self, function: str, t_max: float, extra: str = "") -> Optional[List[ZeroRecord]]:
        """Cached table, or None when missing, corrupt or from another code version."""
        path = self.path(function, t_max, extra)
        with self._lock(path):
            if not path.exists():
                return None
            sidecar = self._sidecar(path)
            try:
                data = path.read_bytes()
                stamp = sidecar.read_text(encoding="utf-8").split() if sidecar.exists() else []
            except OSError as e:
                raise CacheError(f"cannot read {path}: {e}")
            if len(stamp) != 2:
                self._reject(path, "missing checksum")
                return None
            digest, version = stamp
            if version != self.version:
                self._reject(path, f"version {version} != {self.version}")
                return None
            if hashlib.sha256(data).hexdigest() != digest:
                self._reject(path, "checksum mismatch")
                return None
        return frame_to_zeros(read_csv(path))

    def get_or_compute(self, function: str, t_max: float, compute: Callable[[], Sequence[ZeroRecord]],
                       extra: str = "") -> List[ZeroRecord]:
        records = self.load(function, t_max, extra)
        if records is not None:
            logging.info(f"Loaded {len(records)} {function} zeros from cache")
            return records
        records = list(compute())
        self.store(function, t_max, records, extra)
        return records
