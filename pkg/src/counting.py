"""Argument-principle zero counts over rectangles, and the comparison of
zero tables against the counting main terms."""
import logging
import math
import time
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from scipy import optimize

from src.combinators import CounterexampleSpec, evaluate_array, log_evaluate_array, real_zeros
from src.complexfn import EULER_GAMMA
from src.critline import LINE_T_MAX, ZeroRecord, line_zeros
from src.errors import BoundarySingularityError, DomainError, NonIntegerWindingError
from src.planar import validate_window
from src.workers import run_concurrent

Rect = tuple

Y_STAR = 4 * math.pi * math.exp(-EULER_GAMMA)

EDGE_SAMPLES_PER_UNIT = 24
MIN_EDGE_SAMPLES = 64
MAX_PHASE_STEP = np.pi / 2
# refinement below this spacing means a zero or pole sits on (or right next to) the edge
MIN_SPACING = 1e-4
MAX_REFINE_ROUNDS = 40
NUDGE = 1e-2
MAX_NUDGES = 5
INTEGER_TOL = 0.05

# real-axis poles of the functions that have a log form
_REAL_POLES: Dict[str, tuple] = {
    "xi1_2s": (0.0, 0.5),
    "xi1_2s_1": (0.5, 1.0),
    "Tplus": (0.0, 1.0),
    "Tminus": (0.0, 0.5, 1.0),
    "a0": (0.0, 1.0),
    "U": (1.0,),
}

COUNT_FUNCTIONS = ("Tplus", "Tminus", "xi1_2s", "zeta_line", "a0_y")
SUMMARY_COLUMNS = ["fn_id", "T", "y", "count", "formula_value", "deviation", "bound", "within_bound"]


@dataclass
class CountReport:
    fn_id: str
    rect: Rect
    winding: int
    formula_value: Optional[float] = None
    deviation: Optional[float] = None
    count: Optional[int] = None
    details: Dict[str, object] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, object]:
        out = asdict(self)
        out["rect"] = list(self.rect)
        return out


# ------------------------------------------------------------------ winding

def _wrap(delta: np.ndarray) -> np.ndarray:
    return np.remainder(delta + np.pi, 2 * np.pi) - np.pi


def _arg(fn_id: str, s: np.ndarray, spec, param) -> np.ndarray:
    logs, singular = log_evaluate_array(fn_id, s, spec, param)
    if singular.any():
        hit = s[np.argmax(singular)]
        raise BoundarySingularityError(f"{fn_id} is singular at {hit:.6g} on the contour")
    return logs.imag


def _edge_phase(fn_id: str, a: complex, b: complex, spec, param) -> float:
    """Continuous change of arg fn along the segment a -> b."""
    length = abs(b - a)
    n = max(MIN_EDGE_SAMPLES, int(math.ceil(length * EDGE_SAMPLES_PER_UNIT)))
    u = np.linspace(0.0, 1.0, n + 1)
    args = _arg(fn_id, a + u * (b - a), spec, param)
    for _ in range(MAX_REFINE_ROUNDS):
        d = _wrap(np.diff(args))
        coarse = np.abs(d) >= MAX_PHASE_STEP
        if not coarse.any():
            return float(d.sum())
        gaps = np.diff(u)[coarse] * length
        if gaps.min() < MIN_SPACING:
            where = a + u[:-1][coarse][np.argmin(gaps)] * (b - a)
            raise BoundarySingularityError(f"{fn_id}: zero or pole within {MIN_SPACING} of {where:.6g}")
        mids = 0.5 * (u[:-1] + u[1:])[coarse]
        u = np.concatenate([u, mids])
        args = np.concatenate([args, _arg(fn_id, a + mids * (b - a), spec, param)])
        order = np.argsort(u)
        u, args = u[order], args[order]
    raise BoundarySingularityError(f"{fn_id}: phase refinement did not settle on {a:.6g} -> {b:.6g}")


def _corners(rect: Rect) -> List[complex]:
    s_lo, s_hi, t_lo, t_hi = rect
    return [complex(s_lo, t_lo), complex(s_hi, t_lo), complex(s_hi, t_hi), complex(s_lo, t_hi)]


def _nudged(rect: Rect, k: int) -> Rect:
    # vertical edges move in, horizontal edges move out
    d = NUDGE * k
    return (rect[0] + d, rect[1] - d, rect[2] - d, rect[3] + d)


def _winding_once(fn_id: str, rect: Rect, spec, param, max_workers) -> float:
    c = _corners(rect)
    edges = [(c[k], c[(k + 1) % 4]) for k in range(4)]
    phases = run_concurrent(lambda e: _edge_phase(fn_id, e[0], e[1], spec, param), edges, max_workers,
                            label=f"{fn_id} contour edges")
    return sum(phases) / (2 * np.pi)


def winding_count(fn_id: str, rect: Rect, spec: Optional[CounterexampleSpec] = None,
                  param: Optional[float] = None, max_workers: Optional[int] = None) -> CountReport:
    """Zeros minus poles of fn_id inside rect = (sigma_lo, sigma_hi, t_lo, t_hi)."""
    rect = tuple(float(x) for x in rect)
    validate_window(rect)
    started = time.time()
    value = float("nan")
    for k in range(MAX_NUDGES + 1):
        current = _nudged(rect, k)
        if current[0] >= current[1]:
            break
        try:
            value = _winding_once(fn_id, current, spec, param, max_workers)
        except BoundarySingularityError as e:
            logging.warning(f"winding {fn_id} on {current}: {e}; nudging boundary")
            continue
        if abs(value - round(value)) <= INTEGER_TOL:
            winding = int(round(value))
            logging.info(f"winding({fn_id}, {current}) = {winding} ({value:.4f}) in {time.time() - started:.2f}s")
            return CountReport(fn_id, current, winding, details={"raw_winding": value, "nudges": k})
        logging.warning(f"winding {fn_id} on {current} = {value:.4f} is not an integer; nudging boundary")
    if math.isnan(value):
        raise BoundarySingularityError(f"{fn_id}: boundary of {rect} stays singular after {MAX_NUDGES} nudges")
    raise NonIntegerWindingError(value, rect)


def real_axis_correction(fn_id: str, sigma_lo: float, sigma_hi: float, param: Optional[float] = None) -> Dict[str, object]:
    """Real zeros and poles inside (sigma_lo, sigma_hi): what a strip count picks up on the real axis."""
    if fn_id not in _REAL_POLES:
        raise DomainError(f"no real-axis pole data for {fn_id!r}")
    poles = [p for p in _REAL_POLES[fn_id] if sigma_lo < p < sigma_hi]
    zeros = [z for z in real_zeros(fn_id, sigma_lo, sigma_hi, param=param)
             if all(abs(z - p) > 1e-6 for p in _REAL_POLES[fn_id])]
    return {"zeros": zeros, "poles": poles, "correction": len(zeros) - len(poles)}


# ------------------------------------------------------------------ counting laws

def main_term(T: float, which: str = "xi1_2s", y: Optional[float] = None) -> float:
    """Zero-counting main term for xi1(2s) (and for a0(y, s), which adds (2/pi) T log y)."""
    if T < 2:
        raise DomainError(f"main_term needs T >= 2, got {T}")
    base = (T / math.pi) * math.log(T) - (T / math.pi) * (math.log(math.pi) + 1.0)
    if which == "xi1_2s":
        return base
    if which == "a0_y":
        if y is None or y < 1:
            raise DomainError(f"a0_y main term needs y >= 1, got {y}")
        return base + (2.0 / math.pi) * math.log(y) * T
    raise DomainError(f"unknown main term {which!r}")


def deviation_bound(T: float) -> float:
    return 10.0 + 2.0 * math.log(T)


def _table_count(zeros: Sequence, T: float) -> int:
    return sum(1 for z in zeros if (z.t if isinstance(z, ZeroRecord) else float(z)) <= T)


def count_compare(fn_id: str, T: float, y: Optional[float] = None, tables: Optional[Dict[str, Sequence]] = None,
                  max_workers: Optional[int] = None) -> CountReport:
    """Actual zero count up to height T against the main term.

    Line functions are counted from zero tables (computed when not supplied);
    a0_y is counted by winding over sigma in [-2, 3], real-axis terms removed.
    """
    if fn_id not in COUNT_FUNCTIONS:
        raise DomainError(f"count_compare supports {COUNT_FUNCTIONS}, got {fn_id!r}")
    if fn_id == "a0_y":
        rect = (-2.0, 3.0, 0.0, float(T))
        report = winding_count("a0", rect, param=y, max_workers=max_workers)
        real = real_axis_correction("a0", report.rect[0], report.rect[1], param=y)
        count = report.winding - real["correction"]
        formula = main_term(T, "a0_y", y)
        report.details["real_axis"] = real
    else:
        if T > LINE_T_MAX:
            raise DomainError(f"zero tables stop at t = {LINE_T_MAX}, got T = {T}")
        table_id = "zeta_line" if fn_id == "xi1_2s" else fn_id
        table = (tables or {}).get(table_id)
        if table is None:
            table = line_zeros(table_id, T, max_workers=max_workers)
        count = _table_count(table, T)
        formula = main_term(T, "xi1_2s")
        report = CountReport(fn_id, (0.5, 0.5, 0.0, float(T)), count)

    report.count = count
    report.formula_value = formula
    report.deviation = count - formula
    report.details["bound"] = deviation_bound(T)
    report.details["within_bound"] = bool(abs(report.deviation) <= deviation_bound(T))
    if not report.details["within_bound"]:
        logging.warning(f"{fn_id}: count {count} deviates from main term {formula:.2f} by {report.deviation:.2f}")
    return report


def count_sweep(fn_id: str, T_values: Sequence[float], y: Optional[float] = None,
                max_workers: Optional[int] = None) -> pd.DataFrame:
    """count_compare at each T, sharing one zero table; one row per T."""
    tables = {}
    if fn_id != "a0_y":
        table_id = "zeta_line" if fn_id == "xi1_2s" else fn_id
        tables[table_id] = line_zeros(table_id, max(T_values), max_workers=max_workers)
    rows = []
    for T in T_values:
        report = count_compare(fn_id, T, y, tables, max_workers)
        rows.append({
            "fn_id": fn_id,
            "T": T,
            "y": y,
            "count": report.count,
            "formula_value": report.formula_value,
            "deviation": report.deviation,
            "bound": report.details["bound"],
            "within_bound": report.details["within_bound"],
        })
    return pd.DataFrame(rows, columns=SUMMARY_COLUMNS)


# ------------------------------------------------------------------ y*

def a0_half(y: float) -> float:
    """a0(y, 1/2) = sqrt(y) (gamma - log 4 pi + log y)."""
    return math.sqrt(y) * (EULER_GAMMA - math.log(4 * math.pi) + math.log(y))


def y_star_scan(y: float, step: float = 1e-3) -> List[float]:
    """Real zeros of a0(y, sigma) in (0, 1): none up to y*, a symmetric pair beyond it."""
    if y < 1:
        raise DomainError(f"y_star_scan needs y >= 1, got {y}")

    def f(x: float) -> float:
        if x == 0.5:
            return a0_half(y)
        return float(evaluate_array("a0", np.array([complex(x)]), param=y)[0][0].real)

    grid = np.append(np.arange(step, 0.5, step), 0.5)
    values, _ = evaluate_array("a0", grid[:-1].astype(complex), param=y)
    re = np.append(values.real, a0_half(y))
    roots = []
    for k in range(len(grid) - 1):
        if re[k] * re[k + 1] < 0:
            roots.append(float(optimize.brentq(f, grid[k], grid[k + 1], xtol=1e-14)))
    # a0(y, s) is even under s -> 1 - s
    mirrored = sorted(set(roots) | {1.0 - r for r in roots})
    logging.info(f"y = {y}: {len(mirrored)} real zeros of a0 in (0, 1)")
    return mirrored
