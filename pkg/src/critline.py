"""Critical-line work: the continuous phase theta1(t) = arg xi1(1 + 2it),
zero tables for T+, T-, xi1(2s - 1/2) and a0(y, s), interlacing, and the
positional / translation experiments on those tables.
"""
import logging
import math
import time
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from src.combinators import CounterexampleSpec, evaluate_array
from src.complexfn import LOG_PI, log_gamma_array, log_xi1_array, zeta_array
from src.errors import DomainError, InsufficientTableError, MissedZeroError, PhaseTrackError
from src.workers import run_concurrent

T_MAX = 1050.0
LINE_T_MAX = 1000.0
DEFAULT_STEP = 0.05
PANEL_LENGTH = 25.0
MIN_STEP = 1e-9
T_START = 1e-6
BISECT_WIDTH = 1e-6
SECANT_WIDTH = 1e-8
INTERLACE_START = 7.6
ZETA_LINE_STEP = 0.02

LINE_FUNCTIONS = ("Tplus", "Tminus", "zeta_line", "a0_y", "U_offline")
POSITIONAL_MODES = ("after_Tplus", "between_Tminus")
POSITIONAL_MAX_N = 1500


@dataclass
class PhaseTrack:
    t: np.ndarray
    theta1: np.ndarray
    max_step: float

    @property
    def samples(self) -> List[Tuple[float, float]]:
        return list(zip(self.t.tolist(), self.theta1.tolist()))

    def derivative(self) -> np.ndarray:
        return np.gradient(self.theta1, self.t)


@dataclass(frozen=True)
class ZeroRecord:
    function_id: str
    index: int
    location: complex
    residual: float
    width: float

    @property
    def t(self) -> float:
        return self.location.imag


@dataclass
class PositionalReport:
    n_tested: int
    n_failures: int
    failure_indices: List[int]
    mode: str
    t0: float = 0.0

    @property
    def failure_rate(self) -> float:
        return self.n_failures / self.n_tested if self.n_tested else 0.0


# ------------------------------------------------------------------ phase

def theta1_raw(t) -> np.ndarray:
    """Im log xi1(1 + 2it): theta1 up to a multiple of 2 pi."""
    t = np.asarray(t, dtype=float)
    logs, _, _ = log_xi1_array(1.0 + 2j * t)
    return logs.imag


def _wrap(delta: np.ndarray) -> np.ndarray:
    return np.remainder(delta + np.pi, 2 * np.pi) - np.pi


def _track_panel(bounds: Tuple[float, float], max_step: float) -> Tuple[np.ndarray, np.ndarray]:
    a, b = bounds
    n = max(2, int(math.ceil((b - a) / max_step)) + 1)
    t = np.linspace(a, b, n)
    raw = theta1_raw(t)
    while True:
        jumps = np.abs(_wrap(np.diff(raw))) >= np.pi / 2
        if not jumps.any():
            break
        gaps = np.diff(t)[jumps]
        if gaps.min() < MIN_STEP:
            where = t[:-1][jumps][np.argmin(gaps)]
            raise PhaseTrackError(f"phase step underflow near t = {where:.9f}")
        mids = t[:-1][jumps] + 0.5 * gaps
        t = np.concatenate([t, mids])
        order = np.argsort(t)
        raw = np.concatenate([raw, theta1_raw(mids)])[order]
        t = t[order]
    theta = raw[0] + np.concatenate([[0.0], np.cumsum(_wrap(np.diff(raw)))])
    return t, theta


def track_phase(t_lo: float, t_hi: float, max_step: float = DEFAULT_STEP,
                max_workers: Optional[int] = None) -> PhaseTrack:
    """Continuous theta1 on [t_lo, t_hi], sampled so that no step moves it by pi/2."""
    if not (0 <= t_lo < t_hi <= T_MAX):
        raise DomainError(f"need 0 <= t_lo < t_hi <= {T_MAX}, got [{t_lo}, {t_hi}]")
    start = max(t_lo, T_START)
    edges = np.append(np.arange(start, t_hi, PANEL_LENGTH), t_hi)
    panels = list(zip(edges[:-1], edges[1:]))

    started = time.time()
    pieces = run_concurrent(lambda p: _track_panel(p, max_step), panels, max_workers, label="phase panels")

    ts, thetas = [pieces[0][0]], [pieces[0][1]]
    for t, theta in pieces[1:]:
        # panels share their end points; shift by the 2 pi multiple that matches them
        offset = 2 * np.pi * np.round((thetas[-1][-1] - theta[0]) / (2 * np.pi))
        ts.append(t[1:])
        thetas.append(theta[1:] + offset)
    track = PhaseTrack(np.concatenate(ts), np.concatenate(thetas), max_step)
    logging.info(f"Tracked theta1 on [{t_lo}, {t_hi}] with {len(track.t)} samples "
                 f"in {time.time() - started:.2f}s")
    return track


def ki_theta(track: PhaseTrack) -> np.ndarray:
    """Ki's theta(t), normalised so theta(0) = pi."""
    return track.theta1 + 1.5 * np.pi


def ki_lemma_report(track: PhaseTrack, grid_step: float = 1e-2) -> Dict[str, object]:
    """Sampled checks of the four properties of Ki's theta."""
    theta = ki_theta(track)
    t = track.t
    report: Dict[str, object] = {"theta_at_start": float(theta[0]), "t_start": float(t[0])}
    report["min_theta"] = float(theta.min())
    report["above_half_pi"] = bool(theta.min() > np.pi / 2)

    if t[0] < 7.0:
        fine = np.arange(max(t[0], grid_step), min(7.0, t[-1]), grid_step)
        curve = np.interp(fine, t, theta)
        second = np.diff(curve, 2)
        report["convex_fraction"] = float(np.mean(second >= -1e-9)) if second.size else None

    tail = t >= 7.0
    if tail.sum() > 2:
        report["increasing_after_7"] = bool(np.all(np.diff(theta[tail]) > 0))
    late = t > 50.0
    if late.any():
        ratio = track.derivative()[late] / np.log(t[late])
        report["slope_ratio_range"] = (float(ratio.min()), float(ratio.max()))
    return report


def arg_u_profile(sigma: float, t_lo: float, t_hi: float, step: float = 0.01) -> Tuple[pd.DataFrame, Dict[str, object]]:
    """Continuous arg U(sigma + it) and how monotone it is."""
    t = np.arange(t_lo, t_hi + step / 2, step)
    u, singular = evaluate_array("U", sigma + 1j * t)
    arg = np.unwrap(np.angle(np.where(singular, 1.0, u)))
    diffs = np.diff(arg)
    report = {
        "sigma": sigma,
        "monotone_decreasing": bool(np.all(diffs < 0)),
        "increasing_fraction": float(np.mean(diffs > 0)),
        "singular_samples": int(singular.sum()),
    }
    return pd.DataFrame({"t": t, "arg_u": arg}), report


# ------------------------------------------------------------------ refinement

def refine_brackets(h: Callable[[np.ndarray], np.ndarray], lo: np.ndarray, hi: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Vectorised bisection to BISECT_WIDTH then secant to SECANT_WIDTH."""
    lo = lo.astype(float).copy()
    hi = hi.astype(float).copy()
    h_lo = h(lo)
    while np.max(hi - lo, initial=0.0) > BISECT_WIDTH:
        mid = 0.5 * (lo + hi)
        h_mid = h(mid)
        left = np.sign(h_mid) == np.sign(h_lo)
        lo = np.where(left, mid, lo)
        h_lo = np.where(left, h_mid, h_lo)
        hi = np.where(left, hi, mid)

    x0, x1 = lo, hi
    f0, f1 = h_lo, h(hi)
    width = hi - lo
    for _ in range(6):
        denom = f1 - f0
        ok = np.abs(denom) > 0
        x2 = np.where(ok, x1 - f1 * (x1 - x0) / np.where(ok, denom, 1.0), x1)
        # secant must stay inside the bisection bracket
        x2 = np.clip(x2, lo, hi)
        width = np.abs(x2 - x1)
        x0, f0 = x1, f1
        x1, f1 = x2, h(x2)
        if np.max(width, initial=0.0) < SECANT_WIDTH:
            break
    return x1, width


def _phase_zeros(function_id: str, track: PhaseTrack, offset: float,
                 extra_phase: Optional[Callable[[np.ndarray], np.ndarray]] = None) -> List[ZeroRecord]:
    t = track.t
    theta = track.theta1 + (extra_phase(t) if extra_phase else 0.0)
    if np.any(np.abs(np.diff(theta)) >= np.pi / 2):
        raise PhaseTrackError(f"{function_id}: phase step too coarse for this track")
    level = np.floor((theta - offset) / np.pi)
    idx = np.nonzero(level[1:] != level[:-1])[0]

    def h(x):
        phase = theta1_raw(x) + (extra_phase(x) if extra_phase else 0.0)
        return np.sin(phase - offset)

    roots, widths = refine_brackets(h, t[idx], t[idx + 1])
    residuals = np.abs(h(roots))
    records = [ZeroRecord(function_id, k + 1, complex(0.5, r), float(res), float(w))
               for k, (r, res, w) in enumerate(zip(roots, residuals, widths))]
    _check_unit_counts(function_id, roots, t, level, idx)
    return records


def _check_unit_counts(function_id, roots, t, level, idx) -> None:
    """Per unit t-interval, the refined roots must match the level crossings."""
    predicted = t[idx + 1]
    bins = np.arange(math.floor(t[0]), math.ceil(t[-1]) + 1)
    found, _ = np.histogram(roots, bins)
    expected, _ = np.histogram(predicted, bins)
    bad = np.nonzero(found != expected)[0]
    # a root can sit on the far side of a bin edge from its bracket end
    for k in bad:
        lo, hi = bins[max(k - 1, 0)], bins[min(k + 2, len(bins) - 1)]
        f = np.sum((roots >= lo) & (roots < hi))
        e = np.sum((predicted >= lo) & (predicted < hi))
        if abs(f - e) > 1:
            raise MissedZeroError(function_id, bins[k], bins[k + 1], int(expected[k]), int(found[k]))


def hardy_theta(u) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    return log_gamma_array(0.25 + 0.5j * u).imag - 0.5 * u * LOG_PI


def hardy_z(u) -> np.ndarray:
    """Z(u) = exp(i vartheta(u)) zeta(1/2 + iu), real for real u."""
    u = np.asarray(u, dtype=float)
    return (np.exp(1j * hardy_theta(u)) * zeta_array(0.5 + 1j * u)).real


def scan_zeta_line(bounds: Tuple[float, float], step: float) -> Tuple[np.ndarray, np.ndarray]:
    """Zeros of Z(2t) for t in bounds, in t units (xi1(2s) vanishes at 1/4 + it)."""
    a, b = bounds
    t = np.linspace(a, b, max(2, int(math.ceil((b - a) / step)) + 1))
    z = hardy_z(2.0 * t)
    idx = np.nonzero(np.sign(z[:-1]) * np.sign(z[1:]) < 0)[0]
    if idx.size == 0:
        return np.array([]), np.array([])
    roots, widths = refine_brackets(lambda x: hardy_z(2.0 * x), t[idx], t[idx + 1])
    return roots, widths


def _zeta_line_expected(a: float, b: float) -> float:
    th = hardy_theta(np.array([2.0 * a, 2.0 * b]))
    return (th[1] - th[0]) / np.pi


def _zeta_line_zeros(T_max: float, max_workers: Optional[int]) -> List[ZeroRecord]:
    edges = np.append(np.arange(T_START, T_max, PANEL_LENGTH), T_max)
    panels = list(zip(edges[:-1], edges[1:]))
    pieces = run_concurrent(lambda p: scan_zeta_line(p, ZETA_LINE_STEP), panels, max_workers,
                            label="zeta-line panels")

    roots_all, widths_all = [], []
    for (a, b), (roots, widths) in zip(panels, pieces):
        for lo in np.arange(math.floor(a), b, 1.0):
            hi = min(lo + 1.0, b)
            lo_c = max(lo, a)
            if hi - lo_c < 0.5:
                continue
            found = int(np.sum((roots >= lo_c) & (roots < hi)))
            expected = _zeta_line_expected(lo_c, hi)
            if abs(found - expected) > 3:
                logging.warning(f"zeta_line: {found} zeros in [{lo_c}, {hi}], expected ~{expected:.2f}; rescanning")
                fine_roots, fine_widths = scan_zeta_line((a, b), ZETA_LINE_STEP / 8)
                refound = int(np.sum((fine_roots >= lo_c) & (fine_roots < hi)))
                if abs(refound - expected) > 3:
                    raise MissedZeroError("zeta_line", lo_c, hi, int(round(expected)), refound)
                roots, widths = fine_roots, fine_widths
        roots_all.append(roots)
        widths_all.append(widths)

    roots = np.concatenate(roots_all)
    widths = np.concatenate(widths_all)
    order = np.argsort(roots)
    roots, widths = roots[order], widths[order]
    # global count against vartheta(u)/pi + 1 with |S(u)| < 2.5 as slack
    expected_total = hardy_theta(np.array([2.0 * T_max]))[0] / np.pi + 1.0
    if abs(len(roots) - expected_total) > 2.5:
        raise MissedZeroError("zeta_line", 0.0, T_max, int(round(expected_total)), len(roots))
    residuals = np.abs(hardy_z(2.0 * roots))
    return [ZeroRecord("zeta_line", k + 1, complex(0.5, r), float(res), float(w))
            for k, (r, res, w) in enumerate(zip(roots, residuals, widths))]


def _offline_zeros(T_max: float, spec: Optional[CounterexampleSpec]) -> List[ZeroRecord]:
    if spec is None:
        raise DomainError("U_offline zeros need a CounterexampleSpec")
    planted = sorted((z for z in spec.zeros() if 0 < z.imag <= T_max), key=lambda z: (z.imag, z.real))
    records = []
    for k, z in enumerate(planted, start=1):
        u, _ = evaluate_array("U_oa", np.array([z]), spec)
        records.append(ZeroRecord("U_offline", k, complex(z), float(abs(u[0])), 0.0))
    return records


def line_zeros(function_id: str, T_max: float, y: Optional[float] = None,
               spec: Optional[CounterexampleSpec] = None, track: Optional[PhaseTrack] = None,
               max_workers: Optional[int] = None) -> List[ZeroRecord]:
    """Zero table with t <= T_max for one of the critical-line functions."""
    if function_id not in LINE_FUNCTIONS:
        raise DomainError(f"unknown line function {function_id!r}")
    if not 0 < T_max <= LINE_T_MAX:
        raise DomainError(f"T_max must lie in (0, {LINE_T_MAX}], got {T_max}")
    started = time.time()

    if function_id == "zeta_line":
        records = _zeta_line_zeros(T_max, max_workers)
    elif function_id == "U_offline":
        records = _offline_zeros(T_max, spec)
    else:
        if track is None or track.t[-1] < T_max:
            step = DEFAULT_STEP
            if function_id == "a0_y":
                if y is None or y < 1:
                    raise DomainError(f"a0_y needs y >= 1, got {y}")
                step = min(DEFAULT_STEP, 0.5 / max(math.log(y), 1e-12))
            track = track_phase(0.0, T_max, step, max_workers)
        track = _truncate(track, T_max)
        if function_id == "Tplus":
            records = _phase_zeros("Tplus", track, np.pi / 2)
        elif function_id == "Tminus":
            records = _phase_zeros("Tminus", track, 0.0)
        else:
            log_y = math.log(y)
            records = _phase_zeros("a0_y", track, np.pi / 2, lambda t: np.asarray(t) * log_y)

    logging.info(f"{function_id}: {len(records)} zeros up to t = {T_max} in {time.time() - started:.2f}s")
    return records


def _truncate(track: PhaseTrack, T_max: float) -> PhaseTrack:
    keep = track.t <= T_max
    return PhaseTrack(track.t[keep], track.theta1[keep], track.max_step)


# ------------------------------------------------------------------ experiments

ZeroList = Sequence[Union[ZeroRecord, float]]


def _ordinates(zeros: ZeroList) -> np.ndarray:
    return np.array([z.t if isinstance(z, ZeroRecord) else float(z) for z in zeros], dtype=float)


def interlacing_check(a: ZeroList, b: ZeroList, t_start: float = INTERLACE_START) -> List[Dict[str, object]]:
    """Places where the merged sequence of a and b fails to alternate.

    Ties count as violations.
    """
    ta, tb = _ordinates(a), _ordinates(b)
    ta, tb = ta[ta >= t_start], tb[tb >= t_start]
    merged = sorted([(t, "a") for t in ta] + [(t, "b") for t in tb])
    violations = []
    for (t0, s0), (t1, s1) in zip(merged, merged[1:]):
        if s0 == s1 or t0 == t1:
            violations.append({"t_prev": t0, "t_next": t1, "source": s0 if s0 == s1 else "tie"})
    return violations


def _positional_failures(zeta_t: np.ndarray, other_t: np.ndarray, mode: str, t0: float) -> np.ndarray:
    n = len(zeta_t)
    if mode == "after_Tplus":
        ok = zeta_t > other_t[:n] + t0
    else:
        bounds = np.concatenate([[0.0], other_t]) + t0
        ok = (bounds[:n] < zeta_t) & (zeta_t < bounds[1:n + 1])
    return np.nonzero(~ok)[0] + 1


def positional_experiment(n: int, mode: str, t0: float, zeta_zeros: ZeroList,
                          t_plus: Optional[ZeroList] = None,
                          t_minus: Optional[ZeroList] = None) -> PositionalReport:
    """Where critical-line zeta zeros sit relative to the (shifted) T+ or T- zeros."""
    if mode not in POSITIONAL_MODES:
        raise DomainError(f"mode must be one of {POSITIONAL_MODES}, got {mode!r}")
    if not 1 <= n <= POSITIONAL_MAX_N:
        raise DomainError(f"n must lie in [1, {POSITIONAL_MAX_N}], got {n}")
    zeta_t = _ordinates(zeta_zeros)
    other = t_plus if mode == "after_Tplus" else t_minus
    if other is None:
        raise InsufficientTableError(f"{mode} needs the {'T+' if mode == 'after_Tplus' else 'T-'} table")
    other_t = _ordinates(other)
    if len(zeta_t) < n or len(other_t) < n:
        raise InsufficientTableError(
            f"{mode}: need {n} zeros, have {len(zeta_t)} zeta-line and {len(other_t)} comparison zeros")
    failures = _positional_failures(zeta_t[:n], other_t, mode, t0)
    return PositionalReport(n, int(len(failures)), failures.tolist(), mode, t0)


def translation_scan(n: int, t0_grid: Sequence[float], zeta_zeros: ZeroList,
                     t_minus: ZeroList) -> Optional[Tuple[float, float]]:
    """Longest contiguous run of grid shifts with no between_Tminus failures."""
    grid = np.asarray(t0_grid, dtype=float)
    if grid.size and (grid.min() < -0.2 or grid.max() > 0.2):
        raise DomainError("translation grid must lie within [-0.2, 0.2]")
    clean = [positional_experiment(n, "between_Tminus", t0, zeta_zeros, t_minus=t_minus).n_failures == 0
             for t0 in grid]
    best: Optional[Tuple[int, int]] = None
    start = None
    for k, ok in enumerate(clean + [False]):
        if ok and start is None:
            start = k
        elif not ok and start is not None:
            if best is None or k - start > best[1] - best[0] + 1:
                best = (start, k - 1)
            start = None
    if best is None:
        return None
    return float(grid[best[0]]), float(grid[best[1]])
