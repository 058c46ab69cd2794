"""Data and SVG renderings for the six contour / argument figures."""
import io
import logging
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import matplotlib
import numpy as np
import pandas as pd
from matplotlib.figure import Figure

from src.combinators import CounterexampleSpec
from src.critline import ZETA_LINE_STEP, arg_u_profile, scan_zeta_line
from src.errors import DomainError
from src.planar import (ContourPolyline, GridField, critical_line_marks, extract_contours,
                        grid_eval, region_mask, tiled_derivative_zeros)
from src.utils import CODE_VERSION, atomic_write, write_csv

matplotlib.rcParams["svg.hashsalt"] = "critline"
matplotlib.rcParams["svg.fonttype"] = "none"

FIGURE_NUMBERS = (1, 2, 3, 4, 5, 6)
DEFAULT_RESOLUTION = 256

# V zero/pole blue/yellow, U zero/pole black/red
COLORS = {"v_zero": "blue", "v_pole": "gold", "u_zero": "black", "u_pole": "red",
          "xi_2s": "green", "xi_2s_1": "saddlebrown", "region_zero": "black", "region_pole": "red"}
ARG_COLORS = {0.0: "red", np.pi: "green", np.pi / 2: "cyan", -np.pi / 2: "magenta"}

WINDOW_UNIT_LOOPS = (0.0, 1.0, 415.0, 421.0)
WINDOW_ZERO_518 = (-0.5, 1.5, 416.0, 419.5)
WINDOW_ZERO_1495 = (-0.5, 1.5, 986.5, 989.5)
WINDOW_OFFAXIS = (0.0, 1.0, 416.5, 421.0)
OFFAXIS_SPEC = CounterexampleSpec(0.05, 418.85)
PROFILE_RANGE = (0.0, 30.0)
CONTOUR_COLUMNS = ["set", "contour", "level", "of", "closed", "sigma", "t"]


def _odd(n: int) -> int:
    return n | 1


def _save_svg(fig, path: Path, config_hash: str) -> Path:
    buf = io.StringIO()
    fig.savefig(buf, format="svg", metadata={"Date": None})
    text = buf.getvalue()
    comment = f"<!-- critline version={CODE_VERSION} config={config_hash} -->\n"
    head, sep, rest = text.partition("?>\n")
    text = head + sep + comment + rest if sep else comment + text
    atomic_write(path, text)
    logging.info(f"Wrote figure to {path}")
    return path


def contour_rows(name: str, contours: Sequence[ContourPolyline]) -> List[Dict[str, object]]:
    rows = []
    for k, c in enumerate(contours):
        for z in c.vertices:
            rows.append({"set": name, "contour": k, "level": c.level, "of": c.of, "closed": c.closed,
                         "sigma": z.real, "t": z.imag})
    return rows


def _mark_rows(marks: Dict[str, np.ndarray]) -> List[Dict[str, object]]:
    return [{"kind": kind, "sigma": z.real, "t": z.imag} for kind, pts in marks.items() for z in pts]


def _plot_contours(ax, contours: Sequence[ContourPolyline], **style) -> None:
    for c in contours:
        ax.plot(c.vertices.real, c.vertices.imag, **style)


def _dots(ax, marks: Dict[str, np.ndarray], kinds: Sequence[str], size: float = 14) -> None:
    for kind in kinds:
        pts = marks.get(kind, np.array([]))
        if len(pts):
            ax.scatter(np.real(pts), np.imag(pts), s=size, color=COLORS[kind], zorder=5, label=kind.replace("_", " "))


def _frame(ax, window: Tuple[float, float, float, float]) -> None:
    ax.set_xlim(window[0], window[1])
    ax.set_ylim(window[2], window[3])
    ax.set_xlabel("sigma")
    ax.set_ylabel("t")


def _marks_for(window, spec: Optional[CounterexampleSpec] = None) -> Dict[str, np.ndarray]:
    """Critical-line V marks plus U zeros/poles at 3/4 + it_k and 1/4 + it_k."""
    line = critical_line_marks(window[2], window[3], spec)
    ordinates, _ = scan_zeta_line((window[2], window[3]), ZETA_LINE_STEP)
    marks = {
        "v_zero": 0.5 + 1j * line["v_zero"],
        "v_pole": 0.5 + 1j * line["v_pole"],
        "u_zero": 0.75 + 1j * ordinates,
        "u_pole": 0.25 + 1j * ordinates,
        # zeros of xi1(2s) and xi1(2s - 1) sit at the U poles and zeros
        "xi_2s": 0.25 + 1j * ordinates,
        "xi_2s_1": 0.75 + 1j * ordinates,
    }
    if spec is not None:
        marks["u_zero"] = np.concatenate([marks["u_zero"], spec.zeros()])
        marks["u_pole"] = np.concatenate([marks["u_pole"], spec.poles()])
    return marks


def _field(window, resolution: int, spec=None, max_workers=None) -> GridField:
    fn = "U_oa" if spec is not None else "U"
    return grid_eval(window, _odd(resolution), _odd(resolution), fn, spec, max_workers=max_workers)


def unit_loops(out_dir: Path, config_hash: str, resolution: int = DEFAULT_RESOLUTION,
               max_workers: Optional[int] = None) -> List[Path]:
    """|W| = 1 (solid) and |V| = 1 (dashed) with V and U zeros and poles."""
    window = WINDOW_UNIT_LOOPS
    field_ = _field(window, resolution, max_workers=max_workers)
    w_loops = extract_contours(field_, 1.0, "absW")
    v_loops = extract_contours(field_, 1.0, "absV")
    marks = _marks_for(window)

    fig = Figure(figsize=(4, 6))
    ax = fig.subplots()
    _plot_contours(ax, w_loops, color="black", linewidth=0.8)
    _plot_contours(ax, v_loops, color="black", linewidth=0.8, linestyle="--")
    _dots(ax, marks, ("v_zero", "v_pole", "u_zero", "u_pole"))
    _frame(ax, window)

    data = pd.DataFrame(contour_rows("absW=1", w_loops) + contour_rows("absV=1", v_loops), columns=CONTOUR_COLUMNS)
    return [write_csv(data, out_dir / "figure1_contours.csv", config_hash),
            write_csv(pd.DataFrame(_mark_rows(marks)), out_dir / "figure1_marks.csv", config_hash),
            _save_svg(fig, out_dir / "figure1.svg", config_hash)]


def level_regions(number: int, window, out_dir: Path, config_hash: str, resolution: int = DEFAULT_RESOLUTION,
                  levels: Optional[Sequence[float]] = None, max_workers: Optional[int] = None) -> List[Path]:
    """|V| <= 1 regions (left) and constant-modulus contours through the derivative-zero levels (right)."""
    field_ = _field(window, resolution, max_workers=max_workers)
    marks = _marks_for(window)
    dzs = tiled_derivative_zeros(window, "plain", max_workers=max_workers)
    if levels is None:
        levels = [0.9, 1.0] + [round(z.absV + d, 6) for z in dzs for d in (-1e-3, 1e-3)]
    contours = {level: extract_contours(field_, level, "absV") for level in levels}

    fig = Figure(figsize=(8, 6))
    left, right = fig.subplots(1, 2)
    mask = region_mask(field_, 1.0)
    left.contourf(field_.sigma, field_.t, mask.astype(float), levels=[0.5, 1.5], colors=["#9ecae1"])
    _dots(left, {"region_zero": marks["v_zero"], "region_pole": marks["v_pole"], "xi_2s": marks["xi_2s"],
                 "xi_2s_1": marks["xi_2s_1"]}, ("region_zero", "region_pole", "xi_2s", "xi_2s_1"))
    _frame(left, window)
    for level, cs in contours.items():
        color = "red" if level == 1.0 else ("green" if level > 1.0 else "blue")
        _plot_contours(right, cs, color=color, linewidth=0.7)
    right.scatter([z.location.real for z in dzs], [z.location.imag for z in dzs], s=14, color="black", zorder=5)
    _frame(right, window)

    rows = []
    for level, cs in contours.items():
        rows.extend(contour_rows(f"absV={level}", cs))
    dz_frame = pd.DataFrame([{"sigma": z.location.real, "t": z.location.imag, "absV": z.absV} for z in dzs],
                            columns=["sigma", "t", "absV"])
    return [write_csv(pd.DataFrame(rows, columns=CONTOUR_COLUMNS), out_dir / f"figure{number}_contours.csv", config_hash),
            write_csv(dz_frame, out_dir / f"figure{number}_derivative_zeros.csv", config_hash),
            _save_svg(fig, out_dir / f"figure{number}.svg", config_hash)]


def argument_lines(out_dir: Path, config_hash: str, resolution: int = DEFAULT_RESOLUTION,
                   max_workers: Optional[int] = None) -> List[Path]:
    """|W| = 1 in black with the constant-argument lines of W at 0, +-pi, pi/2, -pi/2."""
    window = WINDOW_UNIT_LOOPS
    field_ = _field(window, resolution, max_workers=max_workers)
    w_loops = extract_contours(field_, 1.0, "absW")
    u = field_.values
    with np.errstate(all="ignore"):
        w = np.where(np.isinf(u), 1j, (1 + 1j * u) / (u + 1j))
    marks = _marks_for(window)
    dzs = tiled_derivative_zeros(window, "plain", max_workers=max_workers)

    fig = Figure(figsize=(4, 6))
    ax = fig.subplots()
    _plot_contours(ax, w_loops, color="black", linewidth=0.8)
    for phase, color in ARG_COLORS.items():
        rotated = w * np.exp(-1j * phase)
        # Im = 0 on the half where Re > 0 is the ray arg W = phase
        im = np.ma.masked_where(~np.isfinite(rotated) | (rotated.real <= 0), rotated.imag)
        ax.contour(field_.sigma, field_.t, im, levels=[0.0], colors=[color], linewidths=0.7)
    _dots(ax, marks, ("v_zero", "v_pole", "u_zero"))
    ax.scatter([z.location.real for z in dzs], [z.location.imag for z in dzs], s=14, color="black",
               marker="x", zorder=5)
    _frame(ax, window)

    return [write_csv(pd.DataFrame(contour_rows("absW=1", w_loops), columns=CONTOUR_COLUMNS), out_dir / "figure4_contours.csv", config_hash),
            write_csv(pd.DataFrame(_mark_rows(marks)), out_dir / "figure4_marks.csv", config_hash),
            _save_svg(fig, out_dir / "figure4.svg", config_hash)]


def argument_profiles(out_dir: Path, config_hash: str, t_range: Tuple[float, float] = PROFILE_RANGE) -> List[Path]:
    """arg U(sigma + it) for sigma = 1/2 against 3/4 (left) and 0.753 (right)."""
    profiles = {}
    reports = {}
    for sigma in (0.5, 0.75, 0.753):
        profiles[sigma], reports[sigma] = arg_u_profile(sigma, t_range[0], t_range[1])

    fig = Figure(figsize=(8, 4))
    axes = fig.subplots(1, 2)
    for ax, other in zip(axes, (0.75, 0.753)):
        ax.plot(profiles[0.5]["t"], profiles[0.5]["arg_u"], color="blue", linewidth=0.8)
        ax.plot(profiles[other]["t"], profiles[other]["arg_u"], color="red", linewidth=0.8)
        ax.set_xlabel("t")
        ax.set_ylabel("arg U")
        ax.set_title(f"sigma = 1/2, {other}")

    frames = [df.assign(sigma=sigma) for sigma, df in profiles.items()]
    data = pd.concat(frames, ignore_index=True)[["sigma", "t", "arg_u"]]
    for sigma, report in reports.items():
        logging.info(f"arg U at sigma = {sigma}: {report}")
    return [write_csv(data, out_dir / "figure5_profiles.csv", config_hash),
            _save_svg(fig, out_dir / "figure5.svg", config_hash)]


def offaxis_loops(out_dir: Path, config_hash: str, resolution: int = DEFAULT_RESOLUTION,
                  spec: CounterexampleSpec = OFFAXIS_SPEC, max_workers: Optional[int] = None) -> List[Path]:
    """|W_oa| = 1 (blue) and |V_oa| = 1 (red) with the planted zero/pole lines and the new derivative zeros."""
    window = WINDOW_OFFAXIS
    field_ = _field(window, resolution, spec, max_workers)
    w_loops = extract_contours(field_, 1.0, "absW")
    v_loops = extract_contours(field_, 1.0, "absV")
    near = (window[0], window[1], spec.t_star - 1.5, spec.t_star + 1.5)
    dzs = tiled_derivative_zeros(near, "oa", spec, max_workers=max_workers)

    fig = Figure(figsize=(4, 6))
    ax = fig.subplots()
    for sigma in sorted({0.25 - spec.delta, 0.25 + spec.delta, 0.75 - spec.delta, 0.75 + spec.delta}):
        ax.axvline(sigma, color="black", linewidth=0.5)
    _plot_contours(ax, w_loops, color="blue", linewidth=0.8)
    _plot_contours(ax, v_loops, color="red", linewidth=0.8)
    ax.scatter([z.location.real for z in dzs], [z.location.imag for z in dzs], s=14, color="black", zorder=5)
    _frame(ax, window)

    data = pd.DataFrame(contour_rows("absW_oa=1", w_loops) + contour_rows("absV_oa=1", v_loops),
                        columns=CONTOUR_COLUMNS)
    dz_frame = pd.DataFrame([{"sigma": z.location.real, "t": z.location.imag, "absV": z.absV} for z in dzs],
                            columns=["sigma", "t", "absV"])
    return [write_csv(data, out_dir / "figure6_contours.csv", config_hash),
            write_csv(dz_frame, out_dir / "figure6_derivative_zeros.csv", config_hash),
            _save_svg(fig, out_dir / "figure6.svg", config_hash)]


def render(number: int, out_dir: Path, config_hash: str, resolution: int = DEFAULT_RESOLUTION,
           levels: Optional[Sequence[float]] = None, max_workers: Optional[int] = None) -> List[Path]:
    """Regenerate figure `number`; returns every file written."""
    out_dir = Path(out_dir)
    if number == 1:
        return unit_loops(out_dir, config_hash, resolution, max_workers)
    if number == 2:
        return level_regions(2, WINDOW_ZERO_518, out_dir, config_hash, resolution, levels, max_workers)
    if number == 3:
        return level_regions(3, WINDOW_ZERO_1495, out_dir, config_hash, resolution, levels, max_workers)
    if number == 4:
        return argument_lines(out_dir, config_hash, resolution, max_workers)
    if number == 5:
        return argument_profiles(out_dir, config_hash)
    if number == 6:
        return offaxis_loops(out_dir, config_hash, resolution, max_workers=max_workers)
    raise DomainError(f"figure number must be one of {FIGURE_NUMBERS}, got {number}")
