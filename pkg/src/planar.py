"""Complex-plane fieldwork: grids of U/V/W, equimodular contours, quadrant
classification, derivative zeros of U, and the proposition / topology checks.
"""
import logging
import math
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import ndimage

from src.combinators import (CounterexampleSpec, evaluate_array, modulus_logderiv_array,
                             u_logderiv2_array, u_logderiv_array)
from src.complexfn import check_window
from src.critline import refine_brackets
from src.errors import DegeneratePointError, DomainError
from src.workers import run_concurrent

Window = Tuple[float, float, float, float]

MAX_GRID_POINTS = 10_000_000
MIN_GRID_SIDE = 16
SEED_GRID = 64
NEWTON_TOL = 1e-8
MERGE_TOL = 1e-6
LEVEL_TOL = 1e-7
MARK_TOL = 1e-4
CLASS_TOL = 1e-9
CONTOUR_GRID = 129
TOPOLOGY_GRID = 257
EXPAND_RETRIES = 3

# marks on the critical line: phase of U at which V is 0, infinite, +i, -i
_MARK_PHASES = {"v_zero": np.pi, "v_pole": 0.0, "v_plus_i": np.pi / 2, "v_minus_i": -np.pi / 2}


@dataclass
class GridField:
    window: Window
    nx: int
    ny: int
    values: np.ndarray
    fn_id: str
    poles: np.ndarray
    spec: Optional[CounterexampleSpec] = None

    @property
    def sigma(self) -> np.ndarray:
        return np.linspace(self.window[0], self.window[1], self.nx)

    @property
    def t(self) -> np.ndarray:
        return np.linspace(self.window[2], self.window[3], self.ny)

    def points(self) -> np.ndarray:
        return self.sigma[None, :] + 1j * self.t[:, None]


@dataclass
class ContourPolyline:
    level: float
    vertices: np.ndarray
    closed: bool
    of: str = "absV"
    enclosed: Dict[str, int] = field(default_factory=dict)

    def crossings_of_line(self, sigma: float = 0.5) -> int:
        side = np.sign(self.vertices.real - sigma)
        side = side[side != 0]
        return int(np.sum(side[1:] != side[:-1]))

    def distance_to(self, point: complex) -> float:
        return _distance_to_polyline(point, self.vertices)


@dataclass
class QuadrantClass:
    point: complex
    quadrant: str
    absV_vs_1: str
    absW_vs_1: str
    consistent: bool


@dataclass
class DerivativeZero:
    location: complex
    absV: float


@dataclass
class PropositionReport:
    window: Window
    variant: str
    derivative_zeros: List[DerivativeZero]
    p2_verdict: str
    p3_verdict: str
    p4_verdict: str
    witnesses: Dict[str, object] = field(default_factory=dict)

    @property
    def p3_p4_agree(self) -> bool:
        return self.p3_verdict == self.p4_verdict

    def to_dict(self) -> Dict[str, object]:
        return {
            "window": list(self.window),
            "variant": self.variant,
            "derivative_zeros": [
                {"sigma": z.location.real, "t": z.location.imag, "absV": z.absV} for z in self.derivative_zeros
            ],
            "p2": self.p2_verdict,
            "p3": self.p3_verdict,
            "p4": self.p4_verdict,
            "p3_p4_agree": self.p3_p4_agree,
            "witnesses": self.witnesses,
        }


# ------------------------------------------------------------------ grids

def validate_window(window: Window) -> None:
    s_lo, s_hi, t_lo, t_hi = window
    if not (s_lo < s_hi and t_lo < t_hi):
        raise DomainError(f"degenerate window {window}")
    corners = np.array([s_lo + 1j * t_lo, s_hi + 1j * t_hi, s_lo - 1j * t_hi, s_hi - 1j * t_lo])
    # both 2s and 2s - 1 feed xi1
    check_window(2.0 * corners)
    check_window(2.0 * corners - 1.0)


def grid_eval(window: Window, nx: int, ny: int, fn_id: str, spec: Optional[CounterexampleSpec] = None,
              param: Optional[float] = None, max_workers: Optional[int] = None) -> GridField:
    """Evaluate fn_id on an ny x nx grid, rows in parallel; pole cells are flagged."""
    validate_window(window)
    if nx < MIN_GRID_SIDE or ny < MIN_GRID_SIDE:
        raise DomainError(f"grid must be at least {MIN_GRID_SIDE}x{MIN_GRID_SIDE}, got {nx}x{ny}")
    if nx * ny > MAX_GRID_POINTS:
        raise DomainError(f"grid of {nx * ny} points exceeds {MAX_GRID_POINTS}")

    sigma = np.linspace(window[0], window[1], nx)
    t = np.linspace(window[2], window[3], ny)
    started = time.time()
    rows = run_concurrent(lambda tj: evaluate_array(fn_id, sigma + 1j * tj, spec, param), list(t),
                          max_workers, label=f"{fn_id} grid rows")
    values = np.vstack([r[0] for r in rows])
    poles = np.vstack([r[1] for r in rows])
    if poles.any():
        logging.warning(f"{fn_id} grid: {int(poles.sum())} pole cells flagged in {window}")
    logging.info(f"Evaluated {fn_id} on {nx}x{ny} grid in {time.time() - started:.2f}s")
    return GridField(window, nx, ny, values, fn_id, poles, spec)


def _modulus_values(values: np.ndarray, fn_id: str, of: str) -> np.ndarray:
    """|V| or |W| from a field of U, V or W values."""
    kind = fn_id[0]
    with np.errstate(all="ignore"):
        if kind == "U":
            u = values
        elif kind == "V":
            u = np.where(np.isinf(values), 1.0, (values - 1.0) / (values + 1.0))
        elif kind == "W":
            v = 1j * (1.0 + values) / (1.0 - values)
            u = (v - 1.0) / (v + 1.0)
        else:
            raise DomainError(f"contours need a U, V or W field, got {fn_id}")
        if of == "absV":
            out = np.abs((1.0 + u) / (1.0 - u))
            out = np.where(np.isinf(u), 1.0, out)
        else:
            out = np.abs((1.0 + 1j * u) / (u + 1j))
            out = np.where(np.isinf(u), 1.0, out)
    return out


def region_mask(field_: GridField, level: float = 1.0) -> np.ndarray:
    """Cells where |V| <= level."""
    return _modulus_values(field_.values, field_.fn_id, "absV") <= level


# ------------------------------------------------------------------ marching squares

def marching_squares(f: np.ndarray, x: np.ndarray, y: np.ndarray) -> List[Tuple[np.ndarray, bool]]:
    """Zero level set of f (ny x nx) as chained polylines (vertices, closed)."""
    f = np.where(np.isnan(f), np.inf, f)
    f = np.clip(f, -1e6, 1e6)
    pos = f > 0

    def point(edge):
        kind, j, i = edge
        if kind == "h":
            a, b = f[j, i], f[j, i + 1]
            w = a / (a - b)
            return complex(x[i] + w * (x[i + 1] - x[i]), y[j])
        a, b = f[j, i], f[j + 1, i]
        w = a / (a - b)
        return complex(x[i], y[j] + w * (y[j + 1] - y[j]))

    links: Dict[tuple, List[tuple]] = {}

    def link(e1, e2):
        links.setdefault(e1, []).append(e2)
        links.setdefault(e2, []).append(e1)

    corners_idx = pos[:-1, :-1].astype(int) + 2 * pos[:-1, 1:] + 4 * pos[1:, 1:] + 8 * pos[1:, :-1]
    for j, i in zip(*np.nonzero((corners_idx != 0) & (corners_idx != 15))):
        bottom, top = ("h", j, i), ("h", j + 1, i)
        left, right = ("v", j, i), ("v", j, i + 1)
        cut = []
        if pos[j, i] != pos[j, i + 1]:
            cut.append(bottom)
        if pos[j, i + 1] != pos[j + 1, i + 1]:
            cut.append(right)
        if pos[j + 1, i] != pos[j + 1, i + 1]:
            cut.append(top)
        if pos[j, i] != pos[j + 1, i]:
            cut.append(left)
        if len(cut) == 2:
            link(cut[0], cut[1])
        else:
            centre = 0.25 * (f[j, i] + f[j, i + 1] + f[j + 1, i] + f[j + 1, i + 1]) > 0
            if centre == pos[j, i]:
                link(bottom, right)
                link(left, top)
            else:
                link(bottom, left)
                link(right, top)

    seen = set()
    polylines = []
    ends = [e for e, nb in links.items() if len(nb) == 1]
    for start in ends + list(links):
        if start in seen:
            continue
        chain = [start]
        seen.add(start)
        prev, cur = None, start
        closed = False
        while True:
            nxt = [e for e in links[cur] if e != prev]
            if not nxt:
                break
            candidate = nxt[0]
            if candidate == start and len(chain) > 2:
                closed = True
                break
            if candidate in seen:
                # saddle cells give a node two distinct partners; take the unvisited one
                rest = [e for e in nxt if e not in seen]
                if not rest:
                    break
                candidate = rest[0]
            chain.append(candidate)
            seen.add(candidate)
            prev, cur = cur, candidate
        vertices = np.array([point(e) for e in chain])
        if closed:
            vertices = np.append(vertices, vertices[0])
        polylines.append((vertices, closed))
    return polylines


def _refine_vertices(vertices: np.ndarray, level: float, of: str, spec, fn: str) -> np.ndarray:
    """Newton steps -h / f' onto log|X| = log level; critical-line vertices move along the line."""
    s = vertices.copy()
    on_line = np.abs(s.real - 0.5) < 1e-12
    target = math.log(level)
    for _ in range(6):
        values, _ = evaluate_array(fn, s, spec)
        mod = _modulus_values(values, fn, of)
        with np.errstate(all="ignore"):
            h = np.log(mod) - target
        deriv = modulus_logderiv_array(of, s, spec)
        with np.errstate(all="ignore"):
            step = -h / deriv
            # on sigma = 1/2 only t moves: d/dt Re log X = -Im f'
            line_step = 1j * h / deriv.imag
        step = np.where(on_line, line_step, step)
        good = np.isfinite(step) & (np.abs(step) < 0.05)
        s = np.where(good, s + step, s)
        if np.all(np.abs(h[np.isfinite(h)]) < LEVEL_TOL):
            break
    return s


def _winding_of_v(vertices: np.ndarray, spec) -> float:
    v, _ = evaluate_array("V_oa" if spec is not None else "V", vertices, spec)
    phase = np.angle(v)
    d = np.remainder(np.diff(phase) + np.pi, 2 * np.pi) - np.pi
    return float(d.sum() / (2 * np.pi))


def extract_contours(field_: GridField, level: float, of: str = "absV", refine: bool = True) -> List[ContourPolyline]:
    """Level set |V| = level or |W| = level as refined polylines."""
    if level <= 0:
        raise DomainError(f"level must be positive, got {level}")
    if of not in ("absV", "absW"):
        raise DomainError(f"of must be absV or absW, got {of!r}")
    mod = _modulus_values(field_.values, field_.fn_id, of)
    with np.errstate(divide="ignore"):
        f = np.log(mod) - math.log(level)
    f = np.where(field_.poles & np.isnan(f), np.inf, f)

    spec = field_.spec
    fn = ("V" if of == "absV" else "W") + ("_oa" if spec is not None else "")
    contours = []
    for vertices, closed in marching_squares(f, field_.sigma, field_.t):
        if refine and len(vertices):
            vertices = _refine_vertices(vertices, level, of, spec, fn)
        poly = ContourPolyline(level, vertices, closed, of)
        if closed and of == "absV":
            poly.enclosed["winding"] = int(round(_winding_of_v(vertices, spec)))
        contours.append(poly)
    return contours


# ------------------------------------------------------------------ geometry

def point_in_polygon(points, polygon: np.ndarray) -> np.ndarray:
    """Even-odd ray casting for complex points against a closed polyline."""
    pts = np.atleast_1d(np.asarray(points, dtype=complex))
    xa, ya = polygon.real[:-1], polygon.imag[:-1]
    xb, yb = polygon.real[1:], polygon.imag[1:]
    inside = np.zeros(pts.shape, dtype=bool)
    for k, p in enumerate(pts):
        straddle = (ya > p.imag) != (yb > p.imag)
        with np.errstate(all="ignore"):
            x_cross = xa + (p.imag - ya) * (xb - xa) / (yb - ya)
        inside[k] = np.sum(straddle & (p.real < x_cross)) % 2 == 1
    return inside


def _distance_to_polyline(point: complex, vertices: np.ndarray) -> float:
    a, b = vertices[:-1], vertices[1:]
    ab = b - a
    denom = np.abs(ab) ** 2
    with np.errstate(all="ignore"):
        u = np.clip(((point - a) * np.conj(ab)).real / denom, 0.0, 1.0)
    u = np.where(denom > 0, u, 0.0)
    return float(np.min(np.abs(a + u * ab - point)))


def critical_line_marks(t_lo: float, t_hi: float, spec: Optional[CounterexampleSpec] = None,
                        step: float = 0.01) -> Dict[str, np.ndarray]:
    """Ordinates on sigma = 1/2 where V is 0, infinite, +i or -i."""
    fn = "U_oa" if spec is not None else "U"
    t = np.arange(t_lo, t_hi + step / 2, step)
    u, singular = evaluate_array(fn, 0.5 + 1j * t, spec)
    psi = np.unwrap(np.angle(np.where(singular, 1.0, u)))
    marks = {}
    for name, phase in _MARK_PHASES.items():
        level = np.floor((psi - phase) / (2 * np.pi))
        idx = np.nonzero(level[1:] != level[:-1])[0]

        def h(x, phase=phase):
            values, _ = evaluate_array(fn, 0.5 + 1j * np.asarray(x), spec)
            return np.angle(values * np.exp(-1j * phase))

        roots, _ = refine_brackets(h, t[idx], t[idx + 1])
        marks[name] = np.sort(roots)
    return marks


# ------------------------------------------------------------------ classification

def _compare(x: float, tol: float = CLASS_TOL) -> str:
    if abs(x - 1.0) <= tol:
        return "="
    return "<" if x < 1.0 else ">"


def quadrant_of(u: complex, tol: float = CLASS_TOL) -> str:
    re_zero = abs(u.real) <= tol * abs(u)
    im_zero = abs(u.imag) <= tol * abs(u)
    if re_zero:
        return "Q1|Q2" if u.imag > 0 else "Q3|Q4"
    if im_zero:
        return "Q4|Q1" if u.real > 0 else "Q2|Q3"
    if u.real > 0:
        return "Q1" if u.imag > 0 else "Q4"
    return "Q2" if u.imag > 0 else "Q3"


_TABLE = {
    # quadrant: (|V| vs 1, |W| vs 1)
    "Q1": (">", "<"), "Q2": ("<", "<"), "Q3": ("<", ">"), "Q4": (">", ">"),
    "Q1|Q2": ("=", "<"), "Q2|Q3": ("<", "="), "Q3|Q4": ("=", ">"), "Q4|Q1": (">", "="),
}


def classify(s: complex, spec: Optional[CounterexampleSpec] = None) -> QuadrantClass:
    """Quadrant of arg U at s and the matching |V|, |W| comparisons."""
    s = complex(s)
    suffix = "_oa" if spec is not None else ""
    u = complex(evaluate_array("U" + suffix, np.array([s]), spec)[0][0])
    if not np.isfinite(u) or abs(u) < CLASS_TOL or abs(u) > 1 / CLASS_TOL \
            or abs(u - 1) < CLASS_TOL or abs(u + 1j) < CLASS_TOL:
        raise DegeneratePointError(f"s = {s} is within {CLASS_TOL} of a zero or pole (U = {u})")
    v = (1 + u) / (1 - u)
    w = (1 + 1j * u) / (u + 1j)
    quadrant = quadrant_of(u)
    abs_v, abs_w = _compare(abs(v)), _compare(abs(w))
    consistent = _TABLE[quadrant] == (abs_v, abs_w)
    if not consistent:
        logging.warning(f"classify({s}): {quadrant} but |V| {abs_v} 1, |W| {abs_w} 1")
    return QuadrantClass(s, quadrant, abs_v, abs_w, consistent)


def quadrant_grid(field_: GridField) -> np.ndarray:
    """Quadrant index 1..4 of arg U on a U field (0 where singular)."""
    u = field_.values
    q = np.where(u.real > 0, np.where(u.imag > 0, 1, 4), np.where(u.imag > 0, 2, 3))
    return np.where(field_.poles | ~np.isfinite(u), 0, q)


# ------------------------------------------------------------------ derivative zeros

def _g(s: np.ndarray, spec) -> np.ndarray:
    return u_logderiv_array(s, spec)[0]


def _newton(seed: complex, spec, max_iter: int = 40) -> Optional[complex]:
    s = complex(seed)
    for _ in range(max_iter):
        point = np.array([s])
        g0 = _g(point, spec)[0]
        dg = u_logderiv2_array(point, spec)[0][0]
        if not (np.isfinite(g0) and np.isfinite(dg)) or dg == 0:
            return None
        step = g0 / dg
        if abs(step) > 0.1:
            step *= 0.1 / abs(step)
        s -= step
        if abs(step) < 1e-13:
            break
    residual = abs(_g(np.array([s]), spec)[0])
    return s if residual < NEWTON_TOL else None


def derivative_zeros(window: Window, variant: str = "plain", spec: Optional[CounterexampleSpec] = None,
                     n_seed: int = SEED_GRID, max_workers: Optional[int] = None) -> List[DerivativeZero]:
    """Zeros of U'/U in the window, seeded from sign-change cells of Re and Im."""
    if variant not in ("plain", "oa"):
        raise DomainError(f"variant must be plain or oa, got {variant!r}")
    if variant == "oa" and spec is None:
        raise DomainError("oa variant needs a CounterexampleSpec")
    if variant == "plain":
        spec = None
    if window[3] - window[2] > 5:
        raise DomainError(f"derivative-zero window height {window[3] - window[2]} exceeds 5")
    validate_window(window)

    sigma = np.linspace(window[0], window[1], n_seed)
    t = np.linspace(window[2], window[3], n_seed)
    pts = sigma[None, :] + 1j * t[:, None]
    g = _g(pts.reshape(-1), spec).reshape(pts.shape)

    def changes(part):
        corners = np.stack([part[:-1, :-1], part[:-1, 1:], part[1:, :-1], part[1:, 1:]])
        return (corners.max(axis=0) > 0) & (corners.min(axis=0) < 0)

    cells = changes(g.real) & changes(g.imag)
    seeds = (0.25 * (pts[:-1, :-1] + pts[:-1, 1:] + pts[1:, :-1] + pts[1:, 1:]))[cells]

    roots = run_concurrent(lambda z: _newton(z, spec), list(seeds), max_workers,
                           label="derivative-zero seeds", raise_on_error=False)
    failed = sum(r is None for r in roots)
    if failed:
        logging.info(f"derivative_zeros: {failed} of {len(seeds)} seeds did not converge (poles of U'/U)")

    found: List[complex] = []
    for r in roots:
        if r is None:
            continue
        if not (window[0] <= r.real <= window[1] and window[2] <= r.imag <= window[3]):
            continue
        if all(abs(r - f) > MERGE_TOL for f in found):
            found.append(r)
    found.sort(key=lambda z: (z.imag, z.real))

    v_fn = "V_oa" if spec is not None else "V"
    values, _ = evaluate_array(v_fn, np.array(found, dtype=complex), spec)
    return [DerivativeZero(z, float(abs(v))) for z, v in zip(found, values)]


def tiled_derivative_zeros(window: Window, variant: str = "plain", spec: Optional[CounterexampleSpec] = None,
                           max_workers: Optional[int] = None) -> List[DerivativeZero]:
    """derivative_zeros over windows taller than 5, in strips that overlap slightly."""
    t_lo, t_hi = window[2], window[3]
    n_strips = max(1, math.ceil((t_hi - t_lo) / 4.8))
    edges = np.linspace(t_lo, t_hi, n_strips + 1)
    merged: List[DerivativeZero] = []
    for a, b in zip(edges[:-1], edges[1:]):
        strip = (window[0], window[1], max(t_lo, a - 0.05), min(t_hi, b + 0.05))
        for z in derivative_zeros(strip, variant, spec, max_workers=max_workers):
            if all(abs(z.location - m.location) > MERGE_TOL for m in merged):
                merged.append(z)
    merged.sort(key=lambda z: (z.location.imag, z.location.real))
    return merged


# ------------------------------------------------------------------ propositions

def _grid_for(window: Window) -> Tuple[int, int]:
    """Odd grid sizes so that sigma = 1/2 is a grid column when the window is symmetric about it."""
    height = window[3] - window[2]
    ny = max(MIN_GRID_SIDE + 1, int(round(height / 0.02)) | 1)
    return CONTOUR_GRID, min(ny, 1001)


def _expand(window: Window, factor: float = 0.1) -> Window:
    ds = (window[1] - window[0]) * factor / 2
    dt = (window[3] - window[2]) * factor / 2
    return (window[0] - ds, window[1] + ds, window[2] - dt, window[3] + dt)


def _loop_around(point: complex, contours: List[ContourPolyline]) -> Optional[ContourPolyline]:
    loops = [c for c in contours if c.closed and point_in_polygon(point, c.vertices)[0]]
    if not loops:
        return None
    # the innermost loop has the smallest extent
    return min(loops, key=lambda c: np.ptp(c.vertices.imag) + np.ptp(c.vertices.real))


def _component_edges(field_: GridField, t_zero: float) -> Dict[str, bool]:
    """Which window edges the |V| <= 1 component holding 0.5 + i t_zero reaches."""
    eight = np.ones((3, 3), dtype=int)
    labels, _ = ndimage.label(region_mask(field_, 1.0) & ~field_.poles, structure=eight)
    i = int(np.argmin(np.abs(field_.sigma - 0.5)))
    j = int(np.argmin(np.abs(field_.t - t_zero)))
    k = labels[j, i]
    if k == 0:
        return {"sigma": False, "t": False}
    comp = labels == k
    return {"sigma": bool(comp[:, 0].any() or comp[:, -1].any()),
            "t": bool(comp[0, :].any() or comp[-1, :].any())}


def _p4_for_zero(t_zero: float, marks: Dict[str, np.ndarray], window: Window, spec,
                 contours_by_window: Dict[Window, Tuple[GridField, List[ContourPolyline]]]
                 ) -> Tuple[str, Dict[str, object]]:
    plus = marks["v_plus_i"]
    minus = marks["v_minus_i"]
    targets = []
    for arr in (plus, minus):
        if arr.size == 0:
            return "inconclusive", {"t": t_zero, "reason": "no V = +-i mark"}
        targets.append(0.5 + 1j * arr[np.argmin(np.abs(arr - t_zero))])

    win = window
    for _ in range(EXPAND_RETRIES + 1):
        if win not in contours_by_window:
            nx, ny = _grid_for(win)
            suffix = "_oa" if spec is not None else ""
            field_ = grid_eval(win, nx, ny, "U" + suffix, spec)
            contours_by_window[win] = (field_, extract_contours(field_, 1.0, "absV"))
        field_, contours = contours_by_window[win]
        loop = _loop_around(0.5 + 1j * t_zero, contours)
        if loop is not None:
            distances = [loop.distance_to(p) for p in targets]
            verdict = "holds" if max(distances) < MARK_TOL else "fails"
            return verdict, {"t": t_zero, "distances": distances}
        edges = _component_edges(field_, t_zero)
        if edges["sigma"] and not edges["t"]:
            # the |V| <= 1 region leaves through the sides of the strip: no loop closes around the zero
            return "fails", {"t": t_zero, "reason": "|V| <= 1 component open across the strip",
                              "window": list(field_.window)}
        if not edges["t"]:
            break
        win = _expand(win)
    if edges["sigma"]:
        return "fails", {"t": t_zero, "reason": "|V| <= 1 component open across the strip",
                         "window": list(field_.window)}
    return "inconclusive", {"t": t_zero, "reason": "no closed |V| = 1 loop inside the expanded window"}


def _combine(verdicts: Sequence[str]) -> str:
    if not verdicts:
        return "inconclusive"
    if "fails" in verdicts:
        return "fails"
    if "inconclusive" in verdicts:
        return "inconclusive"
    return "holds"


def check_propositions(window: Window, variant: str = "plain", spec: Optional[CounterexampleSpec] = None,
                       max_workers: Optional[int] = None) -> PropositionReport:
    """Verdicts on: no derivative zeros in 1/4 <= sigma <= 3/4; every derivative zero has
    |V| > 1; the |V| = 1 loop around each V-zero reaches the two V = +-i points."""
    if variant == "plain":
        spec = None
    marks = critical_line_marks(window[2], window[3], spec)
    zeros_in = marks["v_zero"]
    dzs = tiled_derivative_zeros(window, variant, spec, max_workers=max_workers)
    witnesses: Dict[str, object] = {"v_zeros": zeros_in.tolist()}

    if zeros_in.size == 0:
        return PropositionReport(window, variant, dzs, "inconclusive", "inconclusive", "inconclusive",
                                 {"reason": "window holds no zero of V"})

    inside = [z for z in dzs if 0.25 <= z.location.real <= 0.75]
    p2 = "fails" if inside else "holds"
    below = [z for z in dzs if z.absV <= 1.0]
    p3 = "fails" if below else "holds"
    witnesses["p2_witnesses"] = [[z.location.real, z.location.imag] for z in inside]
    witnesses["p3_witnesses"] = [[z.location.real, z.location.imag, z.absV] for z in below]

    cache: Dict[Window, Tuple[GridField, List[ContourPolyline]]] = {}
    per_zero = [_p4_for_zero(t, marks, window, spec, cache) for t in zeros_in]
    p4 = _combine([v for v, _ in per_zero])
    witnesses["p4_per_zero"] = [w for _, w in per_zero]
    report = PropositionReport(window, variant, dzs, p2, p3, p4, witnesses)
    if not report.p3_p4_agree:
        logging.warning(f"P3 ({p3}) and P4 ({p4}) disagree on window {window}")
    return report


# ------------------------------------------------------------------ topology

def _sweep(loop: ContourPolyline, spec) -> Dict[str, object]:
    v, _ = evaluate_array("V_oa" if spec is not None else "V", loop.vertices, spec)
    phase = np.unwrap(np.angle(v))
    diffs = np.diff(phase)
    u_zero = np.floor(phase / (2 * np.pi))
    u_pole = np.floor((phase - np.pi) / (2 * np.pi))
    return {
        "sweep": float(phase[-1] - phase[0]),
        "monotone": bool(np.all(diffs > 0) or np.all(diffs < 0)),
        "u_zeros_on_loop": int(np.sum(u_zero[1:] != u_zero[:-1])),
        "u_poles_on_loop": int(np.sum(u_pole[1:] != u_pole[:-1])),
        "u_points": loop.vertices[np.nonzero((u_zero[1:] != u_zero[:-1]) | (u_pole[1:] != u_pole[:-1]))[0]],
    }


def _q4_structure(quadrants: np.ndarray, field_: GridField, u_points: np.ndarray) -> Dict[str, object]:
    eight = np.ones((3, 3), dtype=int)
    q4 = quadrants == 4
    _, n_q4 = ndimage.label(q4, structure=eight)
    islands, n_islands = ndimage.label(~q4 & (quadrants > 0), structure=eight)

    # a non-Q4 component with no U zero or pole nearby would be a true hole in Q4
    ds = field_.sigma[1] - field_.sigma[0]
    dt = field_.t[1] - field_.t[0]
    anchored = np.zeros(n_islands + 1, dtype=bool)
    for p in u_points:
        i = int(round((p.real - field_.window[0]) / ds))
        j = int(round((p.imag - field_.window[2]) / dt))
        patch = islands[max(j - 2, 0):j + 3, max(i - 2, 0):i + 3]
        anchored[np.unique(patch)] = True
    unanchored = [k for k in range(1, n_islands + 1) if not anchored[k]]
    return {"q4_components": int(n_q4), "islands": int(n_islands), "unanchored_islands": len(unanchored)}


def topology_report(window: Window, spec: Optional[CounterexampleSpec] = None,
                    grid: int = TOPOLOGY_GRID, max_workers: Optional[int] = None) -> Dict[str, object]:
    """Per V-zero loop structure plus the quadrant geometry of the window."""
    started = time.time()
    marks = critical_line_marks(window[2], window[3], spec)
    if marks["v_zero"].size == 0:
        raise DomainError(f"window {window} holds no zero of V")
    suffix = "_oa" if spec is not None else ""

    win = window
    for attempt in range(EXPAND_RETRIES + 1):
        ny = grid | 1
        field_ = grid_eval(win, grid | 1, ny, "U" + suffix, spec, max_workers=max_workers)
        contours = extract_contours(field_, 1.0, "absV")
        loops = {t: _loop_around(0.5 + 1j * t, contours) for t in marks["v_zero"]}
        if all(loop is not None for loop in loops.values()) or attempt == EXPAND_RETRIES:
            break
        win = _expand(win)

    per_zero = []
    u_points = []
    for t_zero, loop in loops.items():
        entry: Dict[str, object] = {"t": float(t_zero)}
        if loop is None:
            entry["status"] = "inconclusive"
            per_zero.append(entry)
            continue
        zeros_inside = int(point_in_polygon(0.5 + 1j * marks["v_zero"], loop.vertices).sum())
        poles_inside = int(point_in_polygon(0.5 + 1j * marks["v_pole"], loop.vertices).sum())
        sweep = _sweep(loop, spec)
        u_points.extend(sweep.pop("u_points").tolist())
        entry.update({
            "status": "closed",
            "v_zeros_inside": zeros_inside,
            "v_poles_inside": poles_inside,
            "line_crossings": loop.crossings_of_line(0.5),
            **sweep,
        })
        entry["ok"] = (zeros_inside == 1 and poles_inside == 0 and sweep["u_zeros_on_loop"] == 1
                       and sweep["u_poles_on_loop"] == 1 and entry["line_crossings"] == 2)
        per_zero.append(entry)

    quadrants = quadrant_grid(field_)
    w_mod = _modulus_values(field_.values, field_.fn_id, "absW")
    valid = quadrants > 0
    w_companion = float(np.mean((w_mod[valid] < 1) == np.isin(quadrants[valid], (1, 2))))

    dzs = tiled_derivative_zeros(win, "oa" if spec is not None else "plain", spec, max_workers=max_workers)
    dz_classes = []
    for z in dzs:
        try:
            dz_classes.append(classify(z.location, spec).quadrant)
        except DegeneratePointError:
            dz_classes.append("degenerate")

    report = {
        "window": list(win),
        "per_zero": per_zero,
        "w_companion_agreement": w_companion,
        "derivative_zeros": [[z.location.real, z.location.imag, z.absV] for z in dzs],
        "derivative_zero_quadrants": dz_classes,
        "all_derivative_zeros_q4": all(q == "Q4" for q in dz_classes),
        **_q4_structure(quadrants, field_, np.array(u_points, dtype=complex)),
    }
    logging.info(f"Topology report for {win} in {time.time() - started:.2f}s")
    return report
