"""Composite functions of xi1: T+-, U, V, W, the Lagarias-Suzuki and Ki
functions, the off-axis family F and the asymptotic estimators.

Everything is computed from the pair L0 = log xi1(2s), L1 = log xi1(2s - 1):
xi1 itself underflows past |t| ~ 50 while U = exp(L1 - L0) stays O(1).
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate, optimize

from src.complexfn import (EPS, EULER_GAMMA, EvalResult, check_window, log_xi1_array, logderiv2_xi1_array,
                           logderiv_xi1_array)
from src.errors import DomainError

LOG_4PI = math.log(4 * math.pi)

BASE_FUNCTIONS = ("xi1_2s", "xi1_2s_1", "Tplus", "Tminus", "U", "V", "W")
AUX_FUNCTIONS = ("a0", "I_ls", "f_ki", "ls1")
OFFAXIS_FUNCTIONS = ("F", "U_oa", "V_oa", "W_oa")
FUNCTION_IDS = BASE_FUNCTIONS + AUX_FUNCTIONS + OFFAXIS_FUNCTIONS

# points where the formula is 0/0 or inf - inf but the function is analytic
_REMOVABLE: Dict[str, Tuple[float, ...]] = {
    "Tplus": (0.5,),
    "U": (0.5,),
    "V": (0.5,),
    "W": (0.5,),
    "a0": (0.5,),
    "I_ls": (0.5,),
    "ls1": (0.5,),
    "f_ki": (0.0, 0.5, 1.0),
    "U_oa": (0.5,),
    "V_oa": (0.5,),
    "W_oa": (0.5,),
}
_CAUCHY_RADIUS = 1e-2
_CAUCHY_NODES = 64
_NEAR_POLE = 1e-12


@dataclass(frozen=True)
class CounterexampleSpec:
    """Planted zeros at 3/4 +- delta +- i t_star, poles at 1/4 +- delta +- i t_star."""

    delta: float
    t_star: float
    extra_terms: Tuple[Tuple[float, float], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "extra_terms", tuple(tuple(map(float, q)) for q in self.extra_terms))
        for delta, t_q in self.terms():
            if not 0.0 < delta < 0.25:
                raise DomainError(f"delta must lie in (0, 1/4), got {delta}")
            if t_q <= 0:
                raise DomainError(f"t_star must be positive, got {t_q}")

    def terms(self) -> List[Tuple[float, float]]:
        return [(self.delta, self.t_star)] + list(self.extra_terms)

    def zeros(self) -> np.ndarray:
        return np.array([0.75 + a * d + 1j * b * t for d, t in self.terms() for a in (1, -1) for b in (1, -1)])

    def poles(self) -> np.ndarray:
        return np.array([0.25 + a * d + 1j * b * t for d, t in self.terms() for a in (1, -1) for b in (1, -1)])


@dataclass(frozen=True)
class NormalFormConstants:
    v1: complex
    v2: complex
    v3: complex


NORMAL_FORM = NormalFormConstants(
    v1=math.sqrt(2 + math.sqrt(3)) * complex(math.cos(-math.pi / 4), math.sin(-math.pi / 4)),
    v2=math.sqrt(2 - math.sqrt(3)) * complex(math.cos(3 * math.pi / 4), math.sin(3 * math.pi / 4)),
    v3=complex(-0.5, math.sqrt(3) / 2),
)


def laurent_constant() -> float:
    """Constant term of T+ at its poles s = 0 and s = 1."""
    return (3 * EULER_GAMMA + math.pi - 3 * LOG_4PI) / 24


def t_plus_half() -> float:
    """T+(1/2)."""
    return (EULER_GAMMA - LOG_4PI) / 4


# ------------------------------------------------------------------ kernels

def _xi_pair(s: np.ndarray):
    l0, e0, p0 = log_xi1_array(2.0 * s)
    l1, e1, p1 = log_xi1_array(2.0 * s - 1.0)
    return l0, l1, e0 + e1, p0, p1


def _u_from_pair(l0, l1, p0, p1) -> np.ndarray:
    with np.errstate(all="ignore"):
        u = np.exp(l1 - l0)
    u = np.where(p0 & ~p1, 0.0, u)
    u = np.where(p1 & ~p0, complex(np.inf, 0.0), u)
    # both poles only at s = 1/2; the Cauchy pass overwrites this point
    u = np.where(p0 & p1, -1.0, u)
    zero_of_xi = np.isneginf(l0.real) & ~p1
    return np.where(zero_of_xi, complex(np.inf, 0.0), u)


def _mobius_v(u: np.ndarray) -> np.ndarray:
    with np.errstate(all="ignore"):
        v = (1.0 + u) / (1.0 - u)
    return np.where(np.isinf(u), -1.0, v)


def _mobius_w(u: np.ndarray) -> np.ndarray:
    with np.errstate(all="ignore"):
        w = (1.0 + 1j * u) / (u + 1j)
    return np.where(np.isinf(u), 1j, w)


def offaxis_factor(s, spec: CounterexampleSpec) -> np.ndarray:
    s = np.asarray(s, dtype=complex)
    out = np.ones_like(s)
    with np.errstate(all="ignore"):
        for z, p in zip(spec.zeros(), spec.poles()):
            out = out * (s - z) / (s - p)
    return out


def counterexample_logderiv(s, spec: CounterexampleSpec) -> np.ndarray:
    """F'/F."""
    s = np.asarray(s, dtype=complex)
    out = np.zeros_like(s)
    with np.errstate(all="ignore"):
        for z, p in zip(spec.zeros(), spec.poles()):
            out = out + 1.0 / (s - z) - 1.0 / (s - p)
    return out


def _raw_values(fn_id: str, s: np.ndarray, spec: Optional[CounterexampleSpec], param: Optional[float]):
    if fn_id == "F":
        f = offaxis_factor(s, spec)
        return f, np.zeros(s.shape)

    l0, l1, err, p0, p1 = _xi_pair(s)
    with np.errstate(all="ignore"):
        x0 = np.exp(l0)
        x1 = np.exp(l1)
        if fn_id == "xi1_2s":
            return x0, err
        if fn_id == "xi1_2s_1":
            return x1, err
        if fn_id == "Tplus":
            return 0.25 * (x0 + x1), err
        if fn_id == "Tminus":
            return 0.25 * (x0 - x1), err
        if fn_id == "a0":
            return x0 * param ** s + x1 * param ** (1.0 - s), err
        if fn_id == "I_ls":
            return -x0 * param ** (s - 1.0) / (s - 1.0) + x1 * param ** (-s) / s, err
        if fn_id == "f_ki":
            return ((s - 1.0) * s * (2.0 * s - 1.0) * x0 * param ** s
                    + s * (1.0 - s) * (1.0 - 2.0 * s) * x1 * param ** (1.0 - s)), err
        if fn_id == "ls1":
            return x0 / (s - 1.0) - x1 / s, err

    u = _u_from_pair(l0, l1, p0, p1)
    if fn_id.endswith("_oa"):
        u = u * offaxis_factor(s, spec)
    kind = fn_id[0]
    if kind == "U":
        return u, err
    if kind == "V":
        return _mobius_v(u), err
    return _mobius_w(u), err


def _cauchy_mean(fn_id, s, center, spec, param):
    """Value at s (|s - center| < radius/2) from the trapezoid Cauchy integral."""
    theta = 2 * np.pi * (np.arange(_CAUCHY_NODES) + 0.5) / _CAUCHY_NODES
    ring = center + _CAUCHY_RADIUS * np.exp(1j * theta)
    values, _ = _raw_values(fn_id, ring, spec, param)
    weights = (ring - center)[None, :] / (ring[None, :] - s[:, None])
    return (weights * values[None, :]).mean(axis=1)


def evaluate_array(fn_id: str, s, spec: Optional[CounterexampleSpec] = None,
                   param: Optional[float] = None) -> Tuple[np.ndarray, np.ndarray]:
    """Values of fn_id over an array of points, plus a singularity mask."""
    if fn_id not in FUNCTION_IDS:
        raise DomainError(f"unknown function {fn_id!r}")
    if fn_id in OFFAXIS_FUNCTIONS and spec is None:
        raise DomainError(f"{fn_id} needs a CounterexampleSpec")
    if fn_id in AUX_FUNCTIONS and (param is None or param < 1):
        raise DomainError(f"{fn_id} needs y (or T) >= 1, got {param}")
    arr = np.asarray(s, dtype=complex)
    shape = arr.shape
    flat = arr.reshape(-1)
    values, _ = _raw_values(fn_id, flat, spec, param)
    values = np.array(values, dtype=complex)

    for center in _REMOVABLE.get(fn_id, ()):
        near = np.abs(flat - center) < _CAUCHY_RADIUS / 2
        if near.any():
            values[near] = _cauchy_mean(fn_id, flat[near], center, spec, param)

    singular = ~np.isfinite(values)
    return values.reshape(shape), singular.reshape(shape)


def log_evaluate_array(fn_id: str, s, spec: Optional[CounterexampleSpec] = None,
                       param: Optional[float] = None) -> Tuple[np.ndarray, np.ndarray]:
    """Principal log of fn_id without forming underflowing intermediates.

    Zeros show up as -inf real part, poles as +inf; both are flagged.
    """
    arr = np.asarray(s, dtype=complex)
    shape = arr.shape
    flat = arr.reshape(-1)
    if fn_id in ("U", "V", "W", "F", "I_ls", "f_ki", "ls1") or fn_id.endswith("_oa"):
        values, singular = evaluate_array(fn_id, flat, spec, param)
        with np.errstate(all="ignore"):
            logs = np.log(values)
        singular = singular | ~np.isfinite(logs)
        return logs.reshape(shape), singular.reshape(shape)

    l0, l1, _, p0, p1 = _xi_pair(flat)
    u = _u_from_pair(l0, l1, p0, p1)
    with np.errstate(all="ignore"):
        if fn_id == "xi1_2s":
            logs = l0
        elif fn_id == "xi1_2s_1":
            logs = l1
        elif fn_id == "Tplus":
            logs = l0 + np.log(1.0 + u) - math.log(4.0)
        elif fn_id == "Tminus":
            logs = l0 + np.log(1.0 - u) - math.log(4.0)
        elif fn_id == "a0":
            if param is None or param < 1:
                raise DomainError(f"a0 needs y >= 1, got {param}")
            ly = math.log(param)
            logs = l0 + flat * ly + np.log(1.0 + np.exp(l1 - l0 + (1.0 - 2.0 * flat) * ly))
        else:
            raise DomainError(f"no log form for {fn_id!r}")
    singular = ~np.isfinite(logs) | p0 | p1
    return logs.reshape(shape), singular.reshape(shape)


def u_logderiv_array(s, spec: Optional[CounterexampleSpec] = None) -> Tuple[np.ndarray, np.ndarray]:
    """U'/U = 2 xi1'/xi1(2s - 1) - 2 xi1'/xi1(2s); adds F'/F for the off-axis variant."""
    s = np.asarray(s, dtype=complex)
    d1, _, bad1 = logderiv_xi1_array(2.0 * s - 1.0)
    d0, _, bad0 = logderiv_xi1_array(2.0 * s)
    g = 2.0 * d1 - 2.0 * d0
    if spec is not None:
        g = g + counterexample_logderiv(s, spec)
    return g, bad0 | bad1 | ~np.isfinite(g)


def u_logderiv2_array(s, spec: Optional[CounterexampleSpec] = None) -> Tuple[np.ndarray, np.ndarray]:
    """(U'/U)' = 4 (xi1'/xi1)'(2s - 1) - 4 (xi1'/xi1)'(2s), plus (F'/F)' off-axis."""
    s = np.asarray(s, dtype=complex)
    d1, bad1 = logderiv2_xi1_array(2.0 * s - 1.0)
    d0, bad0 = logderiv2_xi1_array(2.0 * s)
    g = 4.0 * d1 - 4.0 * d0
    if spec is not None:
        with np.errstate(all="ignore"):
            for z, p in zip(spec.zeros(), spec.poles()):
                g = g - 1.0 / (s - z) ** 2 + 1.0 / (s - p) ** 2
    return g, bad0 | bad1 | ~np.isfinite(g)


def modulus_logderiv_array(of: str, s, spec: Optional[CounterexampleSpec] = None) -> np.ndarray:
    """d/ds log V or d/ds log W, from U'/U through the Moebius maps."""
    u, _ = evaluate_array("U_oa" if spec is not None else "U", s, spec)
    g, _ = u_logderiv_array(s, spec)
    with np.errstate(all="ignore"):
        if of == "absV":
            return 2.0 * g * u / (1.0 - u * u)
        return -2.0 * g * u / ((1.0 + 1j * u) * (u + 1j))


# ------------------------------------------------------------------ scalar ops

def _scalar(fn_id: str, s: complex, spec=None, param=None, pole_points: Sequence[complex] = ()) -> EvalResult:
    s = complex(s)
    check_window(2.0 * s, sigma_pad=1.0)
    if any(s == p for p in pole_points):
        return EvalResult(complex(np.inf, 0.0), float("inf"), True)
    values, singular = evaluate_array(fn_id, np.array([s]), spec, param)
    value = complex(values[0])
    if singular[0]:
        return EvalResult(complex(np.inf, 0.0), float("inf"), True)

    if fn_id in ("xi1_2s", "F"):
        err = EPS * abs(value)
    else:
        _, _, log_err, _, _ = _xi_pair(np.array([s]))
        err = 4.0 * abs(value) * float(log_err[0]) + 8 * EPS * abs(value)
    return EvalResult(value, err, False)


def t_pm(s: complex, sign: str = "+") -> EvalResult:
    """T+ or T- = (xi1(2s) +- xi1(2s - 1)) / 4."""
    if sign not in ("+", "-"):
        raise DomainError(f"sign must be '+' or '-', got {sign!r}")
    if sign == "+":
        return _scalar("Tplus", s, pole_points=(0.0, 1.0))
    return _scalar("Tminus", s, pole_points=(0.0, 0.5, 1.0))


def xi1_shifted(s: complex, which: str = "xi1_2s") -> EvalResult:
    """xi1(2s) or xi1(2s - 1) as a function of s."""
    if which not in ("xi1_2s", "xi1_2s_1"):
        raise DomainError(f"which must be xi1_2s or xi1_2s_1, got {which!r}")
    return _scalar(which, s, pole_points=(0.0, 0.5) if which == "xi1_2s" else (0.5, 1.0))


def _near_pole(u: complex, which: str) -> bool:
    if which == "V":
        return abs(1.0 - u) < _NEAR_POLE * abs(1.0 + u)
    if which == "W":
        return abs(u + 1j) < _NEAR_POLE * abs(1.0 + 1j * u)
    return False


def uvw(s: complex, which: str) -> EvalResult:
    if which not in ("U", "V", "W"):
        raise DomainError(f"which must be U, V or W, got {which!r}")
    result = _scalar(which, s, pole_points=(1.0,) if which == "U" else ())
    if which != "U" and not result.at_pole:
        u = _scalar("U", s).value
        if _near_pole(u, which):
            return EvalResult(complex(np.inf, 0.0), float("inf"), True)
    return result


def aux(s: complex, which: str, y_or_T: float) -> EvalResult:
    """a0(y, s), I(T, s), Ki's f(y, s) or the first Lagarias-Suzuki function.

    For ls1 the parameter is unused but must still be >= 1.
    """
    if which not in AUX_FUNCTIONS:
        raise DomainError(f"unknown auxiliary function {which!r}")
    if y_or_T < 1:
        raise DomainError(f"y (or T) must be >= 1, got {y_or_T}")
    return _scalar(which, s, param=float(y_or_T), pole_points=(0.0, 1.0) if which in ("a0", "I_ls", "ls1") else ())


def counterexample(s: complex, spec: CounterexampleSpec, which: str) -> EvalResult:
    if which not in OFFAXIS_FUNCTIONS:
        raise DomainError(f"unknown off-axis function {which!r}")
    s = complex(s)
    if which == "F":
        # exact product so the planted zeros come out as exact zeros
        poles = spec.poles()
        if np.any(s == poles):
            return EvalResult(complex(np.inf, 0.0), float("inf"), True)
        value = complex(offaxis_factor(np.array([s]), spec)[0])
        return EvalResult(value, 16 * EPS * abs(value), False)
    result = _scalar(which, s, spec=spec)
    if which != "U_oa" and not result.at_pole:
        u = _scalar("U_oa", s, spec=spec).value
        if _near_pole(u, which[0]):
            return EvalResult(complex(np.inf, 0.0), float("inf"), True)
    return result


def f_shift_closed_form(delta: float) -> float:
    """Offset from sigma = 3/4 of the derivative zero of |F| (about -2 delta^2)."""
    return -0.25 * (1.0 - math.sqrt(1.0 - 16.0 * delta * delta))


def f_derivative_zero(spec: CounterexampleSpec, tol: float = 1e-13, max_iter: int = 60) -> complex:
    """Zero of F'/F next to the planted pair at 3/4 +- delta + i t_star (Newton)."""
    s = complex(0.75 + f_shift_closed_form(spec.delta), spec.t_star)
    zeros, poles = spec.zeros(), spec.poles()
    for _ in range(max_iter):
        g = np.sum(1.0 / (s - zeros)) - np.sum(1.0 / (s - poles))
        dg = -np.sum(1.0 / (s - zeros) ** 2) + np.sum(1.0 / (s - poles) ** 2)
        step = g / dg
        s -= step
        if abs(step) < tol:
            break
    return complex(s)


# ------------------------------------------------------------------ partial fractions

def _pair_term(sigma: float, tau):
    a = sigma - 0.25
    b = sigma - 0.75
    tau2 = np.asarray(tau) ** 2
    return (a * b - tau2) / ((a * a + tau2) * (b * b + tau2))


def partialfrac_logderiv(s: complex, pole_ordinates: Sequence[float], P: int) -> complex:
    """Truncated partial-fraction sum for Re U'/U using the first P ordinates t_p.

    Multiplicities are taken as 1; the imaginary part is zero.
    """
    if P > len(pole_ordinates):
        raise DomainError(f"P = {P} exceeds the {len(pole_ordinates)} ordinates supplied")
    sigma, t = complex(s).real, complex(s).imag
    first = (sigma * (1 - sigma) + t * t) / ((sigma * sigma + t * t) * ((1 - sigma) ** 2 + t * t))
    tp = np.asarray(pole_ordinates[:P], dtype=float)
    paired = 0.5 * (_pair_term(sigma, t - tp).sum() + _pair_term(sigma, t + tp).sum())
    return complex(first + paired, 0.0)


def partialfrac_tail(s: complex, t_last: float) -> float:
    """Integral estimate of the omitted terms p > P, density (1/pi) log(u/pi)."""
    sigma, t = complex(s).real, complex(s).imag

    def integrand(u):
        density = math.log(u / math.pi) / math.pi
        return 0.5 * density * (_pair_term(sigma, t - u) + _pair_term(sigma, t + u))

    value, _ = integrate.quad(integrand, t_last, np.inf, limit=200)
    return float(value)


def threshold_t(t1: float = 14.134725141734693790 / 2, t_hi: float = 7.0) -> float:
    """Smallest t where the p = 1 term at sigma = 3/4 outweighs the first term."""

    def gap(t):
        first = (3 / 16 + t * t) / ((9 / 16 + t * t) * (1 / 16 + t * t))
        p1 = 0.5 * (1 / (0.25 + (t - t1) ** 2) + 1 / (0.25 + (t + t1) ** 2))
        return p1 - first

    grid = np.linspace(0.0, t_hi, 701)
    values = np.array([gap(t) for t in grid])
    crossing = np.nonzero((values[:-1] < 0) & (values[1:] >= 0))[0]
    if crossing.size == 0:
        raise DomainError(f"no dominance threshold below t = {t_hi}")
    k = crossing[0]
    return float(optimize.brentq(gap, grid[k], grid[k + 1], xtol=1e-12))


# ------------------------------------------------------------------ asymptotics

ASYMPTOTIC_KINDS = ("U_lead", "V_lead", "W_lead", "W_f12", "absV", "argV")


def asymptotics(s: complex, which: str) -> complex:
    """Closed-form large-t estimators of U, V and W."""
    s = complex(s)
    sigma, t = s.real, s.imag
    if which not in ASYMPTOTIC_KINDS:
        raise DomainError(f"unknown asymptotic {which!r}")
    if t < 10:
        raise DomainError(f"asymptotics need Im s >= 10, got {t}")
    if which in ("U_lead", "V_lead", "W_lead") and sigma < 2:
        raise DomainError(f"{which} needs Re s >= 2, got {sigma}")

    lead = math.sqrt(2.0 / t) * complex(1.0, -math.sqrt(math.pi))
    if which == "U_lead":
        return complex(np.sqrt(np.pi / s) * (1 + 3 / (8 * s)) * (1 + 4.0 ** (-s) + 2 * 9.0 ** (-s)))
    if which == "V_lead":
        return 1.0 + lead
    if which == "W_lead":
        return -1j + lead
    if which == "W_f12":
        r = math.sqrt(2 * math.pi / t)
        return (-1j + (1 - 1j) * r + 2 * math.pi / t
                + (1 + 1j) * (math.pi + sigma / 2) * math.sqrt(2 * math.pi / t ** 3))
    if which == "absV":
        return complex(1.0 + math.sqrt(2.0 / t))
    return complex(-math.sqrt(2 * math.pi / t))


# ------------------------------------------------------------------ real axis

def real_zeros(fn_id: str, lo: float, hi: float, param: Optional[float] = None,
               spec: Optional[CounterexampleSpec] = None, step: float = 0.01) -> List[float]:
    """Zeros of a function that is real on the real axis, by sign scan and brentq."""
    n = max(8, int(math.ceil((hi - lo) / step)))
    # offset grid keeps the samples off half-integers
    grid = lo + (np.arange(n) + 0.5 * math.sqrt(2) / 2) * (hi - lo) / n
    values, singular = evaluate_array(fn_id, grid.astype(complex), spec, param)
    re = values.real

    def f(x):
        return float(evaluate_array(fn_id, np.array([complex(x)]), spec, param)[0][0].real)

    roots = []
    for k in range(len(grid) - 1):
        if singular[k] or singular[k + 1] or re[k] * re[k + 1] > 0:
            continue
        root = optimize.brentq(f, grid[k], grid[k + 1], xtol=1e-13)
        scale = max(1.0, abs(re[k]), abs(re[k + 1]))
        if abs(f(root)) < 1e-6 * scale:
            roots.append(float(root))
        else:
            logging.debug(f"{fn_id}: sign change at {root:.6f} is a pole")
    return roots
