"""Zeta, log-gamma, digamma and the completed zeta function xi1.

Every kernel here is vectorised over numpy complex arrays. The scalar entry
points (log_gamma, digamma, zeta, xi1) wrap them and return EvalResult.
Poles are flagged in the result, never raised.
"""
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Tuple

import numpy as np

from src.errors import DomainError

EULER_GAMMA = 0.57721566490153286061
LOG_PI = math.log(math.pi)
HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)
EPS = float(np.finfo(float).eps)

MAX_IM = 2100.0
SIGMA_MIN, SIGMA_MAX = -6.0, 7.0

# log-gamma / digamma: recurrence-shift until |z| >= 12, reflect below Re 1/2 near the axis
STIRLING_RADIUS = 12.0
REFLECT_IM = 7.0
# upper bound on the number of matrix entries materialised per Euler-Maclaurin chunk
_EM_CHUNK = 2_000_000


def bernoulli_numbers(n_max: int) -> List[Fraction]:
    """Exact B_0..B_n_max via the Akiyama-Tanigawa recurrence (B_1 = +1/2)."""
    a = [Fraction(0)] * (n_max + 1)
    numbers = []
    for m in range(n_max + 1):
        a[m] = Fraction(1, m + 1)
        for j in range(m, 0, -1):
            a[j - 1] = j * (a[j - 1] - a[j])
        numbers.append(a[0])
    return numbers


BERNOULLI = tuple(bernoulli_numbers(30))
_EM_COEFFS = tuple(float(BERNOULLI[2 * k] / math.factorial(2 * k)) for k in range(1, 16))
_STIRLING_COEFFS = tuple(float(BERNOULLI[2 * k] / (2 * k * (2 * k - 1))) for k in range(1, 9))
_STIRLING_NEXT = float(BERNOULLI[18] / (18 * 17))
_DIGAMMA_COEFFS = tuple(float(BERNOULLI[2 * k] / (2 * k)) for k in range(1, 9))
_DIGAMMA_NEXT = float(BERNOULLI[18] / 18)
_TRIGAMMA_COEFFS = tuple(float(BERNOULLI[2 * k]) for k in range(1, 9))
_TRIGAMMA_NEXT = float(BERNOULLI[18])


@dataclass(frozen=True)
class EvalResult:
    value: complex
    est_abs_err: float = 0.0
    at_pole: bool = False


def _flat(z) -> Tuple[np.ndarray, tuple]:
    arr = np.asarray(z, dtype=complex)
    return arr.reshape(-1).copy(), arr.shape


def check_window(s, sigma_pad: float = 0.0) -> None:
    """Raise DomainError when any point leaves the evaluation window."""
    arr = np.asarray(s, dtype=complex)
    if arr.size == 0:
        return
    if np.abs(arr.imag).max() > MAX_IM:
        raise DomainError(f"|Im s| = {np.abs(arr.imag).max():.3f} exceeds {MAX_IM}")
    if arr.real.min() < SIGMA_MIN - sigma_pad or arr.real.max() > SIGMA_MAX + sigma_pad:
        raise DomainError(
            f"Re s range [{arr.real.min():.3f}, {arr.real.max():.3f}] outside [{SIGMA_MIN}, {SIGMA_MAX}]"
        )


def _is_nonpositive_integer(z: np.ndarray) -> np.ndarray:
    return (z.imag == 0) & (z.real <= 0) & (z.real == np.round(z.real))


def _shift_count(w: np.ndarray) -> np.ndarray:
    need = np.sqrt(np.maximum(STIRLING_RADIUS ** 2 - w.imag ** 2, 0.0)) - w.real
    return np.maximum(np.ceil(need), 0).astype(int)


# ---------------------------------------------------------------- log-gamma

def _stirling(z: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    zinv = 1.0 / z
    zinv2 = zinv * zinv
    series = np.zeros_like(z)
    power = zinv.copy()
    for c in _STIRLING_COEFFS:
        series += c * power
        power = power * zinv2
    value = (z - 0.5) * np.log(z) - z + HALF_LOG_2PI + series
    return value, np.abs(_STIRLING_NEXT * power)


def _log_gamma_shifted(w: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    m = _shift_count(w)
    acc = np.zeros_like(w)
    for j in range(int(m.max(initial=0))):
        sel = m > j
        acc[sel] += np.log(w[sel] + j)
    value, err = _stirling(w + m)
    value = value - acc
    return value, err + 4 * EPS * (np.abs(value) + np.abs(acc))


def _log_gamma(z: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    flip = z.imag < 0
    w = np.where(flip, np.conj(z), z)
    pole = _is_nonpositive_integer(w)
    reflect = (w.real < 0.5) & (w.imag < REFLECT_IM) & ~pole
    direct = ~reflect & ~pole

    value = np.zeros_like(w)
    err = np.zeros(w.shape)
    if direct.any():
        value[direct], err[direct] = _log_gamma_shifted(w[direct])
    if reflect.any():
        r = w[reflect]
        lg, lg_err = _log_gamma_shifted(1.0 - r)
        # branch correction keeps the result on the principal sheet of log Gamma
        correction = np.copysign(2 * np.pi, r.imag) * np.floor(0.5 * r.real + 0.25)
        value[reflect] = LOG_PI + 1j * correction - np.log(np.sin(np.pi * r)) - lg
        err[reflect] = lg_err + 8 * EPS * np.abs(value[reflect])
    value[pole] = complex(np.inf, 0.0)
    err[pole] = np.inf
    return np.where(flip, np.conj(value), value), err, pole


def log_gamma_array(z) -> np.ndarray:
    flat, shape = _flat(z)
    value, _, _ = _log_gamma(flat)
    return value.reshape(shape)


def log_gamma(z: complex) -> EvalResult:
    """Principal-branch log Gamma(z), cut along the negative real axis."""
    value, err, pole = _log_gamma(np.array([z], dtype=complex))
    return EvalResult(complex(value[0]), float(err[0]), bool(pole[0]))


# ---------------------------------------------------------------- digamma

def _digamma_shifted(w: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    m = _shift_count(w)
    acc = np.zeros_like(w)
    for j in range(int(m.max(initial=0))):
        sel = m > j
        acc[sel] += 1.0 / (w[sel] + j)
    z = w + m
    zinv2 = 1.0 / (z * z)
    series = np.zeros_like(z)
    power = zinv2.copy()
    for c in _DIGAMMA_COEFFS:
        series += c * power
        power = power * zinv2
    value = np.log(z) - 0.5 / z - series - acc
    return value, np.abs(_DIGAMMA_NEXT * power) + 4 * EPS * (np.abs(value) + np.abs(acc))


def _digamma(z: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    flip = z.imag < 0
    w = np.where(flip, np.conj(z), z)
    pole = _is_nonpositive_integer(w)
    reflect = (w.real < 0.5) & (w.imag < REFLECT_IM) & ~pole
    direct = ~reflect & ~pole

    value = np.zeros_like(w)
    err = np.zeros(w.shape)
    if direct.any():
        value[direct], err[direct] = _digamma_shifted(w[direct])
    if reflect.any():
        r = w[reflect]
        psi, psi_err = _digamma_shifted(1.0 - r)
        value[reflect] = psi - np.pi / np.tan(np.pi * r)
        err[reflect] = psi_err + 8 * EPS * np.abs(value[reflect])
    value[pole] = complex(np.inf, 0.0)
    err[pole] = np.inf
    return np.where(flip, np.conj(value), value), err, pole


def digamma_array(z) -> np.ndarray:
    flat, shape = _flat(z)
    value, _, _ = _digamma(flat)
    return value.reshape(shape)


def digamma(z: complex) -> EvalResult:
    value, err, pole = _digamma(np.array([z], dtype=complex))
    return EvalResult(complex(value[0]), float(err[0]), bool(pole[0]))


def _trigamma(z: np.ndarray) -> np.ndarray:
    """psi'(z) for Re z > 0: recurrence shift, then the asymptotic series."""
    flip = z.imag < 0
    w = np.where(flip, np.conj(z), z)
    m = _shift_count(w)
    acc = np.zeros_like(w)
    for j in range(int(m.max(initial=0))):
        sel = m > j
        acc[sel] += 1.0 / (w[sel] + j) ** 2
    zs = w + m
    zinv = 1.0 / zs
    zinv2 = zinv * zinv
    series = np.zeros_like(zs)
    power = zinv * zinv2
    for c in _TRIGAMMA_COEFFS:
        series += c * power
        power = power * zinv2
    value = zinv + 0.5 * zinv2 + series + acc
    return np.where(flip, np.conj(value), value)


# ---------------------------------------------------------------- zeta

def em_length(max_abs_im: float) -> int:
    """Number of leading Euler-Maclaurin terms for a given height."""
    return max(50, int(math.ceil(1.3 * max_abs_im)))


def _em_tail(s: np.ndarray, n: int, deriv: int) -> Tuple[np.ndarray, np.ndarray]:
    log_n = math.log(n)
    n_s = np.exp(-s * log_n)
    n_1s = n * n_s
    sm1 = s - 1.0
    if deriv == 2:
        tail = (log_n ** 2 * n_1s / sm1 + 2 * log_n * n_1s / sm1 ** 2 + 2 * n_1s / sm1 ** 3
                + 0.5 * log_n ** 2 * n_s)
    elif deriv:
        tail = -log_n * n_1s / sm1 - n_1s / sm1 ** 2 - 0.5 * log_n * n_s
    else:
        tail = n_1s / sm1 + 0.5 * n_s

    n2 = float(n) * n
    poch = s.copy()
    dpoch = np.ones_like(s)
    d2poch = np.zeros_like(s)
    power = n_1s / n2
    term = np.zeros_like(s)
    for k, c in enumerate(_EM_COEFFS, start=1):
        if k > 1:
            a = s + (2 * k - 3)
            b = s + (2 * k - 2)
            d2poch = d2poch * a * b + 2 * dpoch * (a + b) + 2 * poch
            dpoch = dpoch * a * b + poch * (a + b)
            poch = poch * a * b
            power = power / n2
        if deriv == 2:
            term = c * power * (d2poch - 2 * log_n * dpoch + log_n ** 2 * poch)
        elif deriv:
            term = c * power * (dpoch - log_n * poch)
        else:
            term = c * poch * power
        tail = tail + term
    return tail, np.abs(term)


def _zeta_em(s: np.ndarray, deriv: int = 0, n_terms: Optional[int] = None) -> Tuple[np.ndarray, np.ndarray]:
    value = np.zeros_like(s)
    err = np.zeros(s.shape)
    if s.size == 0:
        return value, err
    n = n_terms or em_length(float(np.abs(s.imag).max()))
    log_k = np.log(np.arange(1, n, dtype=float))
    rows = max(1, _EM_CHUNK // n)
    for start in range(0, s.size, rows):
        chunk = s[start:start + rows]
        terms = np.exp(-np.outer(chunk, log_k))
        if deriv == 2:
            head = terms @ (log_k * log_k)
            scale = np.abs(terms) @ (log_k * log_k)
        elif deriv:
            head = -(terms @ log_k)
            scale = np.abs(terms) @ log_k
        else:
            head = terms.sum(axis=1)
            scale = np.abs(terms).sum(axis=1)
        tail, tail_err = _em_tail(chunk, n, deriv)
        value[start:start + rows] = head + tail
        # phase rounding grows with |t| log n
        err[start:start + rows] = EPS * (4.0 + np.abs(chunk.imag) * log_k[-1]) * scale + tail_err
    return value, err


def _trivial_zero_derivative(s: np.ndarray) -> np.ndarray:
    # zeta'(-2k) = (-1)^k (2k)! zeta(2k+1) / (2 (2 pi)^(2k))
    k = np.round(-s.real / 2).astype(int)
    odd_zeta, _ = _zeta_em((2 * k + 1).astype(complex))
    fact = np.array([math.factorial(2 * int(j)) for j in k], dtype=float)
    sign = np.where(k % 2 == 0, 1.0, -1.0)
    return sign * fact * odd_zeta / (2.0 * (2 * np.pi) ** (2 * k))


def _zeta(s: np.ndarray, deriv: int = 0, n_terms: Optional[int] = None) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    pole = s == 1.0
    left = (s.real < 0) & ~pole
    right = ~left & ~pole
    value = np.zeros_like(s)
    err = np.zeros(s.shape)
    if right.any():
        value[right], err[right] = _zeta_em(s[right], deriv, n_terms)
    if left.any():
        sl = s[left]
        lxi, lxi_err = _log_xi1_right(1.0 - sl)
        lg, lg_err, lg_pole = _log_gamma(sl / 2.0)
        with np.errstate(all="ignore"):
            zl = np.exp(lxi + 0.5 * sl * LOG_PI - lg)
        zl[lg_pole] = 0.0
        zl_err = np.abs(zl) * (lxi_err + lg_err)
        if deriv:
            ld, ld_err, _ = _logderiv_xi1_right(1.0 - sl)
            psi, psi_err, _ = _digamma(sl / 2.0)
            with np.errstate(all="ignore"):
                dzl = zl * (-ld + 0.5 * LOG_PI - 0.5 * psi)
            if lg_pole.any():
                dzl[lg_pole] = _trivial_zero_derivative(sl[lg_pole])
            zl_err = np.abs(dzl) * (lxi_err + lg_err) + np.abs(zl) * (ld_err + psi_err)
            zl_err[lg_pole] = 1e-15 * np.abs(dzl[lg_pole])
            zl = dzl
        value[left] = zl
        err[left] = zl_err
    value[pole] = complex(np.inf, 0.0)
    err[pole] = np.inf
    return value, err, pole


def zeta_array(s, deriv: int = 0, n_terms: Optional[int] = None) -> np.ndarray:
    flat, shape = _flat(s)
    value, _, _ = _zeta(flat, deriv, n_terms)
    return value.reshape(shape)


def zeta(s: complex, deriv_order: int = 0, n_terms: Optional[int] = None) -> EvalResult:
    """zeta(s) or zeta'(s) by Euler-Maclaurin; reflection for Re s < 0."""
    if deriv_order not in (0, 1):
        raise DomainError(f"deriv_order must be 0 or 1, got {deriv_order}")
    check_window(s)
    value, err, pole = _zeta(np.array([s], dtype=complex), deriv_order, n_terms)
    return EvalResult(complex(value[0]), float(err[0]), bool(pole[0]))


# ---------------------------------------------------------------- xi1

def _log_xi1_right(w: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    z, z_err = _zeta_em(w)
    lg, lg_err, _ = _log_gamma(w / 2.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        value = -0.5 * w * LOG_PI + lg + np.log(z)
        err = lg_err + z_err / np.abs(z) + EPS * np.abs(w) * LOG_PI
    return value, err


def _logderiv_xi1_right(w: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    z, z_err = _zeta_em(w)
    dz, dz_err = _zeta_em(w, deriv=1)
    psi, psi_err, _ = _digamma(w / 2.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = dz / z
        value = -0.5 * LOG_PI + 0.5 * psi + ratio
        err = 0.5 * psi_err + (dz_err + np.abs(ratio) * z_err) / np.abs(z)
    bad = ~np.isfinite(value)
    return value, err, bad


def log_xi1_array(s) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Principal log xi1 over an array: (values, est_abs_err, pole mask).

    Uses xi1(s) = xi1(1 - s) so the series only ever runs at Re >= 1/2.
    """
    flat, shape = _flat(s)
    pole = (flat == 0.0) | (flat == 1.0)
    w = np.where(flat.real < 0.5, 1.0 - flat, flat)
    w = np.where(pole, 2.0, w)
    value, err = _log_xi1_right(w)
    value[pole] = complex(np.inf, 0.0)
    err[pole] = np.inf
    return value.reshape(shape), err.reshape(shape), pole.reshape(shape)


def logderiv_xi1_array(s) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """xi1'/xi1 over an array: (values, est_abs_err, singular mask)."""
    flat, shape = _flat(s)
    pole = (flat == 0.0) | (flat == 1.0)
    left = flat.real < 0.5
    w = np.where(left, 1.0 - flat, flat)
    w = np.where(pole, 2.0, w)
    value, err, bad = _logderiv_xi1_right(w)
    value = np.where(left, -value, value)
    singular = pole | bad
    value[pole] = complex(np.inf, 0.0)
    err[singular] = np.inf
    return value.reshape(shape), err.reshape(shape), singular.reshape(shape)


def logderiv2_xi1_array(s) -> Tuple[np.ndarray, np.ndarray]:
    """(xi1'/xi1)' over an array: (values, singular mask). Even under s -> 1 - s."""
    flat, shape = _flat(s)
    pole = (flat == 0.0) | (flat == 1.0)
    w = np.where(flat.real < 0.5, 1.0 - flat, flat)
    w = np.where(pole, 2.0, w)
    z, _ = _zeta_em(w)
    dz, _ = _zeta_em(w, deriv=1)
    d2z, _ = _zeta_em(w, deriv=2)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = dz / z
        value = 0.25 * _trigamma(w / 2.0) + d2z / z - ratio * ratio
    singular = pole | ~np.isfinite(value)
    value[pole] = complex(np.inf, 0.0)
    return value.reshape(shape), singular.reshape(shape)


XI_VARIANTS = ("xi1", "xi", "log_xi1", "logderiv_xi1")


def xi1(s: complex, variant: str = "xi1") -> EvalResult:
    """Completed zeta xi1 = pi^(-s/2) Gamma(s/2) zeta(s) and its relatives."""
    if variant not in XI_VARIANTS:
        raise DomainError(f"unknown xi1 variant {variant!r}")
    check_window(s)
    s = complex(s)

    if variant == "logderiv_xi1":
        value, err, singular = logderiv_xi1_array(np.array([s]))
        return EvalResult(complex(value[0]), float(err[0]), bool(singular[0]))

    if variant == "xi" and s in (0.0, 1.0):
        # the simple pole of xi1 cancels against s(s - 1)
        return EvalResult(0.5 + 0j, EPS, False)

    log_value, log_err, pole = log_xi1_array(np.array([s]))
    if pole[0]:
        return EvalResult(complex(np.inf, 0.0), float("inf"), True)
    if variant == "log_xi1":
        return EvalResult(complex(log_value[0]), float(log_err[0]), False)

    value = np.exp(log_value[0])
    if variant == "xi":
        value = 0.5 * s * (s - 1.0) * value
    if value == 0:
        logging.warning(f"xi1 underflows at s={s}; use the log variant")
    return EvalResult(complex(value), float(abs(value) * log_err[0] + EPS * abs(value)), False)
