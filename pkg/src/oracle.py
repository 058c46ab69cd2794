"""High-precision reference values (mpmath) used to mint test fixtures.

Nothing in the main evaluation path imports this module.
"""
import logging
from pathlib import Path
from typing import Callable, Dict, Iterable, List, Tuple

import mpmath
import pandas as pd

ORACLE_DPS = 40
FIXTURE_COLUMNS = ["function", "re_in", "im_in", "re_out", "im_out", "digits"]
DEFAULT_FIXTURE_PATH = Path(__file__).parent.parent / "data" / "fixtures" / "oracle_values.csv"
ZERO_SCAN_MAX = 50.0  # the first ten zeta zeros


def _mp(z: complex):
    return mpmath.mpc(z.real, z.imag)


def _xi1(s):
    return mpmath.pi ** (-s / 2) * mpmath.gamma(s / 2) * mpmath.zeta(s)


def _logderiv2_xi1(s):
    z = mpmath.zeta(s)
    d1 = mpmath.zeta(s, derivative=1)
    d2 = mpmath.zeta(s, derivative=2)
    return mpmath.psi(1, s / 2) / 4 + d2 / z - (d1 / z) ** 2


ORACLE_FUNCTIONS: Dict[str, Callable] = {
    "log_gamma": mpmath.loggamma,
    "digamma": mpmath.digamma,
    "zeta": mpmath.zeta,
    "zeta_deriv": lambda s: mpmath.zeta(s, derivative=1),
    "xi1": _xi1,
    "log_xi1": lambda s: mpmath.log(_xi1(s)),
    "logderiv2_xi1": _logderiv2_xi1,
}


def evaluate(function: str, z: complex, dps: int = ORACLE_DPS) -> complex:
    """Evaluate a reference function at z with dps digits, returned as a double."""
    with mpmath.workdps(dps):
        value = ORACLE_FUNCTIONS[function](_mp(complex(z)))
        return complex(value)


def zeta_zero_ordinates(n: int, dps: int = 25) -> List[float]:
    """First n ordinates of critical-line zeta zeros."""
    with mpmath.workdps(dps):
        return [float(mpmath.zetazero(k).imag) for k in range(1, n + 1)]


def sign_scan_zeros(u_max: float, step: float = 0.05, dps: int = 20) -> List[float]:
    """Zeros of Hardy's Z(u) on (0, u_max] from a sign scan plus findroot.

    Independent of the Euler-Maclaurin path: mpmath evaluates Z directly.
    """
    zeros = []
    with mpmath.workdps(dps):
        u = step
        prev = mpmath.siegelz(u)
        while u < u_max:
            nxt = u + step
            cur = mpmath.siegelz(nxt)
            if prev * cur < 0:
                root = mpmath.findroot(mpmath.siegelz, (u, nxt), solver="anderson")
                zeros.append(float(root))
            u, prev = nxt, cur
    return zeros


def default_points() -> List[Tuple[str, complex]]:
    points = []
    for z in (1, 2, 3, 0.5, 1.5, 0.5 + 10j):
        points.append(("log_gamma", complex(z)))
    for z in (1, 2, 0.5, 0.25 + 500j):
        points.append(("digamma", complex(z)))
    for s in (2, 3, 4, 0, -1, 0.5):
        points.append(("zeta", complex(s)))
    return points


def mint_fixtures(path: Path = DEFAULT_FIXTURE_PATH, points: Iterable[Tuple[str, complex]] = None,
                  dps: int = ORACLE_DPS, zero_scan_max: float = ZERO_SCAN_MAX) -> pd.DataFrame:
    """Evaluate the oracle at each point and write the fixtures CSV.

    The zeta_zero rows hold (index, ordinate) pairs from a sign scan of Z(u)
    up to zero_scan_max; pass 0 to skip them.
    """
    rows = []
    for function, z in (points or default_points()):
        value = evaluate(function, z, dps)
        rows.append({
            "function": function,
            "re_in": z.real,
            "im_in": z.imag,
            "re_out": value.real,
            "im_out": value.imag,
            "digits": dps,
        })
    if zero_scan_max > 0:
        for k, ordinate in enumerate(sign_scan_zeros(zero_scan_max), start=1):
            rows.append({
                "function": "zeta_zero",
                "re_in": float(k),
                "im_in": 0.0,
                "re_out": ordinate,
                "im_out": 0.0,
                "digits": dps,
            })
    df = pd.DataFrame(rows, columns=FIXTURE_COLUMNS)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    df.to_csv(path, index=False, float_format="%.17g")
    logging.info(f"Wrote {len(df)} oracle values to {path}")
    return df


def load_fixtures(path: Path = DEFAULT_FIXTURE_PATH) -> pd.DataFrame:
    return pd.read_csv(path)
