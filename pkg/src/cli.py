"""Command-line driver: parse, configure, dispatch, write artifacts."""
import argparse
import logging
import sys
import time
from pathlib import Path
from typing import Callable, Dict, List, Optional, Set

import numpy as np
import pandas as pd
from tqdm import tqdm

from src import combinators, complexfn, counting, critline, figures, oracle, planar, workers
from src.config import (KEY_TYPES, RunConfig, build_config, parse_complex, parse_float_list,
                        parse_window)
from src.errors import ConfigError, CritlineError
from src.utils import TableCache, remove_partial, to_json, write_csv, write_json, zeros_to_frame

LOG_FORMAT = "%(asctime)s - %(levelname)s - %(message)s"
DEFAULT_DERIV_WINDOW = (-0.5, 1.5, 416.0, 419.5)


class Run:
    """One dispatched command: its config, table cache and the files it has planned."""

    def __init__(self, config: RunConfig):
        self.config = config
        self.cache = TableCache(config.cache_dir)
        self.planned: List[Path] = []
        self.preexisting: Set[Path] = set()
        self.config_hash = config.config_hash()

    def plan(self, path: Path) -> Path:
        path = Path(path)
        if path.exists():
            self.preexisting.add(path)
        self.planned.append(path)
        return path

    def output_or(self, default_name: str) -> Path:
        return self.plan(self.config.output or self.config.cache_dir / default_name)

    def table(self, function: str, t_max: float, y: Optional[float] = None,
              spec: Optional[combinators.CounterexampleSpec] = None) -> List[critline.ZeroRecord]:
        extra = f"y={y!r}" if y is not None else (f"spec={spec!r}" if spec is not None else "")
        return self.cache.get_or_compute(
            function, t_max,
            lambda: critline.line_zeros(function, t_max, y=y, spec=spec, max_workers=self.config.workers),
            extra,
        )


def setup_logging(level: str = "INFO", log_file: Optional[str] = None) -> None:
    handlers: List[logging.Handler] = [logging.StreamHandler()]
    if log_file:
        handlers.append(logging.FileHandler(log_file))
    logging.basicConfig(level=getattr(logging, level.upper(), logging.INFO), format=LOG_FORMAT,
                        handlers=handlers, force=True)


def _tqdm_progress(label: str, total: int):
    bar = tqdm(total=total, desc=label, leave=False, file=sys.stderr)

    def update(done: int, total_: int, successful: int, failed: int) -> None:
        bar.n = done
        bar.set_postfix(ok=successful, failed=failed, refresh=False)
        bar.refresh()
        if done >= total_:
            bar.close()

    return update


def _emit(run: Run, payload: Dict, default_name: Optional[str] = None) -> None:
    """Print the report; also write it when an output path (or default name) applies."""
    print(to_json(payload, run.config_hash), end="")
    if run.config.output is not None or default_name is not None:
        write_json(payload, run.output_or(default_name), run.config_hash)


def _need(config: RunConfig, key: str):
    value = config.get(key)
    if value is None:
        raise ConfigError(key, f"required for {config.command}")
    return value


# ------------------------------------------------------------------ commands

_COMPLEXFN_EVAL = {
    "log_gamma": lambda s: complexfn.log_gamma(s),
    "digamma": lambda s: complexfn.digamma(s),
    "zeta": lambda s: complexfn.zeta(s),
    "zeta_deriv": lambda s: complexfn.zeta(s, deriv_order=1),
    "xi1": lambda s: complexfn.xi1(s, "xi1"),
    "xi": lambda s: complexfn.xi1(s, "xi"),
    "log_xi1": lambda s: complexfn.xi1(s, "log_xi1"),
    "logderiv_xi1": lambda s: complexfn.xi1(s, "logderiv_xi1"),
}


def cmd_eval(run: Run) -> int:
    c = run.config
    fn = _need(c, "fn")
    s = complex(_need(c, "s"))
    if fn in _COMPLEXFN_EVAL:
        result = _COMPLEXFN_EVAL[fn](s)
    elif fn in ("Tplus", "Tminus"):
        result = combinators.t_pm(s, "+" if fn == "Tplus" else "-")
    elif fn in ("U", "V", "W"):
        result = combinators.uvw(s, fn)
    elif fn in combinators.AUX_FUNCTIONS:
        result = combinators.aux(s, fn, _need(c, "y"))
    elif fn in combinators.OFFAXIS_FUNCTIONS:
        spec = c.spec
        if spec is None:
            raise ConfigError("delta", f"{fn} needs delta and t_star")
        result = combinators.counterexample(s, spec, fn)
    elif fn in ("xi1_2s", "xi1_2s_1"):
        result = combinators.xi1_shifted(s, fn)
    else:
        raise ConfigError("fn", f"{fn} cannot be evaluated at a point")
    _emit(run, {"fn": fn, "s": s, "value": result.value, "est_abs_err": result.est_abs_err,
                "at_pole": result.at_pole})
    return 0


def cmd_zeros(run: Run) -> int:
    c = run.config
    fn = _need(c, "fn")
    if fn not in critline.LINE_FUNCTIONS:
        raise ConfigError("fn", f"zero tables exist for {critline.LINE_FUNCTIONS}")
    t_max = c.get("tmax", critline.LINE_T_MAX)
    if fn == "U_offline":
        records = critline.line_zeros(fn, t_max, spec=c.spec)
    else:
        records = run.table(fn, t_max, y=c.get("y") if fn == "a0_y" else None)
    path = run.output_or(f"{fn}_zeros_T{t_max:g}.csv")
    write_csv(zeros_to_frame(records), path, run.config_hash)
    print(f"{len(records)} {fn} zeros up to t = {t_max:g} -> {path}")
    return 0


def cmd_experiment(run: Run) -> int:
    c = run.config
    kind = _need(c, "which")
    n = c.get("n", 1500)
    t_max = c.get("tmax", critline.LINE_T_MAX)
    zeta_zeros = run.table("zeta_line", t_max)
    t_minus = run.table("Tminus", t_max)
    if kind == "positional":
        mode = c.get("mode", "between_Tminus")
        t_plus = run.table("Tplus", t_max) if mode == "after_Tplus" else None
        report = critline.positional_experiment(n, mode, c.get("t0", 0.0), zeta_zeros, t_plus, t_minus)
        payload = {"n_tested": report.n_tested, "n_failures": report.n_failures,
                   "failure_rate": report.failure_rate, "failure_indices": report.failure_indices,
                   "mode": report.mode, "t0": report.t0}
    elif kind == "translation":
        grid = c.get("t0_grid") or list(np.round(np.arange(-0.2, 0.2 + 1e-9, 0.004), 6))
        interval = critline.translation_scan(n, grid, zeta_zeros, t_minus)
        payload = {"n": n, "grid_step": float(grid[1] - grid[0]) if len(grid) > 1 else None,
                   "feasible_interval": list(interval) if interval else None}
    else:
        raise ConfigError("which", "experiment is positional or translation")
    _emit(run, payload)
    return 0


def _variant_spec(c: RunConfig):
    variant = c.get("variant", "plain")
    return variant, (c.spec if variant == "oa" else None)


def cmd_deriv_zeros(run: Run) -> int:
    c = run.config
    variant, spec = _variant_spec(c)
    window = c.get("window", DEFAULT_DERIV_WINDOW)
    zeros = planar.tiled_derivative_zeros(window, variant, spec, max_workers=c.workers)
    frame = pd.DataFrame([{"sigma": z.location.real, "t": z.location.imag, "absV": z.absV} for z in zeros],
                         columns=["sigma", "t", "absV"])
    if c.output is not None:
        write_csv(frame, run.plan(c.output), run.config_hash)
    print(frame.to_string(index=False))
    return 0


def cmd_contours(run: Run) -> int:
    c = run.config
    window = _need(c, "window")
    of = c.get("of", "absV")
    spec = c.spec
    fn = c.get("fn", "U") + ("_oa" if spec is not None and not c.get("fn", "U").endswith("_oa") else "")
    n = c.get("resolution", 256) | 1
    field_ = planar.grid_eval(window, n, n, fn, spec, max_workers=c.workers)
    levels = c.get("levels")
    if levels is None:
        levels = [0.9, 1.0]
        if of == "absV" and window[3] - window[2] <= 12:
            variant = "oa" if spec is not None else "plain"
            for z in planar.tiled_derivative_zeros(window, variant, spec, max_workers=c.workers):
                levels += [z.absV - 1e-3, z.absV + 1e-3]
    rows = []
    for level in levels:
        rows.extend(figures.contour_rows(f"{of}={level:g}", planar.extract_contours(field_, level, of)))
    frame = pd.DataFrame(rows, columns=figures.CONTOUR_COLUMNS)
    path = run.output_or(f"contours_{run.config_hash}.csv")
    write_csv(frame, path, run.config_hash)
    print(f"{frame['contour'].nunique() if len(frame) else 0} polylines over {len(levels)} levels -> {path}")
    return 0


def cmd_propositions(run: Run) -> int:
    c = run.config
    variant, spec = _variant_spec(c)
    report = planar.check_propositions(_need(c, "window"), variant, spec, max_workers=c.workers)
    _emit(run, report.to_dict())
    return 0


def cmd_topology(run: Run) -> int:
    c = run.config
    report = planar.topology_report(_need(c, "window"), c.spec, grid=c.get("resolution", planar.TOPOLOGY_GRID),
                                    max_workers=c.workers)
    _emit(run, report)
    return 0


def cmd_count(run: Run) -> int:
    c = run.config
    fn = _need(c, "fn")
    if c.get("rect") is not None:
        param = c.get("y")
        report = counting.winding_count(fn, c.get("rect"), c.spec, param, max_workers=c.workers)
        _emit(run, report.to_dict())
        return 0
    if c.get("t_values"):
        frame = counting.count_sweep(fn, c.get("t_values"), c.get("y"), max_workers=c.workers)
        path = run.output_or(f"count_{fn}_{run.config_hash}.csv")
        write_csv(frame, path, run.config_hash)
        print(frame.to_string(index=False))
        return 0
    t_max = _need(c, "tmax")
    tables = None
    if fn != "a0_y":
        table_id = "zeta_line" if fn == "xi1_2s" else fn
        tables = {table_id: run.table(table_id, t_max)}
    report = counting.count_compare(fn, t_max, c.get("y"), tables, max_workers=c.workers)
    _emit(run, report.to_dict())
    return 0


def cmd_ystar(run: Run) -> int:
    y = _need(run.config, "y")
    zeros = counting.y_star_scan(y)
    _emit(run, {"y": y, "y_star": counting.Y_STAR, "zeros": zeros, "a0_half": counting.a0_half(y)})
    return 0


def cmd_counterexample(run: Run) -> int:
    c = run.config
    spec = c.spec or figures.OFFAXIS_SPEC
    window = c.get("window", (-0.5, 1.5, spec.t_star - 1.5, spec.t_star + 1.5))
    f_zero = combinators.f_derivative_zero(spec)
    dzs = planar.tiled_derivative_zeros(window, "oa", spec, max_workers=c.workers)
    payload = {
        "delta": spec.delta,
        "t_star": spec.t_star,
        "planted_zeros": spec.zeros(),
        "planted_poles": spec.poles(),
        "f_derivative_zero": f_zero,
        "f_shift": f_zero.real - 0.75,
        "f_shift_closed_form": combinators.f_shift_closed_form(spec.delta),
        "derivative_zeros": [[z.location.real, z.location.imag, z.absV] for z in dzs],
    }
    _emit(run, payload)
    return 0


def cmd_figure(run: Run) -> int:
    c = run.config
    number = _need(c, "number")
    out_dir = c.output or c.cache_dir / "figures"
    # the figure writers name their own files; plan the directory's expected outputs up front
    for suffix in (".svg", "_contours.csv", "_marks.csv", "_derivative_zeros.csv", "_profiles.csv"):
        run.plan(out_dir / f"figure{number}{suffix}")
    written = figures.render(number, out_dir, run.config_hash, c.get("resolution", figures.DEFAULT_RESOLUTION),
                             c.get("levels"), c.workers)
    for path in written:
        print(path)
    return 0


def cmd_fixtures(run: Run) -> int:
    path = run.output_or("oracle_values.csv")
    df = oracle.mint_fixtures(path)
    print(f"{len(df)} oracle values -> {path}")
    return 0


COMMANDS: Dict[str, Callable[[Run], int]] = {
    "eval": cmd_eval,
    "zeros": cmd_zeros,
    "experiment": cmd_experiment,
    "deriv-zeros": cmd_deriv_zeros,
    "contours": cmd_contours,
    "propositions": cmd_propositions,
    "topology": cmd_topology,
    "count": cmd_count,
    "ystar": cmd_ystar,
    "counterexample": cmd_counterexample,
    "figure": cmd_figure,
    "fixtures": cmd_fixtures,
}


# ------------------------------------------------------------------ parsing

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=None, help="key=value file; flags override it")
    common.add_argument("--cache-dir", dest="cache_dir", default=None, help="defaults to $CRITLINE_CACHE or ./cache")
    common.add_argument("-o", "--output", default=None, help="output file (directory for figure)")
    common.add_argument("--workers", type=int, default=None)
    common.add_argument("--log-level", dest="log_level", default=None)
    common.add_argument("--log-file", dest="log_file", default=None)
    common.add_argument("--no-progress", dest="no_progress", action="store_const", const=True, default=None,
                        help="disable progress bars")

    parser = argparse.ArgumentParser(prog="critline", description="Critical-line zero combinations: tables, "
                                     "contours, propositions and counts.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_text):
        return sub.add_parser(name, parents=[common], help=help_text)

    def spec_flags(p):
        p.add_argument("--delta", type=float, default=None)
        p.add_argument("--t-star", dest="t_star", type=float, default=None)

    p = add("eval", "evaluate one function at one point")
    p.add_argument("--fn", default=None)
    p.add_argument("--s", type=parse_complex, default=None, help="sigma,t or a Python complex literal")
    p.add_argument("--y", type=float, default=None, help="y (or T) for a0, I_ls, f_ki, ls1")
    spec_flags(p)

    p = add("zeros", "zero table on the critical line")
    p.add_argument("--fn", default=None)
    p.add_argument("--tmax", type=float, default=None)
    p.add_argument("--y", type=float, default=None)
    spec_flags(p)

    p = add("experiment", "positional / translation experiments")
    p.add_argument("which", nargs="?", default=None, choices=["positional", "translation"])
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--mode", default=None, choices=list(critline.POSITIONAL_MODES))
    p.add_argument("--t0", type=float, default=None)
    p.add_argument("--t0-grid", dest="t0_grid", type=parse_float_list, default=None)
    p.add_argument("--tmax", type=float, default=None)

    p = add("deriv-zeros", "zeros of U' in a window")
    p.add_argument("--window", type=parse_window, default=None)
    p.add_argument("--variant", default=None, choices=["plain", "oa"])
    spec_flags(p)

    p = add("contours", "constant-modulus contours of V or W")
    p.add_argument("--window", type=parse_window, default=None)
    p.add_argument("--fn", default=None, help="U, V or W field (default U)")
    p.add_argument("--of", default=None, choices=["absV", "absW"])
    p.add_argument("--levels", type=parse_float_list, default=None)
    p.add_argument("--resolution", type=int, default=None)
    spec_flags(p)

    p = add("propositions", "derivative-zero and contour propositions on a window")
    p.add_argument("--window", type=parse_window, default=None)
    p.add_argument("--variant", default=None, choices=["plain", "oa"])
    spec_flags(p)

    p = add("topology", "loop and quadrant structure around the V zeros of a window")
    p.add_argument("--window", type=parse_window, default=None)
    p.add_argument("--resolution", type=int, default=None)
    spec_flags(p)

    p = add("count", "zero counts: winding over --rect, or tables against the main term")
    p.add_argument("--fn", default=None)
    p.add_argument("--rect", type=parse_window, default=None)
    p.add_argument("--tmax", type=float, default=None)
    p.add_argument("--t-values", dest="t_values", type=parse_float_list, default=None)
    p.add_argument("--y", type=float, default=None)
    spec_flags(p)

    p = add("ystar", "real zeros of a0(y, sigma) in (0, 1)")
    p.add_argument("--y", type=float, default=None)

    p = add("counterexample", "off-axis family: planted points and new derivative zeros")
    p.add_argument("--window", type=parse_window, default=None)
    spec_flags(p)

    p = add("figure", "regenerate figure data and SVG")
    p.add_argument("number", type=int, nargs="?", default=None, choices=list(figures.FIGURE_NUMBERS))
    p.add_argument("--resolution", type=int, default=None)
    p.add_argument("--levels", type=parse_float_list, default=None)

    add("fixtures", "mint the high-precision oracle CSV")
    return parser


def parse_args(argv: Optional[List[str]] = None) -> RunConfig:
    args = build_parser().parse_args(argv)
    flags = {k: v for k, v in vars(args).items() if k in KEY_TYPES}
    return build_config(args.command, flags, args.config)


def main(argv: Optional[List[str]] = None) -> int:
    try:
        config = parse_args(argv)
    except CritlineError as e:
        setup_logging()
        logging.error(f"{e}")
        return e.exit_code
    setup_logging(config.log_level, config.log_file)

    run = Run(config)
    started = time.time()
    logging.info(f"Running {config.command} (config {run.config_hash})")
    try:
        if config.show_progress:
            with workers.reporting(_tqdm_progress):
                status = COMMANDS[config.command](run)
        else:
            status = COMMANDS[config.command](run)
    except CritlineError as e:
        logging.error(f"{config.command} failed: {e}")
        remove_partial(run.planned, keep=run.preexisting)
        return e.exit_code
    except Exception as e:
        logging.error(f"{config.command} failed unexpectedly: {e}")
        remove_partial(run.planned, keep=run.preexisting)
        return 1
    logging.info(f"{config.command} finished in {time.time() - started:.2f}s")
    return status
