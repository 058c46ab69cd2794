import math
import sys
from pathlib import Path

import pytest

# Add src directory to path
sys.path.append(str(Path(__file__).parent.parent))

from src.counting import (Y_STAR, a0_half, count_compare, count_sweep, deviation_bound, main_term,
                          real_axis_correction, winding_count, y_star_scan)
from src.errors import DomainError


def test_main_term_values():
    assert abs(main_term(100.0) - 78.32) < 0.1
    assert abs(main_term(1000.0) - 1516.1) < 0.1


def test_main_term_a0_reduces_at_y_one():
    assert main_term(50.0, "a0_y", 1.0) == main_term(50.0)
    assert main_term(50.0, "a0_y", 2.0) > main_term(50.0)


def test_main_term_domain():
    with pytest.raises(DomainError):
        main_term(1.0)
    with pytest.raises(DomainError):
        main_term(10.0, "a0_y")
    with pytest.raises(DomainError):
        main_term(10.0, "Tplus")


def test_deviation_bound():
    assert math.isclose(deviation_bound(100.0), 10 + 2 * math.log(100.0))


def test_winding_t_plus_strip():
    """one zero at t ~ 6.97 against the poles at 0 and 1"""
    report = winding_count("Tplus", (-1.0, 2.0, 0.0, 10.0))
    assert report.winding == -1


def test_winding_xi1_2s_quarter_line():
    report = winding_count("xi1_2s", (0.0, 0.5, 0.0, 50.0))
    assert report.winding == 29


def test_winding_u_both_sides():
    assert winding_count("U", (0.6, 0.9, 5.0, 12.0)).winding == 2
    assert winding_count("U", (0.1, 0.4, 5.0, 12.0)).winding == -2


def test_real_axis_correction_t_minus():
    real = real_axis_correction("Tminus", -1.0, 5.0)
    assert real["poles"] == [0.0, 0.5, 1.0]
    assert any(abs(z - 3.91231) < 1e-4 for z in real["zeros"])
    assert real["correction"] == len(real["zeros"]) - 3


def test_real_axis_correction_unknown():
    with pytest.raises(DomainError):
        real_axis_correction("W", 0.0, 1.0)


def test_y_star_constant():
    assert abs(Y_STAR - 7.055507) < 1e-5
    assert a0_half(7.0) < 0 < a0_half(7.2)


def test_y_star_scan():
    assert y_star_scan(7.0) == []
    roots = y_star_scan(7.2)
    assert len(roots) == 2
    assert abs(sum(roots) - 1.0) < 1e-9
    with pytest.raises(DomainError):
        y_star_scan(0.5)


def test_count_a0_within_bound():
    report = count_compare("a0_y", 30.0, y=2.0)
    assert report.count > 0
    assert report.details["within_bound"]
    assert abs(report.deviation) <= deviation_bound(30.0)


def test_count_compare_checks():
    with pytest.raises(DomainError):
        count_compare("U", 50.0)
    with pytest.raises(DomainError):
        count_compare("Tplus", 1500.0)


def test_count_sweep_columns(tplus_60):
    frame = count_sweep("Tplus", [20.0, 60.0])
    assert list(frame["T"]) == [20.0, 60.0]
    assert frame.loc[1, "count"] == len(tplus_60)
    assert frame["within_bound"].all()


@pytest.mark.slow
def test_t_plus_count_to_1000(tables_1000):
    report = count_compare("Tplus", 1000.0, tables=tables_1000)
    assert report.count == 1517
    assert report.details["within_bound"]


@pytest.mark.parametrize("y", [1.0, 4.0, 7.0])
def test_no_real_zeros_below_y_star(y):
    assert y_star_scan(y) == []


@pytest.mark.parametrize("y,sigma0", [(7.06, 0.4846), (10.0, 0.1866), (20.0, 0.0669)])
def test_symmetric_pair_above_y_star(y, sigma0):
    roots = y_star_scan(y)
    assert len(roots) == 2
    assert abs(roots[0] - sigma0) < 1e-3
    assert abs(roots[1] - (1.0 - sigma0)) < 1e-3


def test_transition_brackets_y_star():
    assert y_star_scan(7.0555 - 1e-2) == []
    assert len(y_star_scan(7.0555 + 1e-2)) == 2


def test_a0_count_growth_matches_main_term():
    """between T = 10 and 30 the a0(2, s) count grows like its main term, (2/pi) log y slope included"""
    low = count_compare("a0_y", 10.0, y=2.0)
    high = count_compare("a0_y", 30.0, y=2.0)
    growth = high.count - low.count
    expected = main_term(30.0, "a0_y", 2.0) - main_term(10.0, "a0_y", 2.0)
    assert abs(growth - expected) <= 0.15 * expected


def test_winding_unchanged_by_small_boundary_moves():
    base = winding_count("U", (0.6, 0.9, 5.0, 12.0))
    moved = winding_count("U", (0.61, 0.89, 4.99, 12.01))
    assert base.details["nudges"] == 0
    assert moved.winding == base.winding == 2


def test_winding_adds_over_adjacent_rectangles():
    whole = winding_count("U", (0.6, 0.9, 5.0, 12.0)).winding
    lower = winding_count("U", (0.6, 0.9, 5.0, 9.0)).winding
    upper = winding_count("U", (0.6, 0.9, 9.0, 12.0)).winding
    assert (lower, upper) == (1, 1)
    assert lower + upper == whole


@pytest.mark.slow
@pytest.mark.parametrize("fn_id", ["Tplus", "Tminus"])
@pytest.mark.parametrize("T", [100.0, 500.0, 1000.0])
def test_line_counts_within_bound(tables_1000, fn_id, T):
    report = count_compare(fn_id, T, tables=tables_1000)
    assert report.details["within_bound"], (fn_id, T, report.deviation)
