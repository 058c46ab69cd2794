import math
import sys
from pathlib import Path

import numpy as np
import pytest

# Add src directory to path
sys.path.append(str(Path(__file__).parent.parent))

from src.combinators import CounterexampleSpec
from src.critline import (arg_u_profile, hardy_z, interlacing_check, ki_lemma_report, ki_theta, line_zeros,
                          positional_experiment, refine_brackets, track_phase, translation_scan)
from src.errors import DomainError, InsufficientTableError


def test_track_starts_on_branch(phase_track_60):
    """theta1(0+) = -pi/2, so Ki's theta starts at pi"""
    assert abs(phase_track_60.theta1[0] + math.pi / 2) < 1e-3
    assert abs(ki_theta(phase_track_60)[0] - math.pi) < 1e-3


def test_track_is_continuous(phase_track_60):
    steps = np.abs(np.diff(phase_track_60.theta1))
    assert steps.max() < math.pi / 2
    assert np.all(np.diff(phase_track_60.t) > 0)


def test_ki_lemma_properties(phase_track_60):
    report = ki_lemma_report(phase_track_60)
    assert report["above_half_pi"]
    assert report["increasing_after_7"]
    lo, hi = report["slope_ratio_range"]
    assert lo <= hi


def test_track_rejects_bad_range():
    with pytest.raises(DomainError):
        track_phase(5.0, 2.0)
    with pytest.raises(DomainError):
        track_phase(0.0, 5000.0)


def test_first_t_plus_and_t_minus_zeros(tplus_60, tminus_60):
    assert abs(tplus_60[0].t - 6.97468) < 1e-4
    assert abs(tminus_60[0].t - 7.66111) < 1e-4
    assert all(r.location.real == 0.5 for r in tplus_60)
    assert [r.index for r in tplus_60] == list(range(1, len(tplus_60) + 1))


def test_zero_residuals_small(tplus_60, tminus_60):
    assert max(r.residual for r in tplus_60) < 1e-6
    assert max(r.residual for r in tminus_60) < 1e-6


def test_t_plus_and_t_minus_interlace(tplus_60, tminus_60):
    assert interlacing_check(tplus_60, tminus_60) == []


def test_interlacing_of_a_list_with_itself(tplus_60):
    violations = interlacing_check(tplus_60, tplus_60)
    assert len(violations) == len([r for r in tplus_60 if r.t >= 7.6])
    assert all(v["source"] == "tie" for v in violations)


def test_zeta_line_zeros_match_known_ordinates(zeta_line_210):
    assert abs(zeta_line_210[0].t - 7.067362) < 1e-6
    assert abs(zeta_line_210[1].t - 21.022039638771555 / 2) < 1e-6
    assert len([r for r in zeta_line_210 if r.t <= 50]) == 29


def test_hardy_z_vanishes_at_first_zero():
    assert abs(hardy_z(14.134725141734694)) < 1e-8


def test_refine_brackets_on_sine():
    roots, widths = refine_brackets(np.sin, np.array([3.0, 6.0]), np.array([3.3, 6.5]))
    assert np.allclose(roots, [math.pi, 2 * math.pi], atol=1e-9)
    assert np.all(widths < 1e-6)


def test_a0_line_zeros_count():
    records = line_zeros("a0_y", 30.0, y=2.0)
    assert len(records) > 0
    assert max(r.residual for r in records) < 1e-6


def test_offline_zeros_are_the_planted_ones():
    spec = CounterexampleSpec(0.05, 418.85)
    records = line_zeros("U_offline", 1000.0, spec=spec)
    assert len(records) == 2
    assert {round(r.location.real, 6) for r in records} == {0.7, 0.8}
    assert all(abs(r.t - 418.85) < 1e-12 for r in records)
    with pytest.raises(DomainError):
        line_zeros("U_offline", 1000.0)


def test_line_zeros_rejects_height():
    with pytest.raises(DomainError):
        line_zeros("Tplus", 1500.0)
    with pytest.raises(DomainError):
        line_zeros("bogus", 10.0)


def test_arg_u_decreases_on_the_line():
    frame, report = arg_u_profile(0.5, 10.0, 30.0)
    assert list(frame.columns) == ["t", "arg_u"]
    assert report["monotone_decreasing"]


def test_positional_between_t_minus():
    zeta = [0.5, 1.5, 2.5]
    t_minus = [1.0, 2.0, 3.0]
    report = positional_experiment(3, "between_Tminus", 0.0, zeta, t_minus=t_minus)
    assert report.n_failures == 0
    shifted = positional_experiment(3, "between_Tminus", 0.6, zeta, t_minus=t_minus)
    assert shifted.failure_indices == [1, 2, 3]
    assert shifted.failure_rate == 1.0


def test_positional_after_t_plus():
    report = positional_experiment(2, "after_Tplus", 0.0, [1.5, 2.5], t_plus=[1.0, 3.0])
    assert report.failure_indices == [2]
    assert report.n_failures <= report.n_tested


def test_positional_needs_tables():
    with pytest.raises(InsufficientTableError):
        positional_experiment(5, "between_Tminus", 0.0, [0.5], t_minus=[1.0])
    with pytest.raises(InsufficientTableError):
        positional_experiment(1, "after_Tplus", 0.0, [0.5])
    with pytest.raises(DomainError):
        positional_experiment(1, "sideways", 0.0, [0.5], t_minus=[1.0])
    with pytest.raises(DomainError):
        positional_experiment(1501, "between_Tminus", 0.0, [0.5], t_minus=[1.0])


def test_translation_scan_synthetic():
    grid = [-0.2, -0.1, 0.0, 0.1, 0.2]
    assert translation_scan(3, grid, [0.5, 1.5, 2.5], [1.0, 2.0, 3.0]) == (-0.2, 0.2)
    # a zero hugging its upper bound only survives shifts that push the bound up
    assert translation_scan(1, grid, [0.95], [1.0]) == (0.0, 0.2)
    with pytest.raises(DomainError):
        translation_scan(3, [0.5], [0.5, 1.5, 2.5], [1.0, 2.0, 3.0])


@pytest.mark.slow
def test_t_plus_table_to_1000(tables_1000):
    tplus = tables_1000["Tplus"]
    assert len(tplus) == 1517
    assert abs(tplus[-1].t - 999.912) < 1e-3
    assert interlacing_check(tplus, tables_1000["Tminus"]) == []


@pytest.mark.slow
def test_positional_experiments(tables_1000):
    zeta, tplus, tminus = tables_1000["zeta_line"], tables_1000["Tplus"], tables_1000["Tminus"]
    after = positional_experiment(1500, "after_Tplus", 0.0, zeta, t_plus=tplus)
    assert after.n_failures == 232
    between = positional_experiment(1500, "between_Tminus", 0.0, zeta, t_minus=tminus)
    assert between.failure_indices == [921, 995, 1307, 1495]
    assert positional_experiment(1500, "between_Tminus", -0.05, zeta, t_minus=tminus).n_failures == 0


@pytest.mark.slow
def test_translation_interval(tables_1000):
    grid = np.round(np.arange(-0.12, 0.0 + 1e-9, 0.002), 6)
    interval = translation_scan(1500, grid, tables_1000["zeta_line"], tables_1000["Tminus"])
    assert interval is not None
    assert abs(interval[0] + 0.080) <= 0.004
    assert abs(interval[1] + 0.036) <= 0.004
    high = np.round(np.arange(0.1, 0.2 + 1e-9, 0.01), 6)
    assert translation_scan(1500, high, tables_1000["zeta_line"], tables_1000["Tminus"]) is None
