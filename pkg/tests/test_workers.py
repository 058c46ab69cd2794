import sys
import time
from pathlib import Path

import pytest

# Add src directory to path
sys.path.append(str(Path(__file__).parent.parent))

from src.workers import reporting, run_concurrent


def test_results_keep_input_order():
    def slow_square(x):
        time.sleep(0.01 * (5 - x))
        return x * x

    assert run_concurrent(slow_square, [0, 1, 2, 3, 4], max_workers=5) == [0, 1, 4, 9, 16]


def test_progress_callback_final_call():
    calls = []
    run_concurrent(lambda x: x, list(range(6)), max_workers=3,
                   progress_callback=lambda *args: calls.append(args))
    assert len(calls) == 6
    assert calls[-1] == (6, 6, 6, 0)


def test_failures_become_none():
    def fragile(x):
        if x == 2:
            raise ValueError("bad item")
        return x

    calls = []
    results = run_concurrent(fragile, [1, 2, 3], progress_callback=lambda *args: calls.append(args),
                             raise_on_error=False)
    assert results == [1, None, 3]
    assert calls[-1] == (3, 3, 2, 1)
    with pytest.raises(ValueError):
        run_concurrent(fragile, [1, 2, 3])


def test_empty_input():
    assert run_concurrent(lambda x: x, []) == []


def test_reporting_installs_factory():
    seen = []

    def factory(label, total):
        seen.append((label, total))
        return lambda *args: None

    with reporting(factory):
        run_concurrent(lambda x: x, [1, 2], label="grid rows")
    run_concurrent(lambda x: x, [1, 2, 3], label="after")
    assert seen == [("grid rows", 2)]
