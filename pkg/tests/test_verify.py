import time

import pytest

from quantum_tof.verify import run_checks


def test_quick_battery_passes_fast():
    start = time.perf_counter()
    results = run_checks(quick=True)
    assert time.perf_counter() - start < 30
    assert all(r.passed for r in results), [r.line() for r in results if not r.passed]


@pytest.mark.slow
def test_full_battery_passes():
    start = time.perf_counter()
    results = run_checks()
    assert time.perf_counter() - start < 300
    assert all(r.passed for r in results), [r.line() for r in results if not r.passed]
    names = {r.name for r in results}
    assert {"oracle wavefunction", "oracle detector current", "continuity", "decomposition"} <= names


def test_tampered_constant_is_caught():
    results = run_checks(quick=True, hbar_scale=1.001)
    failed = {r.name for r in results if not r.passed}
    assert {"oracle wavefunction", "decomposition"} <= failed
