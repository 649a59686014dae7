import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from quantum_tof.analysis import (
    WindowTooNarrow,
    apply_parameter,
    find_extrema,
    fringe_report,
    sweep,
)
from quantum_tof.current import TofSignal, auto_time_grid, quantum_tof
from quantum_tof.model import CatConfig, TimeGrid

T_BALLISTIC = math.sqrt(2 * 1e-2 / 9.8)


def _signal(values, t0=0.0, t1=1.0):
    values = np.asarray(values, dtype=float)
    grid = TimeGrid(t0, t1, values.size)
    return TofSignal(grid, values, -1.0, None)


def test_single_packet_report(cat):
    rep = fringe_report(quantum_tof(None, cat.replace(d=0.0)))
    assert rep.n_fringes == 0 and rep.visibility == 0.0 and rep.n_maxima == 1
    assert rep.peak_time == pytest.approx(0.0452, abs=2e-4)
    assert rep.mean_arrival == pytest.approx(T_BALLISTIC, rel=1e-2)
    assert rep.total_prob == pytest.approx(1.0, abs=1e-6)


def test_reference_cat_report(cat):
    rep = fringe_report(quantum_tof(None, cat))
    assert rep.n_fringes >= 3 and rep.visibility > 0.5
    # regression values of the fringe analysis at these parameters
    assert rep.n_fringes == 22 and rep.n_maxima == 23
    assert rep.visibility == pytest.approx(0.91545, abs=1e-3)


def test_monotone_signal_has_no_fringes():
    t = np.linspace(0, 1, 1001)
    rep = fringe_report(_signal(np.where(t < 0.999, t, 0.0) * (t > 1e-3)))
    assert rep.n_fringes == 0 and rep.visibility == 0.0


def test_window_too_narrow(cat):
    grid = auto_time_grid(cat)
    cut = TimeGrid(grid.t_start + 0.3 * (grid.t_end - grid.t_start), grid.t_end, 2001)
    with pytest.raises(WindowTooNarrow):
        fringe_report(quantum_tof(cut, cat))
    with pytest.raises(WindowTooNarrow):
        fringe_report(_signal(np.zeros(10)))


def test_perfect_fringes():
    t = np.linspace(0, 1, 20001)
    env = np.exp(-((t - 0.5) ** 2) / (2 * 0.08**2))
    rep = fringe_report(_signal(env * np.cos(2 * np.pi * 20 * t) ** 2))
    # the outermost maxima have a minimum on one side only and carry no weight
    assert rep.visibility > 0.98 and rep.max_contrast == pytest.approx(1.0, abs=1e-6)
    half = fringe_report(_signal(env * (1 + 0.5 * np.cos(2 * np.pi * 20 * t))))
    assert half.visibility == pytest.approx(0.5, abs=0.02)


@settings(max_examples=40, deadline=None)
@given(
    freq=st.floats(2.0, 40.0),
    depth=st.floats(0.0, 1.0),
    width=st.floats(0.05, 0.1),
)
def test_report_invariants(freq, depth, width):
    t = np.linspace(0, 1, 8001)
    env = np.exp(-((t - 0.5) ** 2) / (2 * width**2))
    rep = fringe_report(_signal(env * (1 + depth * np.cos(2 * np.pi * freq * t))))
    assert 0.0 <= rep.visibility <= 1.0
    assert 0.0 <= rep.max_contrast <= 1.0
    assert rep.n_fringes <= max(rep.n_maxima - 1, 0)
    assert rep.total_prob > 0


def test_refinement_invariance(cat):
    grid = auto_time_grid(cat)
    fine = TimeGrid(grid.t_start, grid.t_end, 2 * grid.n_samples - 1)
    a = fringe_report(quantum_tof(grid, cat))
    b = fringe_report(quantum_tof(fine, cat))
    assert abs(a.visibility - b.visibility) < 1e-4 * b.visibility
    assert abs(a.mean_arrival - b.mean_arrival) < 1e-4 * b.mean_arrival
    assert a.n_fringes == b.n_fringes


def test_find_extrema_prominence():
    t = np.linspace(0, 1, 2001)
    y = np.exp(-((t - 0.5) ** 2) / 0.01) * (1 + 0.001 * np.cos(200 * t))
    maxima, minima = find_extrema(y)
    assert maxima.size == 1 and minima.size == 0


def test_sweep_rows_sorted_with_errors(cat):
    table = sweep(cat, "sigma0", [2e-6, -1e-6, 1e-6])
    assert table.values == [-1e-6, 1e-6, 2e-6]
    assert not table.rows[0].ok and "NonPositiveWidth" in table.rows[0].error
    assert table.rows[1].ok and table.rows[2].ok
    assert table.column("n_fringes")[0] is None


def test_sweep_threads_match_serial(cat):
    values = [10e-6, 30e-6]
    serial = sweep(cat, "d", values, workers=1)
    threaded = sweep(cat, "d", values, workers=2)
    assert serial == threaded


def test_sweep_rejects_bad_input(cat):
    with pytest.raises(ValueError):
        sweep(cat, "temperature", [1.0])
    with pytest.raises(ValueError):
        sweep(cat, "d", [])
    with pytest.raises(ValueError):
        apply_parameter(CatConfig(), "hbar", 1.0)


def test_apply_parameter():
    cfg = CatConfig()
    assert apply_parameter(cfg, "mass", 2.0).particle.mass == 2.0
    assert apply_parameter(cfg, "g", 0.0).gravity.g == 0.0
    assert apply_parameter(cfg, "H", -0.1).detector_H == -0.1
