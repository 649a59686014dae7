"""Acceptance criteria, one test per criterion.

Each test prints a single ``PASS``/``FAIL`` line with the measured numbers
and then asserts. Run ``python tests/test_acceptance.py`` for the summary
lines alone, or ``pytest tests/test_acceptance.py -v`` for the full report.
"""
import math
import subprocess
import sys
import time

import numpy as np
import pytest

from quantum_tof import evolution as ev
from quantum_tof import oracle
from quantum_tof.analysis import fringe_report, sweep
from quantum_tof.classical import ThermalCloud, classical_peak, classical_total, ks_statistic, monte_carlo_tof
from quantum_tof.current import (
    auto_time_window,
    current_breakdown,
    direct_current,
    phase_delta,
    quantum_tof,
)
from quantum_tof.geometry3d import pi1, pi2, pi3, pi4, surface_flux
from quantum_tof.model import CatConfig, Gravity, Particle, TimeGrid, as_validated, sodium
from quantum_tof.verify import continuity_study, observed_orders

# tolerances
DECOMPOSITION_REL = 1e-10
DECOMPOSITION_SECONDS = 5.0
ORACLE_REL = 1e-5
ORACLE_SECONDS = 180.0
CONTINUITY_FINEST = 1e-4
CONTINUITY_ORDER = 2.0
CONTINUITY_ORDER_SLACK = 0.3
NORM_ABS = 1e-8
SINGLE_PULSE_RANGE = (0.999, 1.02)
CLASSICAL_TOTAL_ABS = 1e-6
CLASSICAL_PEAK_REL = 5e-3
KS_LIMIT = 1e-3
KS_SAMPLES = 10_000_000
CAT_MIN_FRINGES = 3
CAT_MIN_VISIBILITY = 0.5
GRAVITY_FACTOR = 3.0
PI1_REL = 1e-14
PI3_REL = 1e-12
PI4_REL = 1e-14
SURFACE_REL = 1e-6
DELTA_REL = 1e-12

SODIUM = sodium()
CAT = as_validated(CatConfig())


def report(number, title, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'}  criterion {number:>2}: {title}  [{detail}]"
    print(line)
    return line


def _random_config(rng):
    return as_validated(
        CatConfig(
            particle=Particle(SODIUM.mass * rng.uniform(0.5, 4.0), "random"),
            sigma0=rng.uniform(0.5e-6, 3e-6),
            d=rng.uniform(0.0, 60e-6),
            c1=complex(rng.normal(), rng.normal()),
            c2=complex(rng.normal(), rng.normal()),
            gravity=Gravity(float(rng.choice([0.0, 9.8, rng.uniform(1.0, 20.0)]))),
            detector_H=-rng.uniform(1e-3, 5e-2),
        )
    )


# 1 -----------------------------------------------------------------------
def criterion_decomposition_equivalence():
    rng = np.random.default_rng(1)
    start = time.perf_counter()
    worst = 0.0
    n_points = 0
    for _ in range(10):
        cfg = _random_config(rng)
        pulse = quantum_tof(None, cfg)
        peak = pulse.pi.max()
        a, b = pulse.grid.t_start, pulse.grid.t_end
        t = rng.uniform(a, b, 20)
        z = cfg.H + rng.normal(0.0, 20e-6, 20)
        diff = np.abs(current_breakdown(z, t, cfg).total - direct_current(z, t, cfg))
        worst = max(worst, float(diff.max() / peak))
        n_points += t.size
    elapsed = time.perf_counter() - start
    ok = worst < DECOMPOSITION_REL and elapsed < DECOMPOSITION_SECONDS and n_points == 200
    return (1, "decomposition equivalence", ok,
        f"max rel diff {worst:.2e} < {DECOMPOSITION_REL:g} over {n_points} points, {elapsed:.2f} s")


# 2 -----------------------------------------------------------------------
def criterion_oracle_gate():
    cfg = as_validated(CatConfig(sigma0=0.1e-6, d=2e-6, detector_H=-0.5e-3))
    _, t_end = auto_time_window(cfg)
    start = time.perf_counter()
    run = oracle.run_cat(cfg.sigma0, cfg.d, cfg.mass, cfg.g, cfg.H, t_end, 1e-4,
                         save_times=(0.005, 0.0101, 0.015, 0.02))
    elapsed = time.perf_counter() - start
    grid = run.run.grid
    psi_err = 0.0
    for k, psi in run.run.snapshots.items():
        ref = ev.cat_amplitude(grid.z, run.run.time(k), cfg)
        psi_err = max(psi_err, float(np.max(np.abs(psi - ref)) / np.max(np.abs(ref))))
    ref_j = direct_current(cfg.H, run.probe_times, cfg)
    j_err = float(np.max(np.abs(run.probe_current - ref_j)) / np.max(np.abs(ref_j)))
    ok = psi_err < ORACLE_REL and j_err < ORACLE_REL and elapsed < ORACLE_SECONDS
    return (2, "split-step oracle gate", ok,
        f"psi {psi_err:.2e}, J(H) {j_err:.2e} (limit {ORACLE_REL:g}); "
        f"{grid.n_points} nodes, {run.run.n_steps} steps, {elapsed:.1f} s")


# 3 -----------------------------------------------------------------------
def criterion_continuity_convergence():
    steps, res = continuity_study()
    orders = observed_orders(steps, res)
    ok = bool(np.all(np.abs(orders - CONTINUITY_ORDER) < CONTINUITY_ORDER_SLACK)) and res[-1] < CONTINUITY_FINEST
    return (3, "continuity residual convergence", ok,
        "residuals " + ", ".join(f"{r:.2e}" for r in res)
        + "; orders " + ", ".join(f"{o:.2f}" for o in orders))


# 4 -----------------------------------------------------------------------
def criterion_normalization():
    errs = {t: abs(ev.norm_integral(t, CAT) - 1.0) for t in (0.0, 0.010, 0.045)}
    single = CAT.replace(d=0.0)
    pulse = quantum_tof(TimeGrid(0.0, 0.12, 240_001), single)
    total = float(np.trapezoid(pulse.pi, pulse.t))
    ok = max(errs.values()) < NORM_ABS and SINGLE_PULSE_RANGE[0] <= total <= SINGLE_PULSE_RANGE[1]
    return (4, "normalization", ok,
        ", ".join(f"|norm-1|@{t * 1e3:g}ms={e:.1e}" for t, e in errs.items())
        + f"; single-packet integral {total:.6f}")


# 5 -----------------------------------------------------------------------
def criterion_classical_baseline():
    cloud = ThermalCloud(1e-6, 1e-6)
    H, g = -1e-2, 9.8
    total = classical_total(H, cloud, g)
    t_ref = math.sqrt(2 * abs(H) / g)
    peak = classical_peak(H, cloud, g)
    mc = monte_carlo_tof(cloud, H, g, KS_SAMPLES, seed=7)
    ks = ks_statistic(mc, H, cloud, g)
    ok = abs(total - 1) < CLASSICAL_TOTAL_ABS and abs(peak - t_ref) / t_ref < CLASSICAL_PEAK_REL and ks < KS_LIMIT
    return (5, "classical baseline", ok,
        f"|total-1|={abs(total - 1):.1e}, peak {peak:.5f} s vs {t_ref:.5f} s "
        f"({(peak - t_ref) / t_ref:+.2%}), KS={ks:.2e} at n={KS_SAMPLES:.0e}")


# 6 -----------------------------------------------------------------------
def criterion_separation_trend():
    values = [1e-6, 10e-6, 20e-6, 30e-6, 40e-6, 50e-6]
    table = sweep(CAT, "d", values)
    fringes = table.column("n_fringes")
    vis = table.column("visibility")
    ok = (
        all(r.ok for r in table.rows)
        and all(a <= b for a, b in zip(fringes, fringes[1:]))
        and fringes[0] == 0
        and fringes[-1] >= CAT_MIN_FRINGES
        and vis[-1] > CAT_MIN_VISIBILITY
    )
    return (6, "fringe count grows with separation", ok,
        f"fringes {fringes}; visibility at 50 um {vis[-1]:.3f}")


# 7 -----------------------------------------------------------------------
def criterion_mass_trend():
    masses = [k * SODIUM.mass for k in (1, 2, 4, 8)]
    vis = sweep(CAT, "mass", masses).column("visibility")
    ok = all(v is not None for v in vis) and all(a > b for a, b in zip(vis, vis[1:])) and vis[-1] < 0.5 * vis[0]
    return (7, "visibility falls with mass", ok, "visibility " + ", ".join(f"{v:.4f}" for v in vis))


# 8 -----------------------------------------------------------------------
def criterion_width_trend():
    fringes = sweep(CAT, "sigma0", [k * 1e-6 for k in range(1, 7)]).column("n_fringes")
    ok = all(f is not None for f in fringes) and all(a >= b for a, b in zip(fringes, fringes[1:]))
    return (8, "fringe count falls with packet width", ok, f"fringes {fringes}")


# 9 -----------------------------------------------------------------------
def criterion_gravity_role():
    ratios = {}
    for H, target in ((-1e-2, 1e5), (-1e-1, 1e6)):
        cfg = CAT.replace(d=20e-6, detector_H=H)
        with_g = quantum_tof(None, cfg).pi.max()
        without = quantum_tof(None, cfg.replace(gravity=Gravity(0.0))).pi.max()
        ratios[H] = (with_g / without, target)
    ok = all(target / GRAVITY_FACTOR < r < target * GRAVITY_FACTOR for r, target in ratios.values())
    return (9, "gravity-free peak suppression", ok,
        "; ".join(f"|H|={abs(H) * 100:g} cm: ratio {r:.2e} (target {t:.0e} within x{GRAVITY_FACTOR:g})"
                    for H, (r, t) in ratios.items()))


# 10 ----------------------------------------------------------------------
def criterion_geometry_identities():
    cfg = CAT.replace(d=20e-6)
    sig1 = pi1(None, cfg)
    e1 = float(np.max(np.abs(sig1.pi - quantum_tof(sig1.grid, cfg).pi) / sig1.pi.max()))

    e3 = 0.0
    pi3_fringes = []
    for d in (10e-6, 20e-6, 50e-6, 200e-6):
        c = cfg.replace(d=d)
        s3 = pi3(None, c)
        ref = quantum_tof(s3.grid, c.replace(d=0.0, c1=1.0, c2=0.0)).pi
        e3 = max(e3, float(np.max(np.abs(s3.pi - ref)) / ref.max()))
        pi3_fringes.append(fringe_report(s3).n_fringes)

    X = -1e-2
    s4 = pi4(None, cfg, X)
    ref4 = quantum_tof(s4.grid, cfg.replace(gravity=Gravity(0.0), detector_H=X)).pi
    e4 = float(np.max(np.abs(s4.pi - ref4)) / ref4.max())

    brute = 0.0
    for name, t, Xb, fn in (("pi1", 0.0452, None, pi1), ("pi2", 0.005, -30e-6, pi2),
                            ("pi3", 0.0452, None, pi3), ("pi4", 0.005, -30e-6, pi4)):
        grid = TimeGrid(t, t * (1 + 1e-9), 2)
        sig = fn(grid, cfg) if Xb is None else fn(grid, cfg, Xb)
        brute = max(brute, abs(abs(surface_flux(name, t, cfg, Xb)) - sig.pi[0]) / sig.pi[0])

    ok = e1 <= PI1_REL and e3 <= PI3_REL and e4 <= PI4_REL and not any(pi3_fringes) and brute < SURFACE_REL
    return (10, "geometry identities", ok,
        f"pi1 {e1:.1e}, pi3 {e3:.1e} (fringes {pi3_fringes}), pi4 {e4:.1e}, surface quadrature {brute:.1e}")


# 11 ----------------------------------------------------------------------
def criterion_delta_consistency():
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(20):
        cfg = _random_config(rng)
        z = cfg.H + rng.normal(0.0, 50e-6, 100)
        t = rng.uniform(1e-5, 0.2, 100)
        a = phase_delta(z, t, cfg, "product")
        b = phase_delta(z, t, cfg, "expanded")
        worst = max(worst, float(np.max(np.abs(a - b) / np.abs(a))))
    at_zero = float(np.max(np.abs(phase_delta(np.linspace(-1e-2, 0, 11), 0.0, CAT))))
    flat = CAT.replace(gravity=Gravity(0.0))
    midpoint = float(np.max(np.abs(phase_delta(-flat.d / 2, np.linspace(0, 10, 101), flat))))
    ok = worst < DELTA_REL and at_zero == 0.0 and midpoint < 1e-12
    return (11, "phase factor consistency", ok,
        f"forms agree to {worst:.1e}; delta(t=0) max {at_zero:g}; g=0 midpoint max {midpoint:.1e}")


# 12 ----------------------------------------------------------------------
def _cli(args, cwd):
    return subprocess.run([sys.executable, "-m", "quantum_tof", *args], cwd=cwd, capture_output=True)


def criterion_cli_determinism(tmp_path):
    jobs = {
        "quantum": ["quantum", "--d", "50um", "--channels", "--out", "{}/q.csv"],
        "classical": ["classical", "--temperature", "1uK", "--monte-carlo", "300000", "--seed", "7",
                      "--out", "{}/c.csv"],
        "sweep": ["sweep", "--param", "d", "--values", "1um,20um,50um", "--out", "{}/s"],
    }
    files = ("q.csv", "c.csv", "c_mc.csv", "s.csv", "s.json")
    snapshots = []
    codes = []
    for k in range(2):
        d = tmp_path / f"run{k}"
        d.mkdir()
        for args in jobs.values():
            codes.append(_cli([a.replace("{}", str(d)) for a in args], tmp_path).returncode)
        snapshots.append({f: (d / f).read_bytes() for f in files})
    ok = all(c == 0 for c in codes) and snapshots[0] == snapshots[1]
    return (12, "CLI determinism", ok,
        f"{len(files)} files byte-identical across 2 runs; exit codes {sorted(set(codes))}")


CRITERIA = [
    criterion_decomposition_equivalence,
    pytest.param(criterion_oracle_gate, marks=pytest.mark.slow),
    criterion_continuity_convergence,
    criterion_normalization,
    pytest.param(criterion_classical_baseline, marks=pytest.mark.slow),
    criterion_separation_trend,
    criterion_mass_trend,
    criterion_width_trend,
    criterion_gravity_role,
    criterion_geometry_identities,
    criterion_delta_consistency,
]


def _name(fn):
    return fn.__name__.removeprefix("criterion_")


@pytest.mark.parametrize("criterion", CRITERIA, ids=lambda fn: _name(fn))
def test_criterion(criterion, capsys):
    number, title, ok, detail = criterion()
    with capsys.disabled():
        print()
        report(number, title, ok, detail)
    assert ok, detail


def test_criterion_cli_determinism(tmp_path, capsys):
    number, title, ok, detail = criterion_cli_determinism(tmp_path)
    with capsys.disabled():
        print()
        report(number, title, ok, detail)
    assert ok, detail


def main():
    import tempfile
    from pathlib import Path

    results = [fn() for fn in CRITERIA if callable(fn)]
    results += [fn.values[0]() for fn in CRITERIA if not callable(fn)]
    with tempfile.TemporaryDirectory() as tmp:
        results.append(criterion_cli_determinism(Path(tmp)))
    results.sort(key=lambda r: r[0])
    for r in results:
        report(*r)
    return 0 if all(r[2] for r in results) else 1


if __name__ == "__main__":
    sys.exit(main())
