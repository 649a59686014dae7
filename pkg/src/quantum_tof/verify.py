"""Self-check battery comparing the closed forms with independent computations.

Each check returns a :class:`CheckResult` carrying the measured residual and
the threshold it was held to. ``quick=True`` uses coarser grids, smaller
samples and thresholds relaxed tenfold.
"""
from dataclasses import dataclass
import math
import time

import numpy as np

from . import evolution as ev
from . import oracle
from .classical import (
    ThermalCloud,
    classical_peak,
    classical_total,
    ks_statistic,
    monte_carlo_tof,
)
from .current import arrival_time, current_breakdown, direct_current, phase_delta
from .geometry3d import pi1, pi2, pi3, pi4, surface_flux
from .model import CatConfig, Gravity, Particle, TimeGrid, as_validated, sodium

# reduced-scale geometry used for the grid-propagation checks
ORACLE_SIGMA0 = 0.1e-6
ORACLE_D = 2e-6
ORACLE_H = -0.5e-3


@dataclass(frozen=True)
class CheckResult:
    name: str
    value: float
    threshold: float
    passed: bool
    seconds: float
    detail: str = ""

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        extra = f"  ({self.detail})" if self.detail else ""
        return f"{status}  {self.name:<28s} {self.value:.3e} (limit {self.threshold:.1e}, {self.seconds:.1f} s){extra}"


def _random_config(rng):
    mass = sodium().mass * rng.uniform(0.5, 4.0)
    return as_validated(
        CatConfig(
            particle=Particle(mass, "random"),
            sigma0=rng.uniform(0.5e-6, 3e-6),
            d=rng.uniform(0.0, 60e-6),
            c1=complex(rng.normal(), rng.normal()),
            c2=complex(rng.normal(), rng.normal()),
            gravity=Gravity(rng.choice([0.0, 9.8, rng.uniform(1.0, 20.0)])),
            detector_H=-rng.uniform(1e-3, 5e-2),
        )
    )


def check_decomposition(quick=False, seed=2024, hbar_scale=1.0):
    """Breakdown total against ``(hbar/m) Im(Psi* dPsi/dz)`` at random points."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(10):
        cfg = _random_config(rng)
        tamper = cfg.replace(hbar=cfg.hbar * hbar_scale)
        z = cfg.H + rng.normal(0.0, 20e-6, 20)
        t_c = arrival_time(cfg)
        t = rng.uniform(0.2, 1.5, 20) * t_c
        scale = float(np.max(np.abs(direct_current(cfg.H, np.linspace(0.5, 1.5, 2001) * t_c, cfg))))
        scale = max(scale, float(np.max(np.abs(direct_current(z, t, cfg)))))
        diff = np.abs(current_breakdown(z, t, tamper).total - direct_current(z, t, cfg))
        worst = max(worst, float(diff.max()) / scale)
    return worst


def check_delta_forms(seed=11):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(10):
        cfg = _random_config(rng)
        z = cfg.H + rng.normal(0.0, 50e-6, 50)
        t = rng.uniform(1e-4, 0.1, 50)
        a = phase_delta(z, t, cfg, "product")
        b = phase_delta(z, t, cfg, "expanded")
        worst = max(worst, float(np.max(np.abs(a - b) / np.maximum(np.abs(a), 1e-300))))
    return worst


def check_normalization(hbar_scale=1.0):
    cfg = as_validated(CatConfig())
    cfg = cfg.replace(hbar=cfg.hbar * hbar_scale)
    return max(abs(ev.norm_integral(t, cfg) - 1.0) for t in (0.0, 0.01, 0.045))


def check_pde(quick=False, hbar_scale=1.0):
    """Fourth-order residual of the closed form in the Schroedinger equation."""
    cfg = as_validated(CatConfig(d=20e-6))
    t = 0.01
    a, b = ev.norm_window(t, cfg, 6.0)
    dz, dt = (5e-9, 1e-8) if quick else (2.5e-9, 5e-9)
    z = np.arange(a, b, dz)
    return ev.pde_residual(z, t, dt, cfg.replace(hbar=cfg.hbar * hbar_scale), order=4)


def check_oracle(quick=False, hbar_scale=1.0):
    """Split-step propagation against the closed-form wavefunction and detector current.

    Returns ``(psi_error, current_error)``, each relative to the maximum of
    the analytic quantity.
    """
    cfg = as_validated(CatConfig(sigma0=ORACLE_SIGMA0, d=ORACLE_D, detector_H=ORACLE_H))
    analytic = cfg.replace(hbar=cfg.hbar * hbar_scale)
    t_end = 0.0214
    dt = 5e-4 if quick else 1e-4
    probes = (0.005, 0.01) if quick else (0.005, 0.0101, 0.015)
    run = oracle.run_cat(cfg.sigma0, cfg.d, cfg.mass, cfg.g, cfg.H, t_end, dt, hbar=cfg.hbar, save_times=probes)
    grid = run.run.grid
    psi_err = 0.0
    for step, psi in run.run.snapshots.items():
        ref = ev.cat_amplitude(grid.z, run.run.time(step), analytic)
        psi_err = max(psi_err, float(np.max(np.abs(psi - ref)) / np.max(np.abs(ref))))
    ref_j = direct_current(cfg.H, run.probe_times, analytic)
    j_err = float(np.max(np.abs(run.probe_current - ref_j)) / np.max(np.abs(ref_j)))
    return psi_err, j_err


def continuity_study(steps=(1e-5, 5e-6, 2.5e-6), t_probe=5e-3, n_coarse=20):
    """Relative continuity residual of the grid solution for decreasing time steps.

    The state is carried to ``t_probe - h`` with a few large steps (the
    fourth-order scheme is exact here up to the spatial discretisation), then
    two steps of size ``h`` give the centred ``d rho/dt`` at ``t_probe``.
    """
    m = sodium().mass
    g = 9.8
    grid = oracle.cat_grid(ORACLE_SIGMA0, ORACLE_D, m, g, t_probe + max(steps))
    pot = lambda z: m * g * z
    out = []
    for h in steps:
        psi0 = oracle.initial_cat_state(grid, ORACLE_SIGMA0, ORACLE_D)
        pre = oracle.propagate(psi0, grid, pot, (t_probe - h) / n_coarse, n_coarse, m,
                               scheme="yoshida4", save_steps=[n_coarse])
        run = oracle.propagate(pre.snapshots[n_coarse], grid, pot, h, 2, m,
                               scheme="yoshida4", save_steps=[0, 1, 2], t0=t_probe - h)
        out.append(oracle.continuity_residual(run, 1, m))
    return np.array(steps), np.array(out)


def observed_orders(steps, residuals):
    return np.log(residuals[:-1] / residuals[1:]) / np.log(steps[:-1] / steps[1:])


def check_classical(quick=False):
    """``(|total - 1|, relative peak offset, KS distance)`` at the reference cloud."""
    cloud = ThermalCloud(1e-6, 1e-6)
    H, g = -1e-2, 9.8
    total = abs(classical_total(H, cloud, g) - 1.0)
    t0 = math.sqrt(2 * abs(H) / g)
    peak = abs(classical_peak(H, cloud, g) - t0) / t0
    mc = monte_carlo_tof(cloud, H, g, 10**6 if quick else 10**7, seed=7)
    return total, peak, ks_statistic(mc, H, cloud, g)


def check_geometry(hbar_scale=1.0):
    """Largest relative gap between the 1D reductions and brute-force plane quadrature."""
    cfg = as_validated(CatConfig(d=20e-6))
    flux_cfg = cfg.replace(hbar=cfg.hbar * hbar_scale)
    cases = (
        ("pi1", 0.0452, None, pi1),
        ("pi2", 0.005, -30e-6, pi2),
        ("pi3", 0.0452, None, pi3),
        ("pi4", 0.005, -30e-6, pi4),
    )
    worst = 0.0
    for name, t, X, fn in cases:
        grid = TimeGrid(t, t * (1 + 1e-9), 2)
        sig = fn(grid, cfg) if X is None else fn(grid, cfg, X)
        brute = abs(surface_flux(name, t, flux_cfg, X))
        worst = max(worst, abs(brute - sig.pi[0]) / sig.pi[0])
    return worst


def run_checks(quick=False, hbar_scale=1.0):
    """Run the full battery; ``hbar_scale != 1`` perturbs the closed-form side only."""
    relax = 10.0 if quick else 1.0
    results = []

    def record(name, fn, limit, detail_fn=None):
        start = time.perf_counter()
        value = fn()
        detail = ""
        if detail_fn is not None:
            value, detail = detail_fn(value)
        results.append(
            CheckResult(name, float(value), limit, bool(value < limit), time.perf_counter() - start, detail)
        )

    record("decomposition", lambda: check_decomposition(quick, hbar_scale=hbar_scale), 1e-10 * relax)
    record("delta forms", check_delta_forms, 1e-12 * relax)
    record("normalization", lambda: check_normalization(hbar_scale), 1e-8 * relax)
    record("schroedinger residual", lambda: check_pde(quick, hbar_scale), (1e-3 if quick else 1e-4))

    start = time.perf_counter()
    psi_err, j_err = check_oracle(quick, hbar_scale)
    elapsed = time.perf_counter() - start
    limit = 1e-5 * relax
    results.append(CheckResult("oracle wavefunction", psi_err, limit, psi_err < limit, elapsed))
    results.append(CheckResult("oracle detector current", j_err, limit, j_err < limit, 0.0))

    start = time.perf_counter()
    steps, res = continuity_study()
    orders = observed_orders(steps, res)
    elapsed = time.perf_counter() - start
    ok_order = bool(np.all(np.abs(orders - 2.0) < 0.3))
    limit = 1e-4 * relax
    results.append(
        CheckResult(
            "continuity",
            float(res[-1]),
            limit,
            bool(res[-1] < limit and ok_order),
            elapsed,
            "orders " + ", ".join(f"{o:.2f}" for o in orders),
        )
    )

    start = time.perf_counter()
    total, peak, ks = check_classical(quick)
    elapsed = time.perf_counter() - start
    results.append(CheckResult("classical normalization", total, 1e-6 * relax, total < 1e-6 * relax, elapsed))
    results.append(CheckResult("classical peak offset", peak, 5e-3, peak < 5e-3, 0.0))
    ks_limit = 1e-2 if quick else 1e-3
    results.append(CheckResult("classical monte carlo ks", ks, ks_limit, ks < ks_limit, 0.0))

    record("geometry surface flux", lambda: check_geometry(hbar_scale), 1e-6 * relax)
    return results
