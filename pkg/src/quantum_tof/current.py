"""Probability current of the falling cat state and the quantum arrival-time signal.

Two independent routes are provided:

* :func:`current_breakdown` assembles the current from single-packet
  currents and the interference term ``2 P12 (eta cos delta - lambda sin delta)``;
* :func:`direct_current` evaluates ``(hbar/m) Im(Psi^* dPsi/dz)`` from the
  closed-form wavefunction and its analytic derivative.

The arrival-time distribution at the detector plane ``z = H`` is ``|J(H, t)|``.
"""
from dataclasses import dataclass
import math
import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import evolution as ev
from .model import TimeGrid, as_validated


@dataclass(frozen=True)
class CurrentBreakdown:
    """Channels of the current at a set of ``(z, t)`` points.

    ``j1``, ``j2`` are single-packet currents (velocity field times density),
    ``cross`` is ``2 P12 (eta cos(delta + phi) - lam sin(delta + phi))`` with
    ``phi = arg c2 - arg c1``. ``total`` weights them by ``N^2 |c1|^2``,
    ``N^2 |c2|^2`` and ``N^2 |c1 c2|``, i.e. ``N^2/2 (j1 + j2 + cross)`` for the
    equal split.
    """

    j1: np.ndarray
    j2: np.ndarray
    cross: np.ndarray
    total: np.ndarray
    p12: np.ndarray
    delta: np.ndarray
    lam: np.ndarray
    eta: np.ndarray


@dataclass(frozen=True)
class TofSignal:
    grid: TimeGrid
    pi: np.ndarray
    detector: float
    config: object
    channels: CurrentBreakdown | None = None
    label: str = "quantum"

    def __post_init__(self):
        if len(self.pi) != self.grid.n_samples:
            raise ValueError("signal length does not match the time grid")

    @property
    def t(self):
        return self.grid.times


def _spread_terms(t, cfg):
    t = ev._check_time(t)
    var = ev.spread_sq(t, cfg)
    m, hbar, s0 = cfg.mass, cfg.hbar, cfg.sigma0
    chirp = hbar**2 * t / (4.0 * m * m * s0 * s0 * var)
    return t, var, chirp


def phase_delta(z, t, cfg, form="product"):
    """Relative phase of the two branches at ``(z, t)``.

    ``form="product"`` uses ``hbar t / (8 m sigma0^2 sigma^2)``,
    ``form="expanded"`` the denominator ``8 m (sigma0^4 + hbar^2 t^2 / 4 m^2)``;
    the two are algebraically identical.
    """
    cfg = as_validated(cfg)
    z = np.asarray(z, dtype=float)
    t = ev._check_time(t)
    m, hbar, s0, d, g = cfg.mass, cfg.hbar, cfg.sigma0, cfg.d, cfg.g
    num = hbar * t * (d * d + d * g * t * t + 2.0 * z * d)
    if form == "product":
        return num / (8.0 * m * s0 * s0 * ev.spread_sq(t, cfg))
    if form == "expanded":
        return num / (8.0 * m * (s0**4 + hbar**2 * t * t / (4.0 * m * m)))
    raise ValueError(f"unknown form {form!r}")


def overlap_p12(z, t, cfg):
    """``|psi1| |psi2|`` from the real Gaussian envelopes."""
    cfg = as_validated(cfg)
    return np.sqrt(ev.packet_density(z, t, 0.0, cfg) * ev.packet_density(z, t, cfg.d, cfg))


def lambda_coeff(t, cfg):
    cfg = as_validated(cfg)
    return cfg.hbar * cfg.d / (4.0 * cfg.mass * ev.spread_sq(t, cfg))


def eta_coeff(z, t, cfg):
    cfg = as_validated(cfg)
    t, _, chirp = _spread_terms(t, cfg)
    z = np.asarray(z, dtype=float)
    return 0.5 * chirp * (2.0 * z + cfg.d + cfg.g * t * t) - cfg.g * t


def single_packet_current(z, t, offset, cfg):
    """Current of one normalised branch: ``[chirp (z + offset + g t^2/2) - g t] |psi|^2``."""
    cfg = as_validated(cfg)
    t, _, chirp = _spread_terms(t, cfg)
    z = np.asarray(z, dtype=float)
    u = z + offset + 0.5 * cfg.g * t * t
    return (chirp * u - cfg.g * t) * ev.packet_density(z, t, offset, cfg)


def current_breakdown(z, t, cfg):
    cfg = as_validated(cfg)
    j1 = single_packet_current(z, t, 0.0, cfg)
    j2 = single_packet_current(z, t, cfg.d, cfg)
    p12 = overlap_p12(z, t, cfg)
    delta = phase_delta(z, t, cfg)
    lam = lambda_coeff(t, cfg)
    eta = eta_coeff(z, t, cfg)
    c1, c2 = cfg.c1, cfg.c2
    phi = math.atan2(c2.imag, c2.real) - math.atan2(c1.imag, c1.real)
    cross = 2.0 * p12 * (eta * np.cos(delta + phi) - lam * np.sin(delta + phi))
    n2 = cfg.norm**2
    total = n2 * (abs(c1) ** 2 * j1 + abs(c2) ** 2 * j2 + abs(c1) * abs(c2) * cross)
    lam = np.broadcast_to(lam, np.shape(total))
    return CurrentBreakdown(j1, j2, cross, total, p12, delta, lam, eta)


def direct_current(z, t, cfg):
    """``(i hbar / 2m)(Psi dPsi*/dz - Psi* dPsi/dz)`` from the closed form."""
    cfg = as_validated(cfg)
    psi = ev.cat_amplitude(z, t, cfg)
    dpsi = ev.cat_gradient(z, t, cfg)
    return (cfg.hbar / cfg.mass) * np.imag(np.conj(psi) * dpsi)


# --- time-window policy -------------------------------------------------

N_SIGMA_WINDOW = 8.0
SAMPLES_PER_FRINGE = 40
MIN_SAMPLES = 2048
MAX_SAMPLES = 2_000_000


def arrival_time(cfg, offset=0.0):
    """Time at which a branch's envelope maximum reaches the detector.

    With gravity this is the ballistic ``sqrt(2 (|H| - offset) / g)``; without
    it, the time at which the free-expansion flux through ``|H|`` peaks in
    the far field, ``|H| / (sqrt 2 * hbar / (2 m sigma0))``.
    """
    cfg = as_validated(cfg)
    dist = abs(cfg.H + offset) if cfg.g == 0 else -(cfg.H + offset)
    if cfg.g > 0:
        if dist <= 0:
            return 0.0
        return math.sqrt(2.0 * dist / cfg.g)
    if dist == 0:
        raise ValueError("detector at a packet centre without gravity has no arrival pulse")
    v_spread = cfg.hbar / (2.0 * cfg.mass * cfg.sigma0)
    return dist / (math.sqrt(2.0) * v_spread)


def auto_time_window(cfg):
    """Default ``(t_start, t_end)`` covering the whole arrival pulse.

    With gravity: ``t* -/+ 8 sigma(t*)/(g t*)`` around the arrivals of both
    branches. Without gravity the flux decays only as ``1/t^2``, so the
    window runs from 0 to ``200 t*``.
    """
    cfg = as_validated(cfg)
    if cfg.g == 0:
        t_star = max(arrival_time(cfg, 0.0), arrival_time(cfg, cfg.d))
        return 0.0, 200.0 * t_star
    t1 = arrival_time(cfg, 0.0)
    t2 = arrival_time(cfg, cfg.d)
    if max(t1, t2) <= 0:
        raise ValueError("detector must lie below the initial packets when g > 0")
    t_star = max(t1, t2)
    sig_t = math.sqrt(float(ev.spread_sq(t_star, cfg))) / (cfg.g * t_star)
    lo = max(0.0, min(t1, t2) - N_SIGMA_WINDOW * sig_t)
    return lo, t_star + N_SIGMA_WINDOW * sig_t


def fringe_rate(cfg, t_start, t_end, probe=4096):
    """Largest ``|d delta / dt|`` at the detector where the overlap is non-negligible."""
    cfg = as_validated(cfg)
    if cfg.d == 0:
        return 0.0
    t = np.linspace(max(t_start, 1e-300), t_end, probe)
    weight = overlap_p12(cfg.H, t, cfg) * (np.abs(eta_coeff(cfg.H, t, cfg)) + np.abs(lambda_coeff(t, cfg)))
    keep = weight > 1e-8 * weight.max() if weight.max() > 0 else np.zeros_like(t, bool)
    if cfg.g > 0:
        rate = cfg.mass * cfg.d * cfg.g / cfg.hbar
    else:
        rate = 0.0
    if keep.any():
        delta = phase_delta(cfg.H, t, cfg)
        slope = np.abs(np.gradient(delta, t))
        rate = max(rate, float(slope[keep].max()))
    return rate


def auto_time_grid(cfg, samples_per_fringe=SAMPLES_PER_FRINGE):
    """Time grid from :func:`auto_time_window` with Nyquist-safe sampling of the fringes."""
    cfg = as_validated(cfg)
    a, b = auto_time_window(cfg)
    rate = fringe_rate(cfg, a, b)
    n = MIN_SAMPLES
    if rate > 0:
        n = max(n, math.ceil((b - a) * rate / (2 * math.pi) * samples_per_fringe) + 1)
    return TimeGrid(a, b, min(n, MAX_SAMPLES))


def thread_count():
    """Worker cap from ``TOF_THREADS`` (default: 1)."""
    try:
        return max(1, int(os.environ.get("TOF_THREADS", "1")))
    except ValueError:
        return 1


def _evaluate(fn, times, workers):
    if workers <= 1 or times.size < 8192:
        return fn(times)
    chunks = np.array_split(times, workers)
    with ThreadPoolExecutor(workers) as pool:
        parts = list(pool.map(fn, chunks))
    if isinstance(parts[0], CurrentBreakdown):
        return CurrentBreakdown(
            *(np.concatenate([getattr(p, f) for p in parts]) for f in CurrentBreakdown.__dataclass_fields__)
        )
    return np.concatenate(parts)


def quantum_tof(grid, cfg, channels=False, workers=None):
    """Arrival-time signal ``|J(H, t)|`` on ``grid`` (``None`` selects the auto grid)."""
    cfg = as_validated(cfg)
    grid = auto_time_grid(cfg) if grid is None else grid
    workers = thread_count() if workers is None else workers
    times = grid.times
    if channels:
        br = _evaluate(lambda tt: current_breakdown(cfg.H, tt, cfg), times, workers)
        return TofSignal(grid, np.abs(br.total), cfg.H, cfg, br)
    total = _evaluate(lambda tt: current_breakdown(cfg.H, tt, cfg).total, times, workers)
    return TofSignal(grid, np.abs(total), cfg.H, cfg)
