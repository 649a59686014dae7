"""Classical ballistic time-of-flight baseline.

A thermal cloud is a Gaussian in position (width ``sigma0``) times a Gaussian
in velocity (``sigma_v^2 = k T / m``). Every atom falls ballistically; the
arrival-time density at a plane ``z = H`` has a closed form, and
:func:`monte_carlo_tof` samples the same ensemble as an independent check.
"""
from dataclasses import dataclass, field
import math

import numpy as np
from scipy.integrate import quad, cumulative_trapezoid

from .constants import K_B
from .model import Particle, sodium


class NonPositiveTime(ValueError):
    pass


@dataclass(frozen=True)
class ThermalCloud:
    sigma0: float
    temperature: float
    particle: Particle = field(default_factory=sodium)

    def __post_init__(self):
        if not self.sigma0 > 0:
            raise ValueError("sigma0 must be > 0")
        if not self.temperature >= 0:
            raise ValueError("temperature must be >= 0")

    @property
    def sigma_v(self):
        return sigma_v(self)


def sigma_v(cloud):
    """Thermal velocity spread ``sqrt(k T / m)``."""
    return math.sqrt(K_B * cloud.temperature / cloud.particle.mass)


def classical_distribution(t, H, cloud, g):
    """Arrival-time density at ``z = H`` (per second)."""
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise NonPositiveTime("arrival-time density needs t > 0")
    s0sq = cloud.sigma0**2
    svt2 = cloud.sigma_v**2 * t * t
    width2 = s0sq + svt2
    num = 0.5 * g * t * t * (2.0 * s0sq + svt2) - H * svt2
    return (
        num
        / np.sqrt(2.0 * np.pi * t * t)
        / width2**1.5
        * np.exp(-((H + 0.5 * g * t * t) ** 2) / (2.0 * width2))
    )


def classical_total(H, cloud, g, t_max=None):
    """``int_0^inf D(t) dt`` by adaptive quadrature, split around the peak."""
    t_peak = math.sqrt(2 * abs(H) / g) if g > 0 else None
    if t_max is None:
        t_max = 20.0 * t_peak if t_peak else np.inf
    f = lambda t: float(classical_distribution(t, H, cloud, g)) if t > 0 else 0.0
    if t_peak is None:
        val, _ = quad(f, 0, np.inf, limit=400, epsabs=1e-13)
        return val
    pieces = [0.0, 0.5 * t_peak, 0.9 * t_peak, t_peak, 1.1 * t_peak, 2 * t_peak, t_max]
    return sum(quad(f, a, b, limit=400, epsabs=1e-14, epsrel=1e-12)[0] for a, b in zip(pieces, pieces[1:]))


def classical_peak(H, cloud, g):
    """Location of the maximum of the arrival density (golden-section on ``-D``)."""
    from scipy.optimize import minimize_scalar

    t0 = math.sqrt(2 * abs(H) / g)
    res = minimize_scalar(
        lambda t: -float(classical_distribution(t, H, cloud, g)),
        bounds=(0.5 * t0, 1.5 * t0),
        method="bounded",
        options={"xatol": 1e-12 * t0},
    )
    return float(res.x)


def classical_cdf_table(H, cloud, g, t_lo, t_hi, n=400_001):
    """Cumulative distribution of the closed-form density tabulated on ``[t_lo, t_hi]``.

    The mass below ``t_lo`` is added by adaptive quadrature so the table is a
    proper CDF even when ``t_lo`` cuts into the pulse.
    """
    t = np.linspace(t_lo, t_hi, n)
    dens = classical_distribution(t, H, cloud, g)
    head = 0.0
    if t_lo > 0:
        head = quad(lambda s: float(classical_distribution(s, H, cloud, g)), 1e-12, t_lo, limit=200)[0]
    return t, head + cumulative_trapezoid(dens, t, initial=0.0)


def classical_time_window(H, cloud, g, n_sigma=8.0):
    """``(t_start, t_end)`` spanning ``n_sigma`` arrival-time widths around the peak.

    Requires ``g > 0`` and a detector below the cloud.
    """
    if not g > 0:
        raise ValueError("the automatic classical window needs g > 0; pass explicit times")
    if not H < 0:
        raise ValueError("the detector must lie below the cloud (H < 0)")
    t0 = math.sqrt(2.0 * abs(H) / g)
    sig_t = math.sqrt(cloud.sigma0**2 + (cloud.sigma_v * t0) ** 2) / (g * t0)
    lo = max(t0 - n_sigma * sig_t, 1e-3 * t0)
    return lo, t0 + n_sigma * sig_t


@dataclass(frozen=True)
class MonteCarloResult:
    times: np.ndarray  # arrival times of the atoms that reached the plane, sorted
    n_samples: int
    n_no_arrival: int
    seed: int

    @property
    def arrival_fraction(self):
        return (self.n_samples - self.n_no_arrival) / self.n_samples

    def histogram(self, bins):
        """Density-normalised histogram over the arriving atoms: ``(centres, density)``."""
        counts, edges = np.histogram(self.times, bins=bins)
        widths = np.diff(edges)
        density = counts / (widths * self.n_samples)
        return 0.5 * (edges[1:] + edges[:-1]), density


def first_crossing_time(z0, v0, H, g):
    """First ``t > 0`` with ``z0 + v0 t - g t^2 / 2 = H``; ``nan`` if never."""
    z0 = np.asarray(z0, dtype=float)
    v0 = np.asarray(v0, dtype=float)
    if g == 0:
        with np.errstate(divide="ignore", invalid="ignore"):
            t = (H - z0) / v0
        return np.where(t > 0, t, np.nan)
    # g t^2/2 - v0 t + (H - z0) = 0
    disc = v0 * v0 - 2.0 * g * (H - z0)
    root = np.sqrt(np.where(disc >= 0, disc, np.nan))
    small = (v0 - root) / g
    large = (v0 + root) / g
    # below the start point only the downward (larger) root is positive
    return np.where(small > 0, small, np.where(large > 0, large, np.nan))


def monte_carlo_tof(cloud, H, g, n, seed, chunk=1_000_000):
    """Sample the thermal ensemble and record first arrival times at ``z = H``.

    Each chunk draws from its own child of ``SeedSequence(seed)``, so the
    result depends only on ``(n, seed, chunk)``.
    """
    n = int(n)
    if n < 1:
        raise ValueError("need at least one sample")
    n_chunks = -(-n // chunk)
    children = np.random.SeedSequence(seed).spawn(n_chunks)
    sv = cloud.sigma_v
    parts = []
    missing = 0
    for i, child in enumerate(children):
        size = min(chunk, n - i * chunk)
        rng = np.random.default_rng(child)
        z0 = rng.normal(0.0, cloud.sigma0, size)
        v0 = rng.normal(0.0, sv, size) if sv > 0 else np.zeros(size)
        t = first_crossing_time(z0, v0, H, g)
        ok = np.isfinite(t)
        missing += int(size - ok.sum())
        parts.append(t[ok])
    times = np.sort(np.concatenate(parts))
    return MonteCarloResult(times, n, missing, seed)


def ks_statistic(mc, H, cloud, g, n_table=400_001):
    """Kolmogorov-Smirnov distance between the sample and the closed-form CDF.

    Atoms that never arrive count as mass at ``t = inf`` in the empirical CDF.
    """
    t = mc.times
    if t.size == 0:
        return 1.0
    lo, hi = float(t[0]), float(t[-1])
    pad = 1e-9 * max(hi, 1e-300)
    grid, cdf = classical_cdf_table(H, cloud, g, max(lo - pad, 1e-300), hi + pad, n_table)
    model = np.interp(t, grid, cdf)
    n = mc.n_samples
    k = np.arange(1, t.size + 1)
    return float(max(np.max(k / n - model), np.max(model - (k - 1) / n)))
