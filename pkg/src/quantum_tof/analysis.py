"""Fringe and pulse metrics of arrival-time signals, and parameter sweeps."""
from dataclasses import dataclass
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from scipy.integrate import cumulative_trapezoid, trapezoid
from scipy.signal import find_peaks

from .current import auto_time_grid, quantum_tof, thread_count
from .model import ConfigError, Gravity, Particle, as_validated

PROMINENCE = 0.01  # fraction of the global peak
EDGE_TOLERANCE = 1e-4


class WindowTooNarrow(ValueError):
    """The signal does not decay at both ends of its time window."""


@dataclass(frozen=True)
class FringeReport:
    n_maxima: int
    n_fringes: int
    visibility: float
    max_contrast: float
    mean_arrival: float
    total_prob: float
    peak_value: float
    peak_time: float

    def as_dict(self):
        return dict(self.__dict__)


def _vertex(y, i):
    """Parabolic refinement of a sampled extremum: ``(fractional index, value)``."""
    if i <= 0 or i >= len(y) - 1:
        return float(i), float(y[i])
    ym, y0, yp = y[i - 1], y[i], y[i + 1]
    den = ym - 2.0 * y0 + yp
    if den == 0:
        return float(i), float(y0)
    shift = 0.5 * (ym - yp) / den
    return i + shift, float(y0 - 0.125 * (yp - ym) ** 2 / den)


def find_extrema(pi, prominence=PROMINENCE):
    """Indices of prominent maxima and of the minima lying between them."""
    pi = np.asarray(pi, dtype=float)
    peak = float(pi.max())
    if peak <= 0:
        return np.array([], int), np.array([], int)
    maxima, _ = find_peaks(pi, prominence=prominence * peak)
    if maxima.size < 2:
        return maxima, np.array([], int)
    minima, _ = find_peaks(-pi, prominence=prominence * peak)
    minima = minima[(minima > maxima[0]) & (minima < maxima[-1])]
    return maxima, minima


def fringe_report(signal, prominence=PROMINENCE, edge_tolerance=EDGE_TOLERANCE):
    """Fringe count, contrast and pulse moments of a :class:`~quantum_tof.current.TofSignal`.

    ``visibility`` is the intensity-weighted fringe contrast: every maximum
    flanked by minima on both sides contributes its contrast against the mean
    of those minima, weighted by the probability between the two minima, and
    the sum is divided by the total probability. ``max_contrast`` is the best
    single adjacent max/min contrast.

    Raises
    ------
    WindowTooNarrow
        If either end of the signal exceeds ``edge_tolerance`` times its peak.
    """
    t = signal.t
    pi = np.asarray(signal.pi, dtype=float)
    ipk = int(np.argmax(pi))
    peak = float(pi[ipk])
    if peak <= 0:
        raise WindowTooNarrow("signal is identically zero")
    if pi[0] > edge_tolerance * peak or pi[-1] > edge_tolerance * peak:
        raise WindowTooNarrow(
            f"signal ends at {pi[0] / peak:.2e} and {pi[-1] / peak:.2e} of its peak"
        )
    total = float(trapezoid(pi, t))
    mean_arrival = float(trapezoid(t * pi, t) / total)
    maxima, minima = find_extrema(pi, prominence)

    cum = cumulative_trapezoid(pi, t, initial=0.0)
    idx = np.arange(t.size)
    refined_min = {i: _vertex(pi, i) for i in minima}
    weighted = 0.0
    best = 0.0
    for j in maxima:
        left = minima[minima < j]
        right = minima[minima > j]
        _, hi = _vertex(pi, j)
        for side in (left[-1:], right[:1]):
            if side.size:
                lo = max(refined_min[side[0]][1], 0.0)
                best = max(best, (hi - lo) / (hi + lo))
        if not (left.size and right.size):
            continue
        (xa, ya), (xb, yb) = refined_min[left[-1]], refined_min[right[0]]
        lo = max(0.5 * (ya + yb), 0.0)
        contrast = (hi - lo) / (hi + lo)
        mass = np.interp(xb, idx, cum) - np.interp(xa, idx, cum)
        weighted += contrast * mass
    visibility = min(max(weighted / total, 0.0), 1.0)
    return FringeReport(
        n_maxima=int(maxima.size),
        n_fringes=int(minima.size),
        visibility=float(visibility),
        max_contrast=float(min(best, 1.0)),
        mean_arrival=mean_arrival,
        total_prob=total,
        peak_value=peak,
        peak_time=float(t[ipk]),
    )


# --- sweeps ------------------------------------------------------------

SWEEP_PARAMETERS = ("d", "mass", "sigma0", "g", "H")


def apply_parameter(cfg, name, value):
    """Copy of ``cfg`` (a CatConfig) with one parameter set to ``value`` (SI)."""
    if name == "d":
        return cfg.replace(d=value)
    if name == "mass":
        return cfg.replace(particle=Particle(value, cfg.particle.label))
    if name == "sigma0":
        return cfg.replace(sigma0=value)
    if name == "g":
        return cfg.replace(gravity=Gravity(value))
    if name == "H":
        return cfg.replace(detector_H=value)
    raise ValueError(f"unknown sweep parameter {name!r}; choose from {SWEEP_PARAMETERS}")


@dataclass(frozen=True)
class SweepRow:
    value: float
    report: FringeReport | None
    error: str | None = None

    @property
    def ok(self):
        return self.report is not None


@dataclass(frozen=True)
class SweepTable:
    parameter: str
    rows: tuple

    @property
    def values(self):
        return [r.value for r in self.rows]

    def column(self, field):
        return [getattr(r.report, field) if r.ok else None for r in self.rows]


def _row(template, parameter, value, grid_policy):
    try:
        cfg = as_validated(apply_parameter(template, parameter, value))
        grid = grid_policy(cfg)
        return SweepRow(value, fringe_report(quantum_tof(grid, cfg, workers=1)))
    except (ConfigError, ValueError) as exc:
        code = getattr(exc, "code", type(exc).__name__)
        return SweepRow(value, None, f"{code}: {exc}")


def sweep(template, parameter, values, grid_policy=auto_time_grid, workers=None):
    """One :class:`FringeReport` per parameter value, rows sorted by value.

    Invalid rows are recorded with their error message; the sweep continues.
    """
    if parameter not in SWEEP_PARAMETERS:
        raise ValueError(f"unknown sweep parameter {parameter!r}; choose from {SWEEP_PARAMETERS}")
    values = sorted(float(v) for v in values)
    if not values:
        raise ValueError("sweep needs at least one value")
    template = getattr(template, "config", template)
    workers = thread_count() if workers is None else workers
    job = lambda v: _row(template, parameter, v, grid_policy)
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            rows = tuple(pool.map(job, values))
    else:
        rows = tuple(map(job, values))
    return SweepTable(parameter, rows)
