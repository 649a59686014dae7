"""Grid propagation of the cat state, used to check the closed forms.

The initial state is sampled on a periodic grid and evolved with a unitary
split-step Fourier scheme under ``V = m g z``. Nothing here calls the
closed-form evolution or current modules.

For a linear potential the Strang step differs from the exact propagator by
a constant phase ``-m g^2 dt^3 / (12 hbar)`` per step (the Lie algebra of
``p^2``, ``z``, ``p``, ``1`` closes), so densities and currents are exact up
to the spatial discretisation for any ``dt``. The fourth-order triple-jump
composition removes the phase as well.
"""
from dataclasses import dataclass, field
import csv
import math
import os

import numpy as np
import scipy.fft as sfft

from .constants import HBAR


class NormDrift(RuntimeError):
    pass


class BoundaryLeak(RuntimeError):
    pass


def _workers():
    try:
        return max(1, int(os.environ.get("TOF_THREADS", "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class Grid1D:
    """Periodic grid ``z_j = z_min + j dz`` for ``j < n_points``; ``z_max`` is excluded."""

    z_min: float
    z_max: float
    n_points: int

    def __post_init__(self):
        n = self.n_points
        if n < 1024 or n & (n - 1):
            raise ValueError("n_points must be a power of two >= 1024")
        if not self.z_max > self.z_min:
            raise ValueError("z_max must exceed z_min")

    @property
    def dz(self):
        return (self.z_max - self.z_min) / self.n_points

    @property
    def z(self):
        return self.z_min + self.dz * np.arange(self.n_points)

    @property
    def k(self):
        return 2.0 * np.pi * sfft.fftfreq(self.n_points, self.dz)

    def index_of(self, z):
        return int(round((z - self.z_min) / self.dz))


def cat_grid(sigma0, d, mass, g, t_max, anchor=0.0, n_sigma=10.0, hbar=HBAR, min_points=1024):
    """Smallest power-of-two grid holding the falling cat up to ``t_max``.

    The window covers ``n_sigma`` widths around both packets at every
    ``t <= t_max``; the spacing resolves the largest wavenumber reached,
    ``m g t_max / hbar + n_sigma / (2 sigma0)``. ``anchor`` is placed exactly on
    a grid node.
    """
    v_spread = hbar / (2.0 * mass * sigma0)
    ts = np.linspace(0.0, t_max, 2001)
    sig = sigma0 * np.sqrt(1.0 + (v_spread * ts / sigma0) ** 2)
    fall = 0.5 * g * ts * ts
    top = float(np.max(-fall + n_sigma * sig))
    bottom = float(np.min(-d - fall - n_sigma * sig))
    k_need = mass * g * t_max / hbar + n_sigma / (2.0 * sigma0)
    dz_max = math.pi / k_need
    # one spare node leaves room to shift the anchor onto the grid
    n = max(min_points, 1 << math.ceil(math.log2((top - bottom) / dz_max + 1)))
    dz = (top - bottom) / (n - 1)
    # shift so that the anchor sits on a node
    j = math.floor((anchor - bottom) / dz)
    z_min = anchor - j * dz
    if z_min > bottom:
        z_min -= dz
    return Grid1D(z_min, z_min + n * dz, n)


def initial_cat_state(grid, sigma0, d, c1=1 / math.sqrt(2), c2=1 / math.sqrt(2)):
    """Two Gaussians centred at 0 and ``-d``, normalised on the grid."""
    z = grid.z
    amp = (2.0 * np.pi * sigma0**2) ** -0.25
    psi = c1 * amp * np.exp(-(z**2) / (4 * sigma0**2)) + c2 * amp * np.exp(-((z + d) ** 2) / (4 * sigma0**2))
    psi = psi.astype(complex)
    return psi / math.sqrt(np.sum(np.abs(psi) ** 2) * grid.dz)


def grid_norm(psi, grid):
    return float(np.sum(np.abs(psi) ** 2) * grid.dz)


def edge_probability(psi, grid, width=5):
    dens = np.abs(psi) ** 2
    return float((dens[:width].sum() + dens[-width:].sum()) * grid.dz)


@dataclass
class PropagationRun:
    grid: Grid1D
    dt: float
    n_steps: int
    t0: float = 0.0
    snapshots: dict = field(default_factory=dict)  # step index -> psi
    max_norm_drift: float = 0.0
    max_edge_probability: float = 0.0

    def time(self, step):
        return self.t0 + step * self.dt

    @property
    def psi_t(self):
        return {self.time(k): v for k, v in sorted(self.snapshots.items())}


_TRIPLE_JUMP = (
    1.0 / (2.0 - 2.0 ** (1 / 3)),
    -(2.0 ** (1 / 3)) / (2.0 - 2.0 ** (1 / 3)),
    1.0 / (2.0 - 2.0 ** (1 / 3)),
)
SCHEMES = ("strang", "yoshida4")


def _substeps(scheme):
    """Kinetic/potential step fractions for one full step: ``[(kin, pot), ..., (kin, None)]``."""
    if scheme == "strang":
        weights = (1.0,)
    elif scheme == "yoshida4":
        weights = _TRIPLE_JUMP
    else:
        raise ValueError(f"unknown scheme {scheme!r}; choose from {SCHEMES}")
    seq = []
    carry = 0.0
    for w in weights:
        seq.append((carry + 0.5 * w, w))
        carry = 0.5 * w
    seq.append((carry, None))
    return seq


def propagate(
    initial,
    grid,
    potential,
    dt,
    n_steps,
    mass,
    hbar=HBAR,
    scheme="strang",
    save_steps=(),
    monitor=None,
    t0=0.0,
    norm_tol=1e-8,
    leak_tol=1e-10,
):
    """Evolve ``initial`` for ``n_steps`` steps of size ``dt``.

    Parameters
    ----------
    initial : ndarray
        Complex field on ``grid``; must be normalised.
    potential : ndarray or callable
        ``V(z)`` in joules on the grid nodes.
    scheme : {"strang", "yoshida4"}
        Kinetic half step / potential step / kinetic half step, or its
        fourth-order triple-jump composition.
    save_steps : iterable of int
        Step indices (0 = initial) to keep in ``run.snapshots``.
    monitor : callable, optional
        Called as ``monitor(step, t, psi)`` after every step, including step 0.

    Raises
    ------
    NormDrift
        If the grid norm moves by more than ``norm_tol``.
    BoundaryLeak
        If more than ``leak_tol`` probability sits within 5 nodes of an edge.
    """
    psi = np.array(initial, dtype=complex)
    if psi.shape != (grid.n_points,):
        raise ValueError("initial field does not match the grid")
    norm0 = grid_norm(psi, grid)
    if abs(norm0 - 1.0) > norm_tol:
        raise NormDrift(f"initial field norm is {norm0}")
    V = potential(grid.z) if callable(potential) else np.asarray(potential, dtype=float)
    k2 = grid.k ** 2
    kin = {}
    pot = {}
    seq = _substeps(scheme)
    for frac_k, frac_v in seq:
        if frac_k not in kin:
            kin[frac_k] = np.exp(-1j * hbar * k2 * (frac_k * dt) / (2.0 * mass))
        if frac_v is not None and frac_v not in pot:
            pot[frac_v] = np.exp(-1j * V * (frac_v * dt) / hbar)
    workers = _workers()
    save = set(int(s) for s in save_steps)
    run = PropagationRun(grid, dt, n_steps, t0)

    def check(step):
        drift = abs(grid_norm(psi, grid) - 1.0)
        leak = edge_probability(psi, grid)
        run.max_norm_drift = max(run.max_norm_drift, drift)
        run.max_edge_probability = max(run.max_edge_probability, leak)
        if drift > norm_tol:
            raise NormDrift(f"norm drifted by {drift:.3g} at step {step}")
        if leak > leak_tol:
            raise BoundaryLeak(f"edge probability {leak:.3g} at step {step}")

    check(0)
    if 0 in save:
        run.snapshots[0] = psi.copy()
    if monitor is not None:
        monitor(0, t0, psi)
    for step in range(1, n_steps + 1):
        for frac_k, frac_v in seq:
            psi = sfft.ifft(kin[frac_k] * sfft.fft(psi, workers=workers), workers=workers)
            if frac_v is not None:
                psi *= pot[frac_v]
        check(step)
        if step in save:
            run.snapshots[step] = psi.copy()
        if monitor is not None:
            monitor(step, t0 + step * dt, psi)
    return run


def derivative(psi, grid, method="spectral"):
    """``d psi / dz`` by FFT or by the fourth-order central stencil (periodic)."""
    if method == "spectral":
        ik = 1j * grid.k
        ik[grid.n_points // 2] = 0.0  # the Nyquist mode has no odd partner
        return sfft.ifft(ik * sfft.fft(psi, workers=_workers()), workers=_workers())
    if method == "fd4":
        return (
            -np.roll(psi, -2) + 8 * np.roll(psi, -1) - 8 * np.roll(psi, 1) + np.roll(psi, 2)
        ) / (12.0 * grid.dz)
    raise ValueError(f"unknown derivative method {method!r}")


def grid_current(psi, grid, mass, hbar=HBAR, method="spectral"):
    """``J = (hbar/m) Im(psi^* dpsi/dz)`` on the grid."""
    return (hbar / mass) * np.imag(np.conj(psi) * derivative(psi, grid, method))


def continuity_residual(run, k, mass, hbar=HBAR, method="spectral", reference=None):
    """``||d rho/dt + dJ/dz|| / ||dJ/dz||`` at step ``k`` with centred time differences.

    ``reference`` replaces the denominator; use it for states whose current
    is uniform (plane waves), where ``dJ/dz`` vanishes.
    """
    try:
        before, now, after = (run.snapshots[i] for i in (k - 1, k, k + 1))
    except KeyError as exc:
        raise ValueError(f"snapshots {k - 1}, {k}, {k + 1} are needed") from exc
    grid = run.grid
    rho_dot = (np.abs(after) ** 2 - np.abs(before) ** 2) / (2.0 * run.dt)
    J = grid_current(now, grid, mass, hbar, method)
    if method == "spectral":
        div = np.real(sfft.ifft(1j * grid.k * sfft.fft(J)))
    else:
        div = np.real(derivative(J.astype(complex), grid, method))
    scale = np.linalg.norm(div) if reference is None else reference
    return float(np.linalg.norm(rho_dot + div) / scale)


def write_snapshots(run, path):
    """CSV dump with columns ``step,t_s,z_m,re_psi,im_psi``."""
    z = run.grid.z
    with open(path, "w", newline="\n") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["step", "t_s", "z_m", "re_psi", "im_psi"])
        for step, psi in sorted(run.snapshots.items()):
            t = run.time(step)
            for zi, p in zip(z, psi):
                w.writerow([step, f"{t:.15e}", f"{zi:.15e}", f"{p.real:.15e}", f"{p.imag:.15e}"])


def read_snapshots(path):
    out = {}
    with open(path, newline="") as fh:
        rows = csv.DictReader(fh)
        for row in rows:
            out.setdefault(int(row["step"]), []).append(complex(float(row["re_psi"]), float(row["im_psi"])))
    return {k: np.array(v) for k, v in out.items()}


@dataclass
class CatRun:
    run: PropagationRun
    probe_times: np.ndarray
    probe_current: np.ndarray


def run_cat(sigma0, d, mass, g, H, t_end, dt, hbar=HBAR, scheme="yoshida4", save_times=(), grid=None,
            c1=1 / math.sqrt(2), c2=1 / math.sqrt(2), n_sigma=10.0):
    """Propagate the cat from ``t = 0`` to ``t_end`` and record ``J(H, t)`` at every step."""
    if grid is None:
        grid = cat_grid(sigma0, d, mass, g, t_end, anchor=H, n_sigma=n_sigma, hbar=hbar)
    n_steps = int(round(t_end / dt))
    idx = grid.index_of(H)
    times = []
    cur = []

    def monitor(step, t, psi):
        times.append(t)
        cur.append(grid_current(psi, grid, mass, hbar)[idx])

    save = [int(round(s / dt)) for s in save_times]
    run = propagate(
        initial_cat_state(grid, sigma0, d, c1, c2), grid, lambda z: mass * g * z, dt, n_steps,
        mass, hbar, scheme=scheme, save_steps=save, monitor=monitor,
    )
    return CatRun(run, np.array(times), np.array(cur))
