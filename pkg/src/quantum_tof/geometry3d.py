"""Arrival-time signals for the four 3D split/detection combinations.

The 3D cat state is a product of 1D Gaussians, so every plane-integrated flux
reduces to a 1D current:

========  ==============  ======================  =====================================
scenario  split axis      detection plane         reduces to
========  ==============  ======================  =====================================
pi1       vertical z      XY at z = H             1D cat current at H (with gravity)
pi2       vertical z      YZ at x = X             free single packet current at X
pi3       horizontal x    XY at z = H             single packet current at H (gravity)
pi4       horizontal x    YZ at x = X             1D cat current at X with g = 0
========  ==============  ======================  =====================================

:func:`surface_flux` integrates the full 3D current over the plane by brute
force and is used to certify each reduction.
"""
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.integrate import trapezoid

from . import evolution as ev
from .current import TofSignal, auto_time_grid, quantum_tof
from .model import Gravity, as_validated


class SplitAxis(str, Enum):
    VERTICAL = "vertical-z"
    HORIZONTAL = "horizontal-x"


class DetectPlane(str, Enum):
    XY = "XY"  # z = H
    YZ = "YZ"  # x = X


@dataclass(frozen=True)
class Scenario:
    name: str
    split_axis: SplitAxis
    detect_plane: DetectPlane


SCENARIOS = {
    "pi1": Scenario("pi1", SplitAxis.VERTICAL, DetectPlane.XY),
    "pi2": Scenario("pi2", SplitAxis.VERTICAL, DetectPlane.YZ),
    "pi3": Scenario("pi3", SplitAxis.HORIZONTAL, DetectPlane.XY),
    "pi4": Scenario("pi4", SplitAxis.HORIZONTAL, DetectPlane.YZ),
}


def _relabel(signal, name, detector=None):
    return TofSignal(
        signal.grid,
        signal.pi,
        signal.detector if detector is None else detector,
        signal.config,
        signal.channels,
        label=name,
    )


def pi1(grid, cfg, channels=False):
    """Vertical split, detection in the horizontal plane ``z = H``."""
    return _relabel(quantum_tof(grid, as_validated(cfg), channels=channels), "pi1")


def _free_transverse(cfg, X):
    # a single x-packet without gravity, "detector" at x = X
    return cfg.replace(d=0.0, gravity=Gravity(0.0), detector_H=X, c1=1.0, c2=0.0)


def pi2(grid, cfg, X):
    """Vertical split, detection in the vertical plane ``x = X``: no interference."""
    cfg = as_validated(cfg)
    free = _free_transverse(cfg, X)
    grid = auto_time_grid(free) if grid is None else grid
    sig = quantum_tof(grid, free)
    return TofSignal(grid, sig.pi, X, cfg, label="pi2")


def pi3(grid, cfg):
    """Horizontal split, detection in ``z = H``: the single-packet falling pulse."""
    cfg = as_validated(cfg)
    single = cfg.replace(d=0.0, c1=1.0, c2=0.0)
    grid = auto_time_grid(single) if grid is None else grid
    sig = quantum_tof(grid, single)
    return TofSignal(grid, sig.pi, cfg.H, cfg, label="pi3")


def pi4(grid, cfg, X):
    """Horizontal split, detection in ``x = X``: the 1D cat current with ``g = 0``."""
    cfg = as_validated(cfg)
    flat = cfg.replace(gravity=Gravity(0.0), detector_H=X)
    grid = auto_time_grid(flat) if grid is None else grid
    sig = quantum_tof(grid, flat)
    return TofSignal(grid, sig.pi, X, cfg, label="pi4")


def scenario_signal(name, grid, cfg, X=None):
    if name not in SCENARIOS:
        raise ValueError(f"unknown scenario {name!r}; choose from {sorted(SCENARIOS)}")
    if name == "pi1":
        return pi1(grid, cfg)
    if name == "pi3":
        return pi3(grid, cfg)
    if X is None:
        raise ValueError(f"scenario {name} needs a detection coordinate X")
    return pi2(grid, cfg, X) if name == "pi2" else pi4(grid, cfg, X)


# --- brute-force 3D check ---------------------------------------------

def _axis_factors(coord, t, cfg, offset, g):
    """Amplitude and log-derivative of one Cartesian factor."""
    axis_cfg = cfg.replace(gravity=Gravity(g))
    psi = ev.packet_amplitude(coord, t, offset, axis_cfg)
    dlog = ev.packet_log_derivative(coord, t, offset, axis_cfg)
    return psi, dlog


def current_3d(x, y, z, t, cfg, split_axis):
    """``(J_x, J_y, J_z)`` of the 3D cat state at broadcastable points.

    Built from the 3D product wavefunction and its gradient; gravity acts
    along ``z`` only.
    """
    cfg = as_validated(cfg)
    split_axis = SplitAxis(split_axis)
    g, d = cfg.g, cfg.d
    fx, dfx = _axis_factors(x, t, cfg, 0.0, 0.0)
    fy, dfy = _axis_factors(y, t, cfg, 0.0, 0.0)
    fz, dfz = _axis_factors(z, t, cfg, 0.0, g)
    if split_axis is SplitAxis.VERTICAL:
        fz2, dfz2 = _axis_factors(z, t, cfg, d, g)
        a = cfg.c1 * fz + cfg.c2 * fz2
        da = cfg.c1 * fz * dfz + cfg.c2 * fz2 * dfz2
        psi = cfg.norm * fx * fy * a
        grad = (
            cfg.norm * fx * dfx * fy * a,
            cfg.norm * fx * fy * dfy * a,
            cfg.norm * fx * fy * da,
        )
    else:
        fx2, dfx2 = _axis_factors(x, t, cfg, d, 0.0)
        a = cfg.c1 * fx + cfg.c2 * fx2
        da = cfg.c1 * fx * dfx + cfg.c2 * fx2 * dfx2
        psi = cfg.norm * a * fy * fz
        grad = (
            cfg.norm * da * fy * fz,
            cfg.norm * a * fy * dfy * fz,
            cfg.norm * a * fy * fz * dfz,
        )
    k = cfg.hbar / cfg.mass
    return tuple(k * np.imag(np.conj(psi) * gi) for gi in grad)


def _window(center_lo, center_hi, sig, n_sigma, n):
    return np.linspace(center_lo - n_sigma * sig, center_hi + n_sigma * sig, n)


def surface_flux(name, t, cfg, X=None, n=256, n_sigma=8.0):
    """Plane-integrated normal current by trapezoid quadrature on an ``n x n`` grid.

    Returns the signed integral of ``J . n_hat`` with ``n_hat`` pointing
    toward ``-z`` (XY plane) or ``-x`` (YZ plane); its modulus is the
    arrival-time density.
    """
    cfg = as_validated(cfg)
    sc = SCENARIOS[name]
    sig = float(np.sqrt(ev.spread_sq(t, cfg)))
    fall = 0.5 * cfg.g * t * t
    d = cfg.d
    if sc.detect_plane is DetectPlane.XY:
        if sc.split_axis is SplitAxis.VERTICAL:
            xs = _window(0.0, 0.0, sig, n_sigma, n)
        else:
            xs = _window(-d, 0.0, sig, n_sigma, n)
        ys = _window(0.0, 0.0, sig, n_sigma, n)
        X_, Y_ = np.meshgrid(xs, ys, indexing="ij")
        _, _, jz = current_3d(X_, Y_, cfg.H, t, cfg, sc.split_axis)
        return -trapezoid(trapezoid(jz, ys, axis=1), xs)
    if X is None:
        raise ValueError("YZ detection needs X")
    ys = _window(0.0, 0.0, sig, n_sigma, n)
    if sc.split_axis is SplitAxis.VERTICAL:
        zs = _window(-d - fall, -fall, sig, n_sigma, n)
    else:
        zs = _window(-fall, -fall, sig, n_sigma, n)
    Y_, Z_ = np.meshgrid(ys, zs, indexing="ij")
    jx, _, _ = current_3d(X, Y_, Z_, t, cfg, sc.split_axis)
    return -trapezoid(trapezoid(jx, zs, axis=1), ys)
