"""Command-line interface: ``quantum-tof <command> [options]``.

Commands
--------
quantum     arrival-time signal of the falling cat state
classical   thermal-cloud baseline, optionally with a Monte Carlo check
geometry    one of the four 3D split/detection scenarios
sweep       fringe metrics while one parameter varies
verify      self-check battery

Exit codes: 0 success, 1 failed verification, 2 invalid input,
3 every sweep row failed. Input errors are reported on stderr as one JSON
object ``{"error": <code>, "message": <text>}``.
"""
import argparse
import json
import math
import re
import sys
from pathlib import Path

import numpy as np

from . import io as tio
from . import units
from .analysis import SWEEP_PARAMETERS, WindowTooNarrow, fringe_report, sweep
from .classical import (
    NonPositiveTime,
    ThermalCloud,
    classical_distribution,
    classical_time_window,
    ks_statistic,
    monte_carlo_tof,
)
from .current import quantum_tof
from .geometry3d import SCENARIOS, scenario_signal
from .model import CatConfig, ConfigError, Gravity, Particle, TimeGrid, as_validated
from .constants import G_EARTH

EXIT_OK, EXIT_FAILED, EXIT_USAGE, EXIT_ALL_ROWS_FAILED = 0, 1, 2, 3

DEFAULTS = {
    "mass": "1x",
    "sigma0": "1um",
    "d": "50um",
    "H": "-1cm",
    "g": G_EARTH,
    "c1": 1 / math.sqrt(2),
    "c2": 1 / math.sqrt(2),
    "format": "csv",
}
CONFIG_KEYS = {
    "mass", "sigma0", "d", "H", "g", "c1", "c2", "t_start", "t_end", "t_samples",
    "scenario", "X", "out", "format", "temperature",
}


class UsageError(ValueError):
    code = "UsageError"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        _fail(UsageError(message))


def _fail(exc):
    code = getattr(exc, "code", type(exc).__name__)
    sys.stderr.write(json.dumps({"error": code, "message": str(exc)}) + "\n")
    sys.exit(EXIT_USAGE)


# --- argument plumbing ---------------------------------------------------

_NEGATIVE = re.compile(r"^-(\d|\.\d)")


def _join_negative_values(argv):
    """Turn ``--H -1cm`` into ``--H=-1cm`` so argparse does not see an option."""
    out = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        if tok.startswith("--") and "=" not in tok and i + 1 < len(argv) and _NEGATIVE.match(argv[i + 1]):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def _add_template(p):
    g = p.add_argument_group("experiment")
    g.add_argument("--config", help="JSON run file; explicit flags override its entries")
    g.add_argument("--mass-amu", dest="mass", help="particle mass (amu by default; kg and x = multiples of 23Na accepted)")
    g.add_argument("--sigma0", help="initial packet width, e.g. 1um")
    g.add_argument("--d", help="packet separation, e.g. 50um")
    g.add_argument("--H", help="detector height, e.g. -1cm")
    g.add_argument("--g", help="gravitational acceleration in m/s^2")


def _add_grid(p):
    g = p.add_argument_group("time grid (all three, or none for the automatic window)")
    g.add_argument("--t-start", dest="t_start", help="e.g. 40ms")
    g.add_argument("--t-end", dest="t_end", help="e.g. 50ms")
    g.add_argument("--t-samples", dest="t_samples", help="number of samples")


def _add_output(p):
    p.add_argument("--out", help="output file (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"))


def build_parser():
    parser = _Parser(prog="quantum-tof", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    q = sub.add_parser("quantum", help="arrival-time signal |J(H, t)| of the cat state")
    _add_template(q)
    _add_grid(q)
    _add_output(q)
    q.add_argument("--channels", action="store_true", help="also write j1, j2, cross, p12, delta")
    q.add_argument("--report", help="write the fringe report as JSON to this file")

    c = sub.add_parser("classical", help="classical thermal-cloud arrival density")
    _add_template(c)
    _add_grid(c)
    _add_output(c)
    c.add_argument("--temperature", help="cloud temperature, e.g. 1uK")
    c.add_argument("--monte-carlo", dest="monte_carlo", type=int, help="number of sampled trajectories")
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--bins", type=int, default=400, help="histogram bins for the Monte Carlo output")

    ge = sub.add_parser("geometry", help="arrival signal for one 3D split/detection scenario")
    _add_template(ge)
    _add_grid(ge)
    _add_output(ge)
    ge.add_argument("--scenario", help="pi1 | pi2 | pi3 | pi4")
    ge.add_argument("--X", help="vertical detection plane x = X for pi2/pi4 (default: same as H)")
    ge.add_argument("--channels", action="store_true", help="channel columns (pi1 only)")
    ge.add_argument("--report", help="write the fringe report as JSON to this file")

    s = sub.add_parser("sweep", help="fringe metrics over a list of parameter values")
    _add_template(s)
    s.add_argument("--param", required=True, choices=SWEEP_PARAMETERS)
    s.add_argument("--values", required=True, help="comma-separated list with units, e.g. 1um,10um")
    s.add_argument("--out", help="output path; both <stem>.csv and <stem>.json are written")

    v = sub.add_parser("verify", help="run the self-check battery")
    v.add_argument("--quick", action="store_true", help="coarser grids, tolerances relaxed tenfold")
    v.add_argument("--tamper-hbar", dest="tamper_hbar", type=float, default=1.0, help=argparse.SUPPRESS)
    return parser


def _load_config_file(path):
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read config file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"config file is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise UsageError("config file must hold a JSON object")
    unknown = sorted(set(doc) - CONFIG_KEYS)
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(unknown)}")
    return doc


def _settings(args):
    """Merge defaults < config file < explicit flags."""
    merged = dict(DEFAULTS)
    if getattr(args, "config", None):
        merged.update(_load_config_file(args.config))
    for key in CONFIG_KEYS:
        val = getattr(args, key, None)
        if val is not None:
            merged[key] = val
    if merged["format"] not in ("csv", "json"):
        raise UsageError(f"format must be csv or json, got {merged['format']!r}")
    return merged


def _amplitude(v):
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return complex(float(v[0]), float(v[1]))
    try:
        return complex(v) if isinstance(v, str) else v
    except ValueError as exc:
        raise UsageError(f"cannot parse amplitude {v!r}") from exc


def _number(v, what):
    try:
        return float(v)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"{what} must be a number, got {v!r}") from exc


def _template(st):
    mass = units.mass(st["mass"])
    return CatConfig(
        particle=Particle(mass, "Na-23" if math.isclose(mass, units.MASS["x"], rel_tol=1e-6) else "custom"),
        sigma0=units.length(st["sigma0"]),
        d=units.length(st["d"]),
        c1=_amplitude(st["c1"]),
        c2=_amplitude(st["c2"]),
        gravity=Gravity(_number(st["g"], "g")),
        detector_H=units.length(st["H"]),
    )


def _time_grid(st):
    keys = ("t_start", "t_end", "t_samples")
    given = [st.get(k) is not None for k in keys]
    if not any(given):
        return None
    if not all(given):
        raise UsageError("--t-start, --t-end and --t-samples go together")
    n = _number(st["t_samples"], "t-samples")
    if n != int(n):
        raise UsageError("--t-samples must be an integer")
    return TimeGrid(units.duration(st["t_start"]), units.duration(st["t_end"]), int(n))


def _emit(text, out):
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        tio.write_text(out, text)


def _render(columns, meta, fmt):
    return tio.signal_json(columns, meta) if fmt == "json" else tio.signal_csv(columns, meta)


def _write_report(signal, path):
    try:
        rep = fringe_report(signal).as_dict()
    except WindowTooNarrow as exc:
        rep = {"error": "WindowTooNarrow", "message": str(exc)}
    tio.write_text(path, json.dumps(rep, indent=1, sort_keys=True) + "\n")


# --- commands ----------------------------------------------------------

def _signal_output(signal, st, channels, scenario, extra=None):
    meta = {"scenario": scenario}
    meta.update(tio.config_metadata(signal.config, signal.grid))
    if extra:
        meta.update(extra)
    return _render(tio.signal_columns(signal, channels), meta, st["format"])


def cmd_quantum(args):
    st = _settings(args)
    cfg = as_validated(_template(st))
    signal = quantum_tof(_time_grid(st), cfg, channels=args.channels)
    _emit(_signal_output(signal, st, args.channels, "pi1"), st.get("out"))
    if args.report:
        _write_report(signal, args.report)
    return EXIT_OK


def cmd_geometry(args):
    st = _settings(args)
    name = st.get("scenario")
    if name not in SCENARIOS:
        raise UsageError(f"unknown scenario {name!r}; choose from {', '.join(sorted(SCENARIOS))}")
    cfg = as_validated(_template(st))
    grid = _time_grid(st)
    if name == "pi1":
        signal = quantum_tof(grid, cfg, channels=args.channels)
        text = _signal_output(signal, st, args.channels, "pi1")
    else:
        if args.channels:
            raise UsageError("--channels is only available for pi1")
        X = units.length(st["X"]) if st.get("X") is not None else cfg.H
        signal = scenario_signal(name, grid, cfg, X)
        extra = {"detector_X_m": X} if name in ("pi2", "pi4") else None
        text = _signal_output(signal, st, False, name, extra)
    _emit(text, st.get("out"))
    if args.report:
        _write_report(signal, args.report)
    return EXIT_OK


def cmd_classical(args):
    st = _settings(args)
    temperature = units.temperature(st.get("temperature") or "1uK")
    cfg = _template(st)
    cloud = ThermalCloud(units.length(st["sigma0"]), temperature, cfg.particle)
    H, g = cfg.detector_H, cfg.gravity.g
    grid = _time_grid(st)
    if grid is None:
        a, b = classical_time_window(H, cloud, g)
        grid = TimeGrid(a, b, 4001)
    t = grid.times
    dens = classical_distribution(t, H, cloud, g)
    meta = {
        "scenario": "classical",
        "particle": cfg.particle.label,
        "mass_kg": cfg.particle.mass,
        "sigma0_m": cloud.sigma0,
        "temperature_K": temperature,
        "sigma_v_m_s": cloud.sigma_v,
        "g_m_s2": g,
        "detector_H_m": H,
        "t_start_s": grid.t_start,
        "t_end_s": grid.t_end,
        "n_samples": grid.n_samples,
    }
    fmt = st["format"]
    out = st.get("out")
    _emit(_render({"t_s": t, "pi_per_s": dens}, meta, fmt), out)
    if args.monte_carlo is not None:
        if out in (None, "-"):
            raise UsageError("--monte-carlo needs --out so the histogram has a file to go to")
        if args.monte_carlo < 1 or args.bins < 1:
            raise UsageError("--monte-carlo and --bins must be positive")
        mc = monte_carlo_tof(cloud, H, g, args.monte_carlo, args.seed)
        ks = ks_statistic(mc, H, cloud, g)
        edges = _histogram_edges(grid, args.bins)
        centres, hist = mc.histogram(edges)
        mc_meta = dict(meta, n_trajectories=args.monte_carlo, seed=args.seed,
                       arrival_fraction=mc.arrival_fraction, ks_statistic=ks, bins=args.bins)
        path = Path(out)
        mc_path = path.with_name(f"{path.stem}_mc{path.suffix or '.' + fmt}")
        cols = {"t_s": centres, "density_per_s": hist,
                "model_per_s": classical_distribution(centres, H, cloud, g)}
        tio.write_text(mc_path, _render(cols, mc_meta, fmt))
        sys.stdout.write(f"ks_statistic={ks:.6e} n={args.monte_carlo} seed={args.seed} histogram={mc_path}\n")
    return EXIT_OK


def _histogram_edges(grid, bins):
    return np.linspace(grid.t_start, grid.t_end, bins + 1)


def _sweep_value(param, text):
    if param in ("d", "sigma0", "H"):
        return units.length(text)
    if param == "mass":
        return units.mass(text)
    return _number(text, "g")


def cmd_sweep(args):
    st = _settings(args)
    values = [_sweep_value(args.param, v) for v in units.value_list(args.values)]
    template = _template(st)
    table = sweep(template, args.param, values)
    meta = {"grid_policy": "auto"}
    meta.update(tio.config_metadata(_TemplateView(template)))
    csv_text = tio.sweep_csv(table, meta)
    if args.out:
        stem = Path(args.out)
        if stem.suffix in (".csv", ".json"):
            stem = stem.with_suffix("")
        tio.write_text(stem.with_name(stem.name + ".csv"), csv_text)
        tio.write_text(stem.with_name(stem.name + ".json"), tio.sweep_json(table, meta))
    else:
        sys.stdout.write(csv_text)
    if not any(r.ok for r in table.rows):
        return EXIT_ALL_ROWS_FAILED
    return EXIT_OK


class _TemplateView:
    """Config view for the sweep header; the template itself may be invalid for some rows."""

    def __init__(self, cfg):
        self.config = cfg
        self.mass = cfg.particle.mass
        self.sigma0 = cfg.sigma0
        self.d = cfg.d
        self.c1 = cfg.c1
        self.c2 = cfg.c2
        self.g = cfg.gravity.g
        self.H = cfg.detector_H
        self.hbar = cfg.hbar
        try:
            self.norm = as_validated(cfg).norm
        except ConfigError:
            self.norm = float("nan")


def cmd_verify(args):
    from .verify import run_checks

    results = run_checks(quick=args.quick, hbar_scale=args.tamper_hbar)
    for r in results:
        print(r.line())
    failed = [r.name for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return EXIT_FAILED if failed else EXIT_OK


COMMANDS = {
    "quantum": cmd_quantum,
    "classical": cmd_classical,
    "geometry": cmd_geometry,
    "sweep": cmd_sweep,
    "verify": cmd_verify,
}


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(_join_negative_values(argv))
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, units.UnitError, UsageError, NonPositiveTime, WindowTooNarrow, ValueError) as exc:
        _fail(exc)


if __name__ == "__main__":
    sys.exit(main())
