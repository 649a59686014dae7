"""CSV and JSON serialisation of signals and sweep tables.

Signal CSV layout::

    # key=value          (one line per resolved parameter)
    t_s,pi_per_s[,j1,j2,cross,p12,delta]
    4.400000000000000e-02,1.234567890123457e+03,...

Numbers use ``%.15e``; lines end with ``\\n``.
"""
import csv
import io as _io
import json

import numpy as np

SCHEMA = "quantum_tof/1"
SIGNAL_COLUMNS = ("t_s", "pi_per_s")
CHANNEL_COLUMNS = ("j1", "j2", "cross", "p12", "delta")
SWEEP_COLUMNS = (
    "parameter",
    "value_si",
    "status",
    "n_maxima",
    "n_fringes",
    "visibility",
    "max_contrast",
    "mean_arrival_s",
    "total_prob",
    "peak_value_per_s",
    "peak_time_s",
    "error",
)


def fmt(x):
    return f"{float(x):.15e}"


def _meta_value(v):
    if isinstance(v, float):
        return f"{v:.17g}"
    if isinstance(v, complex):
        return f"{v.real:.17g}{v.imag:+.17g}j"
    return str(v)


def config_metadata(cfg, grid=None):
    """Flat ``{key: value}`` description of a validated config (and grid)."""
    meta = {
        "particle": cfg.config.particle.label,
        "mass_kg": cfg.mass,
        "sigma0_m": cfg.sigma0,
        "d_m": cfg.d,
        "c1": cfg.c1,
        "c2": cfg.c2,
        "g_m_s2": cfg.g,
        "detector_H_m": cfg.H,
        "hbar_J_s": cfg.hbar,
        "norm": cfg.norm,
    }
    if grid is not None:
        meta.update(t_start_s=grid.t_start, t_end_s=grid.t_end, n_samples=int(grid.n_samples))
    return meta


def signal_columns(signal, channels=False):
    cols = {"t_s": signal.t, "pi_per_s": np.asarray(signal.pi)}
    if channels:
        if signal.channels is None:
            raise ValueError("signal was computed without channels")
        for name in CHANNEL_COLUMNS:
            cols[name] = np.asarray(getattr(signal.channels, name))
    return cols


def signal_csv(columns, metadata):
    buf = _io.StringIO(newline="")
    buf.write(f"# schema={SCHEMA}\n")
    for k, v in metadata.items():
        buf.write(f"# {k}={_meta_value(v)}\n")
    names = list(columns)
    buf.write(",".join(names) + "\n")
    data = np.column_stack([np.asarray(columns[n], dtype=float) for n in names])
    for row in data:
        buf.write(",".join(fmt(x) for x in row) + "\n")
    return buf.getvalue()


def signal_json(columns, metadata):
    doc = {
        "schema": SCHEMA,
        "metadata": {k: _json_value(v) for k, v in metadata.items()},
        "columns": list(columns),
        "data": {k: [float(x) for x in np.asarray(v, dtype=float)] for k, v in columns.items()},
    }
    return json.dumps(doc, indent=1) + "\n"


def _json_value(v):
    if isinstance(v, complex):
        return [v.real, v.imag]
    if isinstance(v, np.generic):
        return v.item()
    return v


def read_signal_csv(path):
    """``(metadata, columns)`` from a signal CSV; metadata values stay strings."""
    meta = {}
    with open(path, newline="") as fh:
        lines = fh.read().split("\n")
    body = []
    for line in lines:
        if line.startswith("# "):
            k, _, v = line[2:].partition("=")
            meta[k] = v
        elif line:
            body.append(line)
    reader = csv.reader(body)
    header = next(reader)
    rows = np.array([[float(x) for x in r] for r in reader])
    return meta, {h: rows[:, i] for i, h in enumerate(header)}


def sweep_records(table):
    out = []
    for row in table.rows:
        rec = {"parameter": table.parameter, "value_si": row.value}
        if row.ok:
            r = row.report
            rec.update(
                status="ok",
                n_maxima=r.n_maxima,
                n_fringes=r.n_fringes,
                visibility=r.visibility,
                max_contrast=r.max_contrast,
                mean_arrival_s=r.mean_arrival,
                total_prob=r.total_prob,
                peak_value_per_s=r.peak_value,
                peak_time_s=r.peak_time,
                error="",
            )
        else:
            rec.update({c: None for c in SWEEP_COLUMNS[3:-1]}, status="error", error=row.error)
        out.append(rec)
    return out


def sweep_csv(table, metadata):
    buf = _io.StringIO(newline="")
    buf.write(f"# schema={SCHEMA}\n")
    for k, v in metadata.items():
        buf.write(f"# {k}={_meta_value(v)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for rec in sweep_records(table):
        w.writerow(
            [
                fmt(v) if isinstance(v, float) else ("" if v is None else v)
                for v in (rec[c] for c in SWEEP_COLUMNS)
            ]
        )
    return buf.getvalue()


def sweep_json(table, metadata):
    doc = {
        "schema": SCHEMA,
        "metadata": {k: _json_value(v) for k, v in metadata.items()},
        "parameter": table.parameter,
        "rows": sweep_records(table),
    }
    return json.dumps(doc, indent=1) + "\n"


def write_text(path, text):
    with open(path, "w", newline="\n") as fh:
        fh.write(text)
