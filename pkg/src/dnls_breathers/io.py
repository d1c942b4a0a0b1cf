"""CSV/JSON export of fields, profiles, solver results and trajectories.

Floats are written with 17 significant digits so every value reads back
bit-for-bit.  JSON is written with a fixed key order and indentation so
identical inputs give identical files.
"""

from __future__ import annotations

import json
import math
import re
from pathlib import Path

import numpy as np

from .lattice import LatticeField

_HEADER = re.compile(r"#\s*dim=(\d+)\s+mu=(\S+)\s+radius=(\d+)\s*$")


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def _clean(obj):
    """Turn numpy scalars and non-finite floats into plain JSON values."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    return obj


def write_json(path, obj) -> Path:
    path = Path(path)
    path.write_text(json.dumps(_clean(obj), indent=2) + "\n")
    return path


def read_json(path) -> dict:
    return json.loads(Path(path).read_text())


# -- lattice fields ------------------------------------------------------------


def field_to_csv(f: LatticeField, path=None, complex_values: np.ndarray | None = None) -> str:
    """Header ``# dim=<n> mu=<mu> radius=<K>``, then ``i[,j],value`` rows in lexicographic order.

    With ``complex_values`` the value column becomes the pair ``re,im``.
    """
    lines = [f"# dim={f.dim} mu={fmt(f.mesh)} radius={f.radius}"]
    idx = np.indices(f.shape).reshape(f.dim, -1).T - f.radius
    if complex_values is None:
        vals = [fmt(v) for v in f.values.ravel()]
    else:
        cv = np.asarray(complex_values).ravel()
        vals = [f"{fmt(v.real)},{fmt(v.imag)}" for v in cv]
    lines += [",".join(map(str, ij)) + "," + v for ij, v in zip(idx, vals)]
    text = "\n".join(lines) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text


def _parse_field(text: str, ncols: int):
    rows = text.splitlines()
    m = _HEADER.match(rows[0]) if rows else None
    if m is None:
        raise ValueError("missing '# dim=<n> mu=<float> radius=<K>' header")
    dim, mesh, radius = int(m[1]), float(m[2]), int(m[3])
    data = np.array([[float(x) for x in r.split(",")] for r in rows[1:] if r.strip()])
    shape = (2 * radius + 1,) * dim
    if data.shape != (np.prod(shape), dim + ncols):
        raise ValueError(f"expected {np.prod(shape)} rows of {dim + ncols} columns, got {data.shape}")
    idx = data[:, :dim].astype(int) + radius
    vals = np.zeros(shape + (ncols,))
    vals[tuple(idx.T)] = data[:, dim:]
    return dim, mesh, radius, vals


def field_from_csv(source) -> LatticeField:
    """Inverse of :func:`field_to_csv`; ``source`` is a path or the CSV text."""
    text = _read_text(source)
    dim, mesh, radius, vals = _parse_field(text, 1)
    return LatticeField(dim, mesh, radius, vals[..., 0])


def complex_field_from_csv(source):
    """Read a ``re,im`` snapshot; returns ``(LatticeField of zeros, complex values)``."""
    text = _read_text(source)
    dim, mesh, radius, vals = _parse_field(text, 2)
    return LatticeField.zeros(dim, mesh, radius), vals[..., 0] + 1j * vals[..., 1]


def _read_text(source) -> str:
    if isinstance(source, Path) or (isinstance(source, str) and "\n" not in source and Path(source).exists()):
        return Path(source).read_text()
    return str(source)


# -- module reports ----------------------------------------------------------------


def export_profile(prof, outdir, stem: str = "profile", mass: float | None = None) -> tuple[Path, Path]:
    from .continuum import continuum_functionals

    outdir = Path(outdir)
    csv_path = outdir / f"{stem}.csv"
    lines = ["r,psi"] + [f"{fmt(r)},{fmt(v)}" for r, v in zip(prof.r, prof.psi)]
    csv_path.write_text("\n".join(lines) + "\n")
    if mass is None:
        mass = continuum_functionals(prof)[1]
    meta = {"dim": prof.dim, "p": prof.p, "lambda_c": prof.lambda_c, "amplitude": prof.amplitude, "mass": mass}
    return csv_path, write_json(outdir / f"{stem}.json", meta)


def identity_report(name: str, lhs: float, rhs: float) -> dict:
    err = abs(lhs - rhs)
    scale = max(abs(lhs), abs(rhs))
    return {"identity": name, "lhs": lhs, "rhs": rhs, "abs_err": err, "rel_err": err / scale if scale else 0.0}


def export_result(res, outdir, stem: str = "breather") -> tuple[Path, Path]:
    outdir = Path(outdir)
    csv_path = outdir / f"{stem}.csv"
    field_to_csv(res.field, csv_path)
    return csv_path, write_json(outdir / f"{stem}.json", res.summary())


_REPORT_COLUMNS = ("mu", "radius", "qmu_error", "sup_error", "lambda", "iterations", "residual_inf")


def export_report(report, outdir, stem: str = "convergence") -> tuple[Path, Path]:
    outdir = Path(outdir)
    csv_path = outdir / f"{stem}.csv"
    lines = [",".join(_REPORT_COLUMNS)]
    for row in report.rows:
        lines.append(",".join(str(row[c]) if isinstance(row[c], int) else fmt(row[c]) for c in _REPORT_COLUMNS))
    csv_path.write_text("\n".join(lines) + "\n")
    return csv_path, write_json(outdir / f"{stem}.json", report.summary())


def export_trajectory(snapshots, summary: dict, outdir, stem: str = "snapshot") -> list[Path]:
    """One ``re,im`` CSV per snapshot plus ``<stem>_summary.json``."""
    outdir = Path(outdir)
    paths = []
    for k, s in enumerate(snapshots):
        path = outdir / f"{stem}_{k:04d}.csv"
        field_to_csv(LatticeField.zeros(s.dim, s.mesh, s.radius), path, complex_values=s.values)
        paths.append(path)
    keys = ("T", "dt", "dN", "dH", "return_defect")
    paths.append(write_json(outdir / f"{stem}_summary.json", {k: summary[k] for k in keys}))
    return paths
