"""CSV files with '#'-prefixed metadata blocks.

Layout::

    # mqednmr <version>
    # [run]
    # key = value
    # [result]
    # key = value
    col_a,col_b,...
    1.0,2.0,...

Numbers are written with 17 significant digits so that reading a file back
reproduces every value bit for bit. No timestamps are written, which keeps
reruns byte-identical.
"""

from __future__ import annotations

import json
import os
from pathlib import Path

import numpy as np

from .dynamics import SignalSeries
from .spectrum import Spectrum

OUTPUT_ENV = "MQEDNMR_OUTPUT_DIR"


def output_dir(explicit: str | os.PathLike | None = None) -> Path:
    d = Path(explicit) if explicit else Path(os.environ.get(OUTPUT_ENV, "."))
    d.mkdir(parents=True, exist_ok=True)
    return d


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, str):
        return v
    return json.dumps(v, sort_keys=True, default=_json_default)


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    raise TypeError(f"cannot serialise {type(o).__name__}")


def _num(v) -> str:
    return format(float(v), ".17g")


def write_csv(path, columns: list[str], rows, meta: dict[str, dict] | None = None) -> Path:
    from . import __version__
    path = Path(path)
    lines = [f"# mqednmr {__version__}"]
    for section, items in (meta or {}).items():
        lines.append(f"# [{section}]")
        for k, v in items.items():
            lines.append(f"# {k} = {_fmt(v)}")
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(_num(v) if not isinstance(v, str) else v for v in row))
    path.write_text("\n".join(lines) + "\n")
    return path


def read_metadata(path) -> dict[str, dict[str, str]]:
    meta: dict[str, dict[str, str]] = {}
    section = "run"
    for line in Path(path).read_text().splitlines():
        if not line.startswith("#"):
            continue
        body = line[1:].strip()
        if body.startswith("[") and body.endswith("]"):
            section = body[1:-1].strip()
            meta.setdefault(section, {})
        elif "=" in body:
            k, v = body.split("=", 1)
            meta.setdefault(section, {})[k.strip()] = v.strip()
    return meta


def read_csv(path, usecols: list[str] | None = None) -> tuple[dict, list[str], np.ndarray]:
    """Metadata, column names and a float array; errors name path:line.

    ``usecols`` picks columns by name, which lets tables with text columns
    (method, status) be read.
    """
    path = Path(path)
    meta = read_metadata(path)
    columns: list[str] | None = None
    pick: list[int] | None = None
    rows = []
    for n, line in enumerate(path.read_text().splitlines(), start=1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        fields = [f.strip() for f in s.split(",")]
        if columns is None:
            try:
                [float(f) for f in fields]
            except ValueError:
                columns = fields
                continue
            finally:
                if usecols is not None:
                    names = columns or [f"c{i}" for i in range(len(fields))]
                    missing = [c for c in usecols if c not in names]
                    if missing:
                        raise ValueError(f"{path}: no column(s) {missing}")
                    pick = [names.index(c) for c in usecols]
            columns = [f"c{i}" for i in range(len(fields))]
        if len(fields) != len(columns):
            raise ValueError(f"{path}:{n}: expected {len(columns)} fields, found {len(fields)}")
        chosen = fields if pick is None else [fields[i] for i in pick]
        try:
            rows.append([float(f) for f in chosen])
        except ValueError:
            raise ValueError(f"{path}:{n}: non-numeric value in {s!r}") from None
    if not rows:
        raise ValueError(f"{path}: no data rows")
    names = columns or []
    return meta, (names if pick is None else list(usecols)), np.array(rows)


# --- typed readers and writers --------------------------------------------------


def write_signal(path, sig: SignalSeries, run: dict | None = None) -> Path:
    meta = {"run": dict(run or {}),
            "signal": {"t0_s": sig.t0, "dt_s": sig.dt, "frame": sig.frame,
                       "nu_ref_rad_s": sig.nu_ref, **{k: v for k, v in sig.meta.items()
                                                      if k not in ("frame", "nu_ref_rad_s")}}}
    rows = zip(sig.t, sig.samples.real, sig.samples.imag)
    return write_csv(path, ["t", "Re", "Im"], rows, meta)


def read_signal(path) -> SignalSeries:
    meta, cols, data = read_csv(path)
    sm = meta.get("signal", {})
    t = data[:, 0]
    dt = float(sm["dt_s"]) if "dt_s" in sm else float(t[1] - t[0])
    return SignalSeries(float(sm.get("t0_s", t[0])), dt, data[:, 1] + 1j * data[:, 2],
                        sm.get("frame", "rotating"), float(sm.get("nu_ref_rad_s", 0.0)))


def write_spectrum(path, spec: Spectrum, run: dict | None = None, extra: dict | None = None) -> Path:
    meta = {"run": dict(run or {}),
            "spectrum": {"nu_ref_rad_s": spec.nu_ref, "nu0_rad_s": spec.nu0,
                         "transform": "one-sided trapezoid, kernel exp(+i nu t)"}}
    if extra:
        meta["result"] = extra
    ppm = spec.ppm if spec.nu0 else np.full(spec.offset.size, np.nan)
    rows = zip(spec.nu_hz, ppm, spec.values.real, spec.values.imag, np.abs(spec.values))
    return write_csv(path, ["nu_Hz", "ppm", "Re", "Im", "Abs"], rows, meta)


def read_spectrum(path, nu0: float | None = None) -> tuple[Spectrum, str]:
    """Read a spectrum CSV or a two-column (ppm, intensity) export.

    Returns the spectrum and the component to compare ('complex' or 'real').
    Two-column files need ``nu0`` (rad/s) unless their metadata provides it.
    """
    meta, cols, data = read_csv(path)
    sm = meta.get("spectrum", {})
    ref = nu0 if nu0 is not None else float(sm.get("nu0_rad_s", 0.0)) or None
    if data.shape[1] == 5:
        nu_ref = float(sm.get("nu_ref_rad_s", ref or 0.0))
        if ref is None:
            raise ValueError(f"{path}: spectrum file lacks nu0 metadata")
        offset = (data[:, 1] * 1e-6 * ref) + (ref - nu_ref)
        values = data[:, 2] + 1j * data[:, 3]
        comp = "complex"
    elif data.shape[1] == 2:
        if ref is None:
            raise ValueError(f"{path}: two-column spectrum needs nu0")
        nu_ref = ref
        offset = data[:, 0] * 1e-6 * ref
        values = data[:, 1].astype(complex)
        comp = "real"
    else:
        raise ValueError(f"{path}: expected 5 spectrum columns or 2 (ppm, intensity)")
    order = np.argsort(offset)
    return Spectrum(offset[order], values[order], nu_ref, ref), comp


def write_table(path, columns, rows, meta) -> Path:
    return write_csv(path, columns, rows, meta)


def write_summary(path, summary: dict) -> Path:
    path = Path(path)
    path.write_text(json.dumps(summary, indent=2, sort_keys=True, default=_json_default) + "\n")
    return path


__all__ = [
    "OUTPUT_ENV",
    "output_dir",
    "write_csv",
    "read_csv",
    "read_metadata",
    "write_signal",
    "read_signal",
    "write_spectrum",
    "read_spectrum",
    "write_table",
    "write_summary",
]
