"""Command-line front end.

    mqednmr shielding  --delta-uv "4 mm^-1"
    mqednmr sweep      --preset linearity
    mqednmr dynamics   --preset lifetime --baseline true
    mqednmr spectrum   --signal fid.csv
    mqednmr baseline   --sigma "0.001 ppm" --t2 "0.2 s"
    mqednmr reconstruct --preset roundtrip

Parameters come from built-in defaults, then a preset, then ``--config`` files
(key = value, any section; '#'-prefixed metadata blocks of earlier outputs are
accepted), then flags. Physical values need explicit unit suffixes.
"""

from __future__ import annotations

import argparse
import configparser
import math
import os
import sys
import traceback
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__, io
from .constants import CONSTANTS, ThermalParams, si_to_mm_inv
from .dynamics import PulseSpec, decay_params, effective_relax_signal, fid_signal
from .fields import CouplingFunction
from .integrate import IntegratorConfig
from .molecular import ElectronDensity1s, GaussianDensity, MolecularState, double_well, gibbs_density
from .reconstruction import (ForwardModel, ReconstructionProblem, asymmetric_rate_map,
                             forward_spectrum, reconstruct, ring_shift_map, temperature_ladder)
from .shielding import shielding_full, shielding_reduced
from .spectrum import fit_lorentz, transform
from .spin import SpinSpec
from .units import format_quantity, parse_list, parse_quantity

COMMANDS = ("shielding", "dynamics", "spectrum", "sweep", "reconstruct", "baseline")


@dataclass(frozen=True)
class Param:
    kind: str  # a unit kind, or int / float / str / bool / path
    default: str | None
    help: str
    many: bool = False


PARAMS: dict[str, Param] = {
    "temperature": Param("temperature", "293 K", "temperature"),
    "field": Param("field", "20 T", "external field B_z"),
    "delta_ir": Param("wavenumber", "0 mm^-1", "infrared cutoff"),
    "delta_uv": Param("wavenumber", "4 mm^-1", "ultraviolet cutoff(s), comma separated", True),
    "gamma": Param("gamma", f"{CONSTANTS.gamma_p!r} rad/s/T", "nuclear gyromagnetic ratio"),
    "bohr_radius": Param("length", f"{CONSTANTS.a_B!r} m", "1s length scale"),
    "method": Param("str", "reduced", "shielding method: reduced, full or both"),
    "samples": Param("int", "1000000", "Monte Carlo samples"),
    "batches": Param("int", "64", "Monte Carlo batches"),
    "seed": Param("int", "12345", "random seed"),
    "workers": Param("int", "1", "worker threads"),
    "rel_tol": Param("float", "1e-10", "quadrature relative tolerance"),
    "nuclear_width": Param("length", "0.1 A", "width of the Gaussian nuclear density"),
    "t_max": Param("str", "auto", "FID length with unit, or auto (12 T2)"),
    "n_samples": Param("int", "4096", "FID samples"),
    "frame": Param("str", "rotating", "rotating or lab"),
    "bare": Param("bool", "false", "use the bare second-order series"),
    "baseline": Param("bool", "false", "also write the effective-model signal"),
    "signal": Param("path", None, "input signal CSV (spectrum command)"),
    "sigma": Param("ppm", "0 ppm", "effective shielding (baseline command)"),
    "t2": Param("time", "1 s", "effective T2 (baseline command)"),
    "target": Param("path", None, "target spectrum CSV or two-column (ppm, intensity) file"),
    "nu0": Param("str", "auto", "ppm reference (rad/s) for two-column targets, or auto"),
    "n_theta": Param("int", "64", "rotor-angle grid size"),
    "barrier": Param("energy", "7.13e-21 J", "double-well barrier of the initial guess"),
    "asymmetry": Param("energy", "5.0e-22 J", "double-well asymmetry of the initial guess"),
    "max_iter": Param("int", "4000", "optimizer iterations"),
    "regularization": Param("float", "1e-3", "entropy regularizer weight"),
    "threshold": Param("float", "0.02", "agreement threshold (relative spectral RMS)"),
    "ladder": Param("bool", "false", "run the temperature ladder instead of a fit"),
    "temperatures": Param("temperature", "100, 150, 200, 300, 450, 700, 1000, 1500, 2500 K",
                          "ladder temperatures", True),
    "rotor_barrier": Param("energy", "1.618e-20 J", "cosine-rotor barrier for the ladder"),
    "tag": Param("str", "", "file name prefix"),
}

_KT293 = CONSTANTS.k_B * 293.0

PRESETS: dict[str, dict[str, str]] = {
    "linearity": {"command": "sweep", "delta_uv": "4, 5, 6, 7, 8, 9, 10, 11 mm^-1",
             "temperature": "293 K", "delta_ir": "0 mm^-1"},
    "lineshape": {"command": "dynamics", "delta_uv": "4, 5, 6, 7, 8, 9, 10, 11 mm^-1",
              "temperature": "293 K", "field": "20 T"},
    # the lineshape grid divided by 100
    "lineshape-narrow": {"command": "dynamics",
              "delta_uv": "0.04, 0.05, 0.06, 0.07, 0.08, 0.09, 0.10, 0.11 mm^-1",
              "temperature": "293 K", "field": "20 T"},
    "lifetime": {"command": "dynamics", "delta_uv": "0.05, 0.1 mm^-1", "temperature": "293 K",
             "field": "20 T", "baseline": "true"},
    "roundtrip": {"command": "reconstruct", "target": "package:roundtrip_target.csv",
                  "barrier": f"{2.2 * _KT293!r} J", "asymmetry": f"{0.2 * _KT293!r} J"},
    "ladder": {"command": "reconstruct", "ladder": "true",
               "rotor_barrier": f"{4.0 * _KT293!r} J"},
}


class RunError(RuntimeError):
    pass


# --- configuration ----------------------------------------------------------------


def _convert(name: str, raw: str):
    p = PARAMS[name]
    raw = raw.strip()
    if p.kind == "int":
        return int(raw)
    if p.kind == "float":
        return float(raw)
    if p.kind == "bool":
        low = raw.lower()
        if low not in ("true", "false", "yes", "no", "1", "0"):
            raise ValueError(f"{name}: expected true or false, got {raw!r}")
        return low in ("true", "yes", "1")
    if p.kind in ("str", "path"):
        return raw
    if p.many:
        return parse_list(raw, p.kind)
    return parse_quantity(raw, p.kind)


def _encode(name: str, value) -> str:
    p = PARAMS[name]
    if p.kind in ("int", "str", "path"):
        return str(value)
    if p.kind == "float":
        return repr(float(value))
    if p.kind == "bool":
        return "true" if value else "false"
    if p.many:
        unit = format_quantity(1.0, p.kind).split(" ", 1)[1]
        return ", ".join(repr(float(v)) for v in value) + f" {unit}"
    return format_quantity(value, p.kind)


def read_config_file(path) -> dict[str, str]:
    """Flat key = value pairs from an ini-style file or an output metadata block."""
    text = Path(path).read_text()
    lines = text.splitlines()
    if lines and lines[0].startswith("# mqednmr"):
        body = []
        for line in lines:
            if line.startswith("#"):
                body.append(line[1:].strip())
        text = "\n".join(l for l in body if l.startswith("[") or "=" in l)
        if not text.lstrip().startswith("["):
            text = "[run]\n" + text
    cp = configparser.ConfigParser(interpolation=None, delimiters=("=",))
    cp.optionxform = str
    try:
        cp.read_string(text, source=str(path))
    except configparser.Error as exc:
        raise ValueError(f"{path}: {exc}") from None
    out: dict[str, str] = {}
    for section in cp.sections():
        if section not in ("run", "params", "physics", "integrator", "dynamics", "reconstruct"):
            continue
        for k, v in cp.items(section):
            out[k] = v
    return out


def resolve(args: argparse.Namespace) -> tuple[str, dict]:
    raw = {k: p.default for k, p in PARAMS.items() if p.default is not None}
    command = args.command
    layers: list[dict[str, str]] = []
    if args.preset:
        if args.preset not in PRESETS:
            raise ValueError(f"unknown preset {args.preset!r}; choose from {sorted(PRESETS)}")
        layers.append(dict(PRESETS[args.preset]))
    for cfg in args.config or []:
        layers.append(read_config_file(cfg))
    flags = {k: v for k, v in vars(args).items() if k in PARAMS and v is not None}
    layers.append(flags)
    for layer in layers:
        for k, v in layer.items():
            if k in ("command", "version"):
                continue
            if k not in PARAMS:
                raise ValueError(f"unknown parameter {k!r}")
            raw[k] = v
    values = {}
    for k, v in raw.items():
        try:
            values[k] = _convert(k, v)
        except ValueError as exc:
            raise ValueError(f"{k}: {exc}") from None
    for k in ("temperature", "field", "bohr_radius", "nuclear_width", "t2"):
        if not values[k] > 0.0:
            raise ValueError(f"{k} must be positive")
    if min(values["delta_uv"]) <= values["delta_ir"]:
        raise ValueError("every delta_uv must exceed delta_ir")
    values["preset"] = args.preset or ""
    return command, values


def run_block(command: str, values: dict) -> dict[str, str]:
    block = {"command": command}
    for k in PARAMS:
        if k in values:
            block[k] = _encode(k, values[k])
    block["version"] = __version__
    return block


# --- helpers ----------------------------------------------------------------------


def _phi(values, duv):
    return CouplingFunction(values["delta_ir"], duv)


def _tag(values, name, duv=None):
    parts = [values["tag"]] if values["tag"] else []
    parts.append(name)
    if duv is not None:
        parts.append(f"duv{si_to_mm_inv(duv):.6g}mm")
    return "_".join(parts) + ".csv"


def _time_grid(values, rate):
    n = values["n_samples"]
    if values["t_max"] == "auto":
        if rate <= 0.0:
            raise RunError("t_max = auto needs a decaying signal; give t_max explicitly")
        t_max = 12.0 / rate
    else:
        t_max = parse_quantity(values["t_max"], "time")
    return np.linspace(0.0, t_max, n)


def _linear_fit(x, y):
    x, y = np.asarray(x), np.asarray(y)
    slope, intercept = np.polyfit(x, y, 1)
    pred = slope * x + intercept
    ss_res = float(np.sum((y - pred) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else float("nan")
    return float(slope), float(intercept), r2


def _package_file(ref: str) -> Path:
    if ref.startswith("package:"):
        return Path(str(resources.files("mqednmr") / "data" / ref.split(":", 1)[1]))
    return Path(ref)


# --- commands ---------------------------------------------------------------------


def _shielding_rows(values):
    thermal = ThermalParams(values["temperature"])
    state = MolecularState(GaussianDensity(width=values["nuclear_width"]),
                           ElectronDensity1s(values["bohr_radius"]), values["temperature"])
    methods = {"reduced": ["reduced"], "full": ["full"], "both": ["reduced", "full"]}.get(values["method"])
    if methods is None:
        raise ValueError(f"unknown method {values['method']!r}")
    rows, failures = [], 0
    for duv in values["delta_uv"]:
        phi = _phi(values, duv)
        for m in methods:
            try:
                if m == "reduced":
                    r = shielding_reduced(phi, thermal, values["bohr_radius"],
                                          IntegratorConfig(rel_tol=values["rel_tol"]))
                else:
                    cfg = IntegratorConfig(mode="monte-carlo", seed=values["seed"],
                                           samples=values["samples"], batches=values["batches"],
                                           workers=values["workers"])
                    r = shielding_full(phi, thermal, state, cfg)
                rows.append([duv, si_to_mm_inv(duv), values["temperature"], r.a_value, r.ppm,
                             r.error_estimate, r.method, "ok"])
            except Exception as exc:  # recorded per row; the sweep continues
                failures += 1
                rows.append([duv, si_to_mm_inv(duv), values["temperature"], math.nan, math.nan,
                             math.nan, m, f"failed: {type(exc).__name__}"])
    return rows, failures


SWEEP_COLUMNS = ["delta_uv_m^-1", "delta_uv_mm^-1", "T_K", "a", "a_ppm", "error", "method", "status"]


def run_shielding_sweep(values, outdir: Path, command="sweep") -> tuple[list[Path], int]:
    rows, failures = _shielding_rows(values)
    result = {"failed_points": failures}
    ok = [r for r in rows if r[-1] == "ok"]
    for m in sorted({r[6] for r in ok}):
        pts = [r for r in ok if r[6] == m]
        if len(pts) >= 2:
            slope, intercept, r2 = _linear_fit([p[1] for p in pts], [p[4] for p in pts])
            result.update({f"{m}_slope_ppm_per_mm^-1": slope,
                           f"{m}_intercept_ppm": intercept, f"{m}_r2": r2})
    path = io.write_table(outdir / _tag(values, command), SWEEP_COLUMNS, rows,
                          {"run": run_block(command, values), "result": result})
    return [path], failures


FIT_COLUMNS = ["delta_uv_m^-1", "delta_uv_mm^-1", "shift_ppm", "fwhm_Hz", "height", "T2_s",
               "rms_residual", "predicted_shift_ppm", "predicted_rate_1/s"]


def run_dynamics(values, outdir: Path) -> tuple[list[Path], int]:
    thermal = ThermalParams(values["temperature"])
    spec = SpinSpec(values["gamma"])
    state = MolecularState(GaussianDensity(width=values["nuclear_width"]),
                           ElectronDensity1s(values["bohr_radius"]), values["temperature"])
    run = run_block("dynamics", values)
    paths, rows, failures = [], [], 0
    for duv in values["delta_uv"]:
        phi = _phi(values, duv)
        dp = decay_params(phi, thermal, spec, values["field"], state)
        try:
            grid = _time_grid(values, dp.rate)
            sig = fid_signal(phi, thermal, state, spec, values["field"], PulseSpec(), grid,
                             frame=values["frame"], bare=values["bare"],
                             quad=IntegratorConfig(rel_tol=values["rel_tol"]))
            paths.append(io.write_signal(outdir / _tag(values, "fid", duv), sig, run))
            sp = transform(sig)
            fit = fit_lorentz(sp)
            fit_meta = {"shift_ppm": fit.center_ppm, "fwhm_Hz": fit.fwhm, "height": fit.height,
                        "T2_s": fit.t2, "rms_residual": fit.rms_residual, "flags": fit.flags}
            paths.append(io.write_spectrum(outdir / _tag(values, "spectrum", duv), sp, run, fit_meta))
            rows.append([duv, si_to_mm_inv(duv), fit.center_ppm, fit.fwhm, fit.height, fit.t2,
                         fit.rms_residual, -dp.shift, dp.rate])
            if values["baseline"]:
                base = effective_relax_signal(-fit.center_ppm, fit.t2, abs(spec.larmor(values["field"])),
                                              grid, frame=values["frame"])
                paths.append(io.write_signal(outdir / _tag(values, "baseline", duv), base, run))
        except Exception as exc:
            failures += 1
            rows.append([duv, si_to_mm_inv(duv)] + [math.nan] * 7)
            print(f"dynamics failed at delta_uv = {duv!r} m^-1: {exc}", file=sys.stderr)
    result = {"failed_points": failures}
    ok = [r for r in rows if not math.isnan(r[2])]
    if len(ok) >= 2:
        for col, name in ((2, "shift"), (3, "fwhm")):
            s, i, r2 = _linear_fit([r[1] for r in ok], [r[col] for r in ok])
            result.update({f"{name}_slope": s, f"{name}_intercept": i, f"{name}_r2": r2})
    paths.append(io.write_table(outdir / _tag(values, "fits"), FIT_COLUMNS, rows,
                                {"run": run, "result": result}))
    return paths, failures


def run_spectrum(values, outdir: Path) -> tuple[list[Path], int]:
    if not values.get("signal"):
        raise ValueError("spectrum needs --signal")
    sig = io.read_signal(values["signal"])
    sp = transform(sig)
    fit = fit_lorentz(sp)
    meta = {"shift_ppm": fit.center_ppm, "fwhm_Hz": fit.fwhm, "height": fit.height,
            "T2_s": fit.t2, "rms_residual": fit.rms_residual, "flags": fit.flags,
            "transform_flags": sp.meta.get("transform_flags", [])}
    return [io.write_spectrum(outdir / _tag(values, "spectrum"), sp,
                              run_block("spectrum", values), meta)], 0


def run_baseline(values, outdir: Path) -> tuple[list[Path], int]:
    nu0 = abs(values["gamma"] * values["field"])
    rate = 1.0 / values["t2"]
    grid = _time_grid(values, rate)
    sig = effective_relax_signal(values["sigma"], values["t2"], nu0, grid, frame=values["frame"])
    run = run_block("baseline", values)
    sp = transform(sig)
    fit = fit_lorentz(sp)
    meta = {"shift_ppm": fit.center_ppm, "fwhm_Hz": fit.fwhm, "height": fit.height,
            "T2_s": fit.t2, "rms_residual": fit.rms_residual}
    return [io.write_signal(outdir / _tag(values, "baseline"), sig, run),
            io.write_spectrum(outdir / _tag(values, "baseline_spectrum"), sp, run, meta)], 0


def default_forward_model(n_theta: int = 64) -> ForwardModel:
    return ForwardModel.from_maps(n_theta, ring_shift_map(), asymmetric_rate_map())


def run_reconstruct(values, outdir: Path) -> tuple[list[Path], int]:
    run = run_block("reconstruct", values)
    if values["ladder"]:
        from .molecular import cosine_rotor
        steps = temperature_ladder(cosine_rotor(values["rotor_barrier"]), values["temperatures"])
        rows = []
        for s in steps:
            peaks = sorted(s.peaks_ppm)
            rows.append([s.temperature, len(peaks), peaks[0], peaks[-1], s.separation,
                         s.positions_ppm[0], s.positions_ppm[1]])
        seps = [r[4] for r in rows]
        merged = rows[-1][1] == 1
        monotone = all(b < a for a, b in zip(seps, seps[1:]))
        result = {"strictly_decreasing": monotone, "merged_at_highest_T": merged}
        path = io.write_table(outdir / _tag(values, "ladder"),
                              ["T_K", "n_peaks", "low_peak_ppm", "high_peak_ppm", "separation_ppm",
                               "site_A_ppm", "site_B_ppm"], rows, {"run": run, "result": result})
        return [path], 0 if (monotone and merged) else 1
    if not values.get("target"):
        raise ValueError("reconstruct needs --target (or --ladder true)")
    model = default_forward_model(values["n_theta"])
    nu0 = None if values["nu0"] == "auto" else float(values["nu0"])
    target, component = io.read_spectrum(_package_file(values["target"]), nu0)
    problem = ReconstructionProblem(
        target, model, energy_curve=double_well(values["barrier"], values["asymmetry"]),
        temperature=values["temperature"], regularization=values["regularization"],
        threshold=values["threshold"], component=component)
    res = reconstruct(problem, max_iter=values["max_iter"], seed=values["seed"])
    dens_path = io.write_table(outdir / _tag(values, "density"), ["theta_rad", "weight"],
                               zip(res.density.theta, res.density.weights),
                               {"run": run, "result": {"objective": res.objective,
                                                       "converged": res.converged}})
    summary = {"objective": res.objective, "initial_objective": res.initial_objective,
               "iterations": res.iterations, "converged": res.converged,
               "entropy": res.density.entropy(), "meta": res.meta, "run": run}
    truth = _package_file(values["target"]).with_name("roundtrip_truth.csv")
    if values["target"].startswith("package:") and truth.exists():
        from .molecular import total_variation
        _, _, data = io.read_csv(truth)
        summary["tv_to_truth"] = total_variation(res.density.weights, data[:, 1])
    paths = [dens_path, io.write_summary(outdir / _tag(values, "summary").replace(".csv", ".json"),
                                         summary)]
    return paths, 0 if res.converged else 1


def make_roundtrip_fixture(directory) -> tuple[Path, Path]:
    """Write the packaged synthetic target and its generating density."""
    directory = Path(directory)
    model = default_forward_model(64)
    truth = gibbs_density(double_well(3.0 * _KT293, 0.5 * _KT293), 293.0, 64)
    sp = forward_spectrum(truth, model)
    meta = {"fixture": {"description": "forward spectrum of a bimodal Gibbs density",
                        "barrier_J": 3.0 * _KT293, "asymmetry_J": 0.5 * _KT293,
                        "temperature_K": 293.0}}
    t = io.write_spectrum(directory / "roundtrip_target.csv", sp, meta["fixture"])
    d = io.write_table(directory / "roundtrip_truth.csv", ["theta_rad", "weight"],
                       zip(truth.theta, truth.weights), meta)
    return t, d


RUNNERS = {
    "shielding": lambda v, o: run_shielding_sweep(v, o, "shielding"),
    "sweep": run_shielding_sweep,
    "dynamics": run_dynamics,
    "spectrum": run_spectrum,
    "baseline": run_baseline,
    "reconstruct": run_reconstruct,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mqednmr", description=__doc__.split("\n\n")[0])
    ap.add_argument("--version", action="version", version=f"mqednmr {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for cmd in COMMANDS:
        sp = sub.add_parser(cmd)
        sp.add_argument("--preset", choices=sorted(PRESETS))
        sp.add_argument("--config", action="append", metavar="FILE")
        sp.add_argument("--output-dir", dest="output_dir")
        for name, p in PARAMS.items():
            sp.add_argument("--" + name.replace("_", "-"), dest=name, default=None, help=p.help)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        command, values = resolve(args)
        if args.preset and PRESETS[args.preset].get("command", command) != command:
            raise ValueError(f"preset {args.preset} belongs to the "
                             f"{PRESETS[args.preset]['command']} command")
        outdir = io.output_dir(args.output_dir)
        paths, failures = RUNNERS[command](values, outdir)
    except Exception as exc:
        print(f"mqednmr {args.command}: error: {exc}", file=sys.stderr)
        if "MQEDNMR_DEBUG" in os.environ:
            traceback.print_exc()
        return 2
    for p in paths:
        print(p)
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
