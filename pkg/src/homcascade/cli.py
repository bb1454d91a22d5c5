"""homcli: command-line front end.

Subcommands: rate, coarse, scan, zerofind, figure, calibrate.  Every run
echoes the full physical configuration into a JSON result record printed on
stdout (and written with --out); grids and figure data go to CSV.  Flags can
also come from a JSON config file (--config); explicit flags win.  The
HOMCLI_OUTDIR environment variable supplies the default output directory.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from . import __version__
from .config import BiphotonSpectrum, CoarseGrainWindow, PhaseConfig
from .emit import json_string, write_csv, write_json
from .figures import FIGURE_IDS, emit_figure_data
from .rates import (
    lattice_rate_chunks,
    rate_analytic,
    rate_coarse_analytic,
    rate_coarse_numeric,
    rate_quadrature,
)
from .zeropoint import (
    CalibrationGeometry,
    ScanGrid,
    calibrate_from_scans,
    scan_report,
    scan_zero_manifold,
    solve_theta3_k4,
    synthesize_profiles,
    verify_k4_exclusive,
)


class CliError(ValueError):
    """Configuration problem reported as a structured error record."""


DEFAULTS = {
    "omega0": 20.0,
    "domega_plus": 0.25,
    "domega_minus": 1.0,
    "nodes": 128,
    "window": 0.3,
    "samples_per_axis": 41,
    "box": 3.0,
    "step": 0.1,
    "method": "analytic",
    "cal_range": 8.0,
    "cal_step": 0.02,
    "x2_offset": 25.0,
}


@dataclass
class RunConfig:
    subcommand: str
    k: int | None = None
    tau: tuple[float, ...] | None = None
    theta: tuple[float, ...] | None = None
    theta_mode: str = "explicit"  # "explicit" | "auto" | "zeros"
    spectrum: BiphotonSpectrum = BiphotonSpectrum()
    method: str = "analytic"
    nodes: int = 128
    window: float = 0.3
    samples_per_axis: int = 41
    numeric: bool = False
    box: float = 3.0
    step: float = 0.1
    figure: str = "all"
    no_plot: bool = False
    out: str | None = None
    csv: str | None = None
    outdir: str | None = None
    dl0: tuple[float, float, float] | None = None
    cal_range: float = 8.0
    cal_step: float = 0.02
    x2_offset: float = 25.0


def _parse_floats(text, name: str, count: int | None = None) -> tuple[float, ...]:
    if isinstance(text, (list, tuple)):
        vals = tuple(float(v) for v in text)
    else:
        try:
            vals = tuple(float(v) for v in str(text).split(",") if v != "")
        except ValueError as exc:
            raise CliError(f"could not parse --{name} {text!r}: {exc}") from None
    if count is not None and len(vals) != count:
        raise CliError(f"--{name} needs {count} comma-separated values, got {len(vals)}")
    return vals


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="homcli",
        description="coincidence rates, zero-point scans and figure data for "
        "k-module beam-splitter cascades",
    )
    parser.add_argument("--version", action="version", version=f"homcli {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add_common(p, *, physics=True, grid=False):
        p.add_argument("--config", help="JSON file with flag defaults (flags override)")
        p.add_argument("--out", help="write the JSON result record here as well")
        if physics:
            p.add_argument("--k", type=int, help="number of cascade modules")
            p.add_argument("--tau", help="comma-separated delays, length k")
            p.add_argument(
                "--theta",
                help="comma-separated phases (theta1 must be 0), or 'auto' "
                "(k=2: pi/2; k=4: solve theta3 from --theta2/--theta4)",
            )
            p.add_argument("--theta2", type=float, help="theta2 seed for k=4 auto")
            p.add_argument("--theta4", type=float, help="theta4 seed for k=4 auto")
            p.add_argument("--omega0", type=float, help="mean photon frequency")
            p.add_argument("--domega-plus", type=float, dest="domega_plus")
            p.add_argument("--domega-minus", type=float, dest="domega_minus")
        if grid:
            p.add_argument("--box", type=float, help="scan half-width per axis")
            p.add_argument("--step", type=float, help="scan lattice step")

    p_rate = sub.add_parser("rate", help="coincidence rate at one delay vector")
    add_common(p_rate)
    p_rate.add_argument("--method", choices=("analytic", "quadrature"))
    p_rate.add_argument("--nodes", type=int, help="quadrature nodes per axis")

    p_coarse = sub.add_parser("coarse", help="coarse-grained (fluctuation-averaged) rate")
    add_common(p_coarse)
    p_coarse.add_argument(
        "--numeric", action="store_true", help="box-average instead of the closed form"
    )
    p_coarse.add_argument("--window", type=float, help="averaging window T")
    p_coarse.add_argument("--samples-per-axis", type=int, dest="samples_per_axis")

    p_scan = sub.add_parser("scan", help="rate grid over tau space with extremes")
    add_common(p_scan, grid=True)
    p_scan.add_argument("--csv", help="also write the full rate grid as CSV")

    p_zero = sub.add_parser("zerofind", help="zero-manifold scan and exclusivity verdict")
    add_common(p_zero, grid=True)

    p_fig = sub.add_parser("figure", help="emit golden figure data (CSV + PNG)")
    p_fig.add_argument("--config", help="JSON file with flag defaults (flags override)")
    p_fig.add_argument("--out", help="write the JSON result record here as well")
    p_fig.add_argument("--id", dest="figure", choices=FIGURE_IDS + ("all",))
    p_fig.add_argument("--outdir", help="directory for CSV/PNG files")
    p_fig.add_argument("--no-plot", action="store_true", dest="no_plot")

    p_cal = sub.add_parser(
        "calibrate", help="two-step delay recovery self-test on synthetic profiles"
    )
    p_cal.add_argument("--config", help="JSON file with flag defaults (flags override)")
    p_cal.add_argument("--out", help="write the JSON result record here as well")
    p_cal.add_argument("--dl0", help="ground-truth length differences dl1,dl2,dl3")
    p_cal.add_argument("--cal-range", type=float, dest="cal_range", help="x3 scan half-range")
    p_cal.add_argument("--cal-step", type=float, dest="cal_step", help="x3 scan step")
    p_cal.add_argument("--x2-offset", type=float, dest="x2_offset", help="step-one x2 value")
    p_cal.add_argument("--csv", help="prefix for writing the two synthetic profiles")
    p_cal.add_argument("--domega-minus", type=float, dest="domega_minus")

    return parser


_CONFIG_KEYS = {
    "k", "tau", "theta", "theta2", "theta4", "omega0", "domega_plus", "domega_minus",
    "method", "nodes", "numeric", "window", "samples_per_axis", "box", "step",
    "figure", "no_plot", "out", "csv", "outdir", "dl0", "cal_range", "cal_step",
    "x2_offset",
}


def _merged_value(name: str, args: argparse.Namespace, file_cfg: dict, fallback=None):
    # identity checks: 0.0 == False would otherwise swallow explicit zeros
    cli_val = getattr(args, name, None)
    if cli_val is not None and cli_val is not False:
        return cli_val
    if name in file_cfg:
        return file_cfg[name]
    if cli_val is False:
        return False
    return fallback


def parse_config(argv: list[str]) -> RunConfig:
    args = _build_parser().parse_args(argv)

    file_cfg: dict = {}
    if getattr(args, "config", None):
        try:
            file_cfg = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise CliError(f"could not read config file {args.config!r}: {exc}") from None
        unknown = set(file_cfg) - _CONFIG_KEYS
        if unknown:
            raise CliError(f"unknown config keys: {sorted(unknown)}")

    def get(name, fallback=None):
        return _merged_value(name, args, file_cfg, fallback)

    rc = RunConfig(subcommand=args.subcommand)
    rc.out = get("out")
    rc.csv = get("csv")
    rc.outdir = get("outdir")

    if args.subcommand == "figure":
        rc.figure = get("figure", "all")
        rc.no_plot = bool(get("no_plot", False))
        return rc

    if args.subcommand == "calibrate":
        dl0 = get("dl0")
        if dl0 is None:
            raise CliError("calibrate needs --dl0 dl1,dl2,dl3 (self-test ground truth)")
        rc.dl0 = _parse_floats(dl0, "dl0", 3)
        rc.cal_range = float(get("cal_range", DEFAULTS["cal_range"]))
        rc.cal_step = float(get("cal_step", DEFAULTS["cal_step"]))
        rc.x2_offset = float(get("x2_offset", DEFAULTS["x2_offset"]))
        rc.spectrum = BiphotonSpectrum(
            domega_minus=float(get("domega_minus", DEFAULTS["domega_minus"]))
        )
        if rc.cal_step <= 0 or rc.cal_range <= rc.cal_step:
            raise CliError("calibrate needs cal_range > cal_step > 0")
        return rc

    k = get("k")
    if k is None:
        raise CliError(f"{args.subcommand} needs --k")
    rc.k = int(k)
    if rc.k < 1:
        raise CliError("k must be >= 1")

    rc.spectrum = BiphotonSpectrum(
        omega0=float(get("omega0", DEFAULTS["omega0"])),
        domega_plus=float(get("domega_plus", DEFAULTS["domega_plus"])),
        domega_minus=float(get("domega_minus", DEFAULTS["domega_minus"])),
    )

    theta_raw = get("theta")
    if theta_raw is None:
        rc.theta_mode = "zeros"
        rc.theta = (0.0,) * rc.k
    elif isinstance(theta_raw, str) and theta_raw.strip() == "auto":
        rc.theta_mode = "auto"
        if rc.k == 2:
            rc.theta = (0.0, math.pi / 2.0)
        elif rc.k == 4:
            theta2 = get("theta2")
            theta4 = get("theta4")
            if theta2 is None or theta4 is None:
                raise CliError("theta auto for k=4 requires --theta2 and --theta4")
            theta3 = solve_theta3_k4(float(theta2), float(theta4))
            rc.theta = (0.0, float(theta2), theta3, float(theta4))
        else:
            raise CliError("theta 'auto' is only defined for k in {2, 4}")
    else:
        rc.theta = _parse_floats(theta_raw, "theta", rc.k)

    tau_raw = get("tau")
    if args.subcommand in ("rate", "coarse"):
        if tau_raw is None:
            raise CliError(f"{args.subcommand} needs --tau with k values")
        rc.tau = _parse_floats(tau_raw, "tau", rc.k)

    if args.subcommand == "rate":
        rc.method = str(get("method", DEFAULTS["method"]))
        rc.nodes = int(get("nodes", DEFAULTS["nodes"]))
    if args.subcommand == "coarse":
        rc.numeric = bool(get("numeric", False))
        rc.window = float(get("window", DEFAULTS["window"]))
        rc.samples_per_axis = int(get("samples_per_axis", DEFAULTS["samples_per_axis"]))
    if args.subcommand in ("scan", "zerofind"):
        rc.box = float(get("box", DEFAULTS["box"]))
        rc.step = float(get("step", DEFAULTS["step"]))
    return rc


def _outdir() -> Path:
    return Path(os.environ.get("HOMCLI_OUTDIR", "."))


def _resolve(path_str: str) -> Path:
    path = Path(path_str)
    return path if path.is_absolute() else _outdir() / path


def _spectrum_record(spec: BiphotonSpectrum) -> dict:
    return {
        "omega0": spec.omega0,
        "domega_plus": spec.domega_plus,
        "domega_minus": spec.domega_minus,
    }


def _base_record(rc: RunConfig) -> dict:
    return {
        "subcommand": rc.subcommand,
        "engine": {"name": "homcascade", "version": __version__},
    }


def run(rc: RunConfig) -> dict:
    """Execute one parsed run and return the result record."""
    record = _base_record(rc)

    if rc.subcommand == "rate":
        cfg = PhaseConfig(rc.tau, rc.theta)
        record["inputs"] = {
            "k": cfg.k,
            "tau": list(cfg.tau),
            "theta": list(cfg.theta),
            "theta_mode": rc.theta_mode,
            "spectrum": _spectrum_record(rc.spectrum),
            "method": rc.method,
        }
        if rc.method == "quadrature":
            record["inputs"]["nodes"] = rc.nodes
            res = rate_quadrature(cfg, rc.spectrum, rc.nodes)
            record["outputs"] = {
                "total": res.total,
                "node_count": res.node_count,
                "converged": res.converged,
            }
            record["tolerances"] = {"convergence_probe": 1e-8}
        else:
            res = rate_analytic(cfg, rc.spectrum)
            record["outputs"] = {
                "total": res.total,
                "rbar": res.rbar,
                "delta": res.delta,
                "term_count": res.term_count,
            }
            record["tolerances"] = {"imag_residue": 1e-10}
        return record

    if rc.subcommand == "coarse":
        cfg = PhaseConfig(rc.tau, rc.theta)
        record["inputs"] = {
            "k": cfg.k,
            "tau": list(cfg.tau),
            "theta": list(cfg.theta),
            "theta_mode": rc.theta_mode,
            "spectrum": _spectrum_record(rc.spectrum),
            "numeric": rc.numeric,
        }
        if rc.numeric:
            win = CoarseGrainWindow(rc.window, rc.samples_per_axis)
            record["inputs"]["window"] = {
                "T": win.T,
                "samples_per_axis": win.samples_per_axis,
            }
            record["outputs"] = {
                "rbar_coarse": rate_coarse_numeric(cfg, rc.spectrum, win),
                "regime_ok": win.regime_ok(rc.spectrum),
            }
        else:
            record["outputs"] = {"rbar_coarse": rate_coarse_analytic(cfg, rc.spectrum)}
        return record

    if rc.subcommand in ("scan", "zerofind"):
        grid = ScanGrid(rc.box, rc.step)
        record["inputs"] = {
            "k": rc.k,
            "theta": list(rc.theta),
            "theta_mode": rc.theta_mode,
            "spectrum": _spectrum_record(rc.spectrum),
            "grid": {"box": grid.box, "step": grid.step},
        }
        if rc.subcommand == "zerofind":
            if rc.theta_mode == "auto" and rc.k == 4:
                verdict = verify_k4_exclusive(rc.theta[1], rc.theta[3], grid, rc.spectrum)
            else:
                verdict = scan_zero_manifold(rc.k, rc.theta, grid, rc.spectrum)
            record["outputs"] = {
                "exclusive": verdict.exclusive,
                "witness_rays": [list(r) for r in verdict.witness_rays],
                "scan_floor": verdict.scan_floor,
                "floor_at": list(verdict.floor_at) if verdict.floor_at else None,
                "n_zero_points": len(verdict.zero_points),
                "grid_spec": verdict.grid_spec,
            }
            record["tolerances"] = {"zero_rate": 1e-10}
            return record
        report = scan_report(rc.k, rc.theta, grid, rc.spectrum)
        record["outputs"] = {
            "rate_min": report.rate_min,
            "rate_min_at": list(report.rate_min_at),
            "rate_max": report.rate_max,
            "rate_max_at": list(report.rate_max_at),
            "n_points": report.n_points,
            "exclusive": report.verdict.exclusive,
            "witness_rays": [list(r) for r in report.verdict.witness_rays],
            "scan_floor": report.verdict.scan_floor,
        }
        if rc.csv:
            path = _resolve(rc.csv)
            header = [f"tau{i + 1}" for i in range(rc.k)] + ["rate"]

            def grid_rows():
                for coords, rates in lattice_rate_chunks(
                    rc.k, rc.theta, rc.spectrum, grid.step, grid.nhalf
                ):
                    for coord, val in zip(coords, rates):
                        yield tuple(float(v) for v in coord * grid.step) + (float(val),)

            write_csv(path, header, grid_rows())
            record["outputs"]["csv"] = str(path)
        return record

    if rc.subcommand == "figure":
        ids = FIGURE_IDS if rc.figure in (None, "all") else (rc.figure,)
        outdir = _resolve(rc.outdir) if rc.outdir else _outdir() / "figures"
        written = []
        for fid in ids:
            written.extend(str(p) for p in emit_figure_data(fid, outdir, render=not rc.no_plot))
        record["inputs"] = {"figures": list(ids), "render": not rc.no_plot}
        record["outputs"] = {"files": written}
        return record

    if rc.subcommand == "calibrate":
        xs = rc.cal_step * np.arange(
            -int(round(rc.cal_range / rc.cal_step)),
            int(round(rc.cal_range / rc.cal_step)) + 1,
        )
        geometry = CalibrationGeometry()
        dip, peak = synthesize_profiles(
            rc.dl0, xs, geometry, rc.spectrum.domega_minus, rc.x2_offset
        )
        est = calibrate_from_scans(dip, peak, geometry)
        record["inputs"] = {
            "dl0_truth": list(rc.dl0),
            "x3_range": rc.cal_range,
            "x3_step": rc.cal_step,
            "x2_offset": rc.x2_offset,
            "domega_minus": rc.spectrum.domega_minus,
        }
        record["outputs"] = {
            "dl1": est.dl1,
            "dl2": est.dl2,
            "dl3": est.dl3,
            "errors": [
                est.dl1 - abs(rc.dl0[0]),
                est.dl2 - abs(rc.dl0[1]),
                est.dl3 - rc.dl0[2],
            ],
            "extrema_locations": est.extrema_locations,
            "uncertainty": est.uncertainty,
            "degenerate_dip": est.degenerate_dip,
        }
        if rc.csv:
            prefix = _resolve(rc.csv)
            dip_path = write_csv(
                Path(str(prefix) + "_dip.csv"),
                ("x3", "rate"),
                [(float(a), float(b)) for a, b in zip(dip.x, dip.rate)],
            )
            peak_path = write_csv(
                Path(str(prefix) + "_peak.csv"),
                ("x3", "rate"),
                [(float(a), float(b)) for a, b in zip(peak.x, peak.rate)],
            )
            record["outputs"]["csv"] = [str(dip_path), str(peak_path)]
        return record

    raise CliError(f"unhandled subcommand {rc.subcommand!r}")


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        rc = parse_config(argv)
        record = run(rc)
    except (CliError, ValueError, ArithmeticError, OSError) as exc:
        err = {
            "error": {"type": type(exc).__name__, "message": str(exc)},
            "argv": argv,
        }
        sys.stderr.write(json_string(err))
        return 1
    sys.stdout.write(json_string(record))
    if rc.out:
        write_json(_resolve(rc.out), record)
    return 0


if __name__ == "__main__":
    sys.exit(main())
