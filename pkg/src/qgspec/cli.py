"""Command-line front end.

    qgspec star --degree 3
    qgspec hex --length 1 --coupling minus-r --kmax 20 --json out.json --csv bands.csv --svg fig.svg
    qgspec genhex --lengths 1,1.41421356237,1.73205080757 --kmax 40
    qgspec smatrix --degree 4 --k 1e6

Exit codes: 0 success, 2 invalid arguments, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .bandscan import ScanConfig, SpectrumReport
from .coupling import build_coupling, s_matrix, s_matrix_limits
from .errors import (
    InvalidArgumentError,
    NumericFailureError,
    NumericSingularityError,
    UnsupportedVariantError,
)
from .genhex import CommensurabilityConfig, GeneralHexProblem, compute_genhex_spectrum
from .hexband import RegularHexProblem, compute_hex_spectrum
from .star import star_bound_states

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 2, 3
SIG_DIGITS = 15
CSV_COLUMNS = ["band_index", "side", "kind", "k_lo", "k_hi", "E_lo", "E_hi"]
COUPLINGS = {"minus-r": "minusR", "r": "R"}


# --- serialisation --------------------------------------------------------------

def _round(x: float):
    if not math.isfinite(x):
        return None
    # + 0.0 turns -0.0 into 0.0
    return float(f"{x:.{SIG_DIGITS}g}") + 0.0


def normalize(obj):
    """JSON-ready copy with floats rounded to 15 significant digits."""
    if isinstance(obj, dict):
        return {str(k): normalize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [normalize(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return normalize(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _round(float(obj))
    return obj


def dumps(obj) -> str:
    return json.dumps(normalize(obj), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def report_to_dict(r: SpectrumReport) -> dict:
    return {
        "problem": r.problem,
        "flat_bands": [b.to_dict() for b in r.flat_bands],
        "bands": [b.to_dict() for b in r.ac_bands],
        "gaps": [g.to_dict() for g in r.gaps],
        "measure_fraction": r.measure_fraction,
        "diagnostics": r.diagnostics,
    }


def band_rows(r: SpectrumReport) -> list[list]:
    """Rows of the band table: AC bands in energy order, then flat bands."""
    rows = []
    for i, b in enumerate(list(r.ac_bands) + list(r.flat_bands)):
        rows.append([i, b.side, b.kind, b.lo, b.hi, b.energy_lo, b.energy_hi])
    return rows


def write_csv(path: str, rows: list[list]) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for row in rows:
        w.writerow([f"{v:.{SIG_DIGITS}g}" if isinstance(v, float) else v for v in row])
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(buf.getvalue())


def _complex_matrix(m: np.ndarray) -> dict:
    return {"re": np.real(m).tolist(), "im": np.imag(m).tolist()}


# --- run configuration ----------------------------------------------------------

@dataclass
class RunConfig:
    subcommand: str
    params: dict = field(default_factory=dict)
    json_path: str | None = None
    csv_path: str | None = None
    svg_path: str | None = None
    scan: ScanConfig | None = None


def _positive(name: str, v: float) -> float:
    if not (math.isfinite(v) and v > 0):
        raise InvalidArgumentError(f"{name} must be a positive number, got {v}")
    return v


def _parse_lengths(text: str) -> tuple[float, float, float]:
    try:
        vals = tuple(float(x) for x in text.split(","))
    except ValueError:
        raise InvalidArgumentError(f"--lengths expects a,b,c, got {text!r}") from None
    if len(vals) != 3:
        raise InvalidArgumentError(f"--lengths expects three values, got {len(vals)}")
    for v in vals:
        _positive("each length", v)
    return vals


def _scan_config(args) -> ScanConfig:
    step = None if args.grid_step is None else _positive("--grid-step", args.grid_step)
    tol = _positive("--edge-tol", args.edge_tol)
    return ScanConfig(grid_step=step, edge_tolerance=tol, workers=args.workers)


def build_run_config(args) -> RunConfig:
    """Validate every numeric parameter before any computation starts."""
    cmd = args.command
    rc = RunConfig(cmd, json_path=args.json, csv_path=getattr(args, "csv", None),
                   svg_path=getattr(args, "svg", None))
    if cmd == "star":
        if args.degree < 2:
            raise InvalidArgumentError(f"--degree must be >= 2, got {args.degree}")
        rc.params = {"degree": args.degree, "ell": _positive("--ell", args.ell)}
    elif cmd == "smatrix":
        if args.degree < 2:
            raise InvalidArgumentError(f"--degree must be >= 2, got {args.degree}")
        rc.params = {"degree": args.degree, "k": _positive("--k", args.k),
                     "ell": _positive("--ell", args.ell),
                     "coupling": COUPLINGS[args.coupling]}
    elif cmd == "hex":
        rc.params = {"length": _positive("--length", args.length),
                     "coupling": COUPLINGS[args.coupling],
                     "k_max": _positive("--kmax", args.kmax),
                     "kappa_max": _positive("--kappamax", args.kappamax)}
        rc.scan = _scan_config(args)
    elif cmd == "genhex":
        if args.max_den < 1:
            raise InvalidArgumentError("--max-den must be >= 1")
        rc.params = {"lengths": _parse_lengths(args.lengths),
                     "k_max": _positive("--kmax", args.kmax),
                     "kappa_max": _positive("--kappamax", args.kappamax),
                     "max_den": args.max_den,
                     "comm_tol": _positive("--comm-tol", args.comm_tol)}
        rc.scan = _scan_config(args)
    return rc


# --- subcommands ----------------------------------------------------------------

def _emit(rc: RunConfig, payload: dict) -> None:
    text = dumps(payload)
    if rc.json_path:
        with open(rc.json_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_star(rc: RunConfig) -> int:
    n, ell = rc.params["degree"], rc.params["ell"]
    states = star_bound_states(n, ell)
    lim = s_matrix_limits(n)
    payload = {
        "problem": {"graph": "star", "degree": n, "ell": ell, "coupling": "minusR"},
        "kappas": states.kappas,
        "energies": states.energies,
        "s_matrix_limits": {
            "limit_inf": lim.limit_inf,
            "limit_zero": lim.limit_zero,
            "zero_is_minus_identity": lim.zero_is_minus_identity,
        },
    }
    _emit(rc, payload)
    if rc.csv_path:
        rows = [[i, "negative", "bound", kap, kap, -kap * kap, -kap * kap]
                for i, kap in enumerate(states.kappas)]
        write_csv(rc.csv_path, rows)
    return EXIT_OK


def cmd_smatrix(rc: RunConfig) -> int:
    p = rc.params
    c = build_coupling(p["coupling"], p["degree"], p["ell"])
    s = s_matrix(c, p["k"])
    payload = {
        "problem": {"degree": p["degree"], "k": p["k"], "ell": p["ell"], "coupling": p["coupling"]},
        "entries": _complex_matrix(s.entries),
        "unitarity_defect": s.unitarity_defect(),
    }
    _emit(rc, payload)
    return EXIT_OK


def _finish_report(rc: RunConfig, report: SpectrumReport, plot) -> int:
    _emit(rc, report_to_dict(report))
    if rc.csv_path:
        write_csv(rc.csv_path, band_rows(report))
    if rc.svg_path:
        plot(rc.svg_path)
    return EXIT_OK


def cmd_hex(rc: RunConfig) -> int:
    p = rc.params
    prob = RegularHexProblem(p["length"], p["coupling"])
    report = compute_hex_spectrum(prob, p["k_max"], p["kappa_max"], rc.scan)

    def plot(path):
        from .plotting import plot_hex
        plot_hex(report, prob, path)

    return _finish_report(rc, report, plot)


def cmd_genhex(rc: RunConfig) -> int:
    p = rc.params
    prob = GeneralHexProblem(p["lengths"])
    comm = CommensurabilityConfig(max_den=p["max_den"], tol=p["comm_tol"])
    report = compute_genhex_spectrum(prob, p["k_max"], p["kappa_max"], rc.scan, comm)

    def plot(path):
        from .plotting import plot_genhex
        plot_genhex(report, prob, path)

    return _finish_report(rc, report, plot)


COMMANDS = {"star": cmd_star, "smatrix": cmd_smatrix, "hex": cmd_hex, "genhex": cmd_genhex}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qgspec", description="Spectra of quantum graphs with the -R coupling.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def outputs(sp, tables=True):
        sp.add_argument("--json", metavar="PATH", help="write the JSON report here (default: stdout)")
        if tables:
            sp.add_argument("--csv", metavar="PATH", help="write the band table here")

    def scan(sp):
        sp.add_argument("--kmax", type=float, default=20.0, help="upper momentum of the positive scan")
        sp.add_argument("--kappamax", type=float, default=5.0, help="upper kappa of the negative scan")
        sp.add_argument("--grid-step", type=float, default=None, help="scan step (default pi/(400 max length), capped at 0.01)")
        sp.add_argument("--edge-tol", type=float, default=1e-10, help="band edge tolerance")
        sp.add_argument("--workers", type=int, default=1, help="threads for the grid sweep")
        sp.add_argument("--svg", metavar="PATH", help="write a band diagram here")

    sp = sub.add_parser("star", help="bound states of the star graph")
    sp.add_argument("--degree", type=int, required=True)
    sp.add_argument("--ell", type=float, default=1.0)
    outputs(sp)

    sp = sub.add_parser("smatrix", help="on-shell S-matrix of a single vertex")
    sp.add_argument("--degree", type=int, required=True)
    sp.add_argument("--k", type=float, required=True)
    sp.add_argument("--ell", type=float, default=1.0)
    sp.add_argument("--coupling", choices=sorted(COUPLINGS), default="minus-r")
    outputs(sp, tables=False)

    sp = sub.add_parser("hex", help="regular hexagonal lattice")
    sp.add_argument("--length", type=float, required=True)
    sp.add_argument("--coupling", choices=sorted(COUPLINGS), default="minus-r")
    scan(sp)
    outputs(sp)

    sp = sub.add_parser("genhex", help="dilated hexagonal lattice with lengths a,b,c")
    sp.add_argument("--lengths", required=True, help="a,b,c")
    sp.add_argument("--max-den", type=int, default=10**6, help="largest denominator in the commensurability test")
    sp.add_argument("--comm-tol", type=float, default=1e-9, help="commensurability tolerance")
    scan(sp)
    outputs(sp)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        rc = build_run_config(args)
        return COMMANDS[rc.subcommand](rc)
    except (InvalidArgumentError, UnsupportedVariantError) as exc:
        print(f"qgspec: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericSingularityError, NumericFailureError) as exc:
        print(f"qgspec: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"qgspec: cannot write output: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
