"""netforge command line: certify / configure / assemble / plot.

Every run writes a manifest JSON next to its main output. Outputs carry
no timestamps, so a rerun with the same inputs is byte-identical (the
manifest itself records wall time and is the one exception).
"""

import argparse
import json
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .assembly import (generate_cloud, load_assembly, load_cloud,
                       neighbor_graph, save_cloud, solve_master,
                       verify_assembly)
from .builders import assembly_catalog, assembly_names
from .catalog import catalog, catalog_names
from .fields import (FieldWindow, predicted_force, project_force,
                     residual_norms)
from .interaction import load_or_build
from .linearize import certify
from .network import NetworkError, load_network
from .solvers import SolverError
from .svgplot import heatmap_svg, scatter_svg

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_BORDERLINE = 2
EXIT_CONDITIONS = 3
EXIT_USAGE = 64


class CliParser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


@dataclass
class RunManifest:
    command: str
    inputs: list
    parameters: dict
    outputs: list
    version: str = __version__
    wall_time: float = 0.0

    def write(self, path):
        obj = {"command": self.command, "inputs": self.inputs,
               "parameters": self.parameters, "outputs": self.outputs,
               "version": self.version, "wall_time": self.wall_time}
        with open(path, "w") as fh:
            json.dump(obj, fh, indent=1, sort_keys=True)
            fh.write("\n")


def _manifest_path(out):
    return (out or "netforge-run") + ".manifest.json"


_PARAM_FLAGS = ("k", "n", "theta", "nu", "mu", "a", "b",
                "perturbation", "seed")


def _add_catalog_flags(sp):
    sp.add_argument("--catalog", help="catalog name")
    sp.add_argument("--k", type=int)
    sp.add_argument("--n", type=int)
    sp.add_argument("--theta", type=float)
    sp.add_argument("--nu", type=float)
    sp.add_argument("--mu", type=float)
    sp.add_argument("--a", type=float)
    sp.add_argument("--b", type=float)
    sp.add_argument("--perturbation", type=float)
    sp.add_argument("--seed", type=int)


def _catalog_params(args):
    return {f: getattr(args, f) for f in _PARAM_FLAGS
            if getattr(args, f, None) is not None}


def build_parser():
    p = CliParser(prog="netforge",
                  description="weighted-network certification and "
                              "bump-configuration pipeline")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("certify", help="rank-certify a network")
    c.add_argument("--network", help="network JSON file")
    _add_catalog_flags(c)
    c.add_argument("--tol-rank", type=float, default=1e-9)
    c.add_argument("--out", help="certificate JSON path (default stdout)")

    g = sub.add_parser("configure", help="assembly -> point cloud CSV")
    g.add_argument("--assembly", help="assembly JSON file")
    _add_catalog_flags(g)
    g.add_argument("--ell", type=float, default=10.0)
    g.add_argument("--kappa", type=float, default=64.0)
    g.add_argument("--delta", type=float, default=0.05,
                   help="far-band margin: far means d >= (1+delta) ell")
    g.add_argument("--tol-newton", type=float, default=1e-11)
    g.add_argument("--out", default="cloud.csv")

    a = sub.add_parser("assemble", help="cloud CSV -> field diagnostics")
    a.add_argument("cloud", help="point cloud CSV")
    a.add_argument("--ell", type=float, required=True)
    a.add_argument("--delta", type=float, default=-0.5,
                   help="weighted-norm exponent")
    a.add_argument("--windows", default="anchors",
                   help="anchors | all | comma-separated point indices")
    a.add_argument("--plot", help="optional residual heatmap SVG path")
    a.add_argument("--out", default="diagnostics.json")

    r = sub.add_parser("plot", help="cloud CSV -> scatter SVG, "
                                    "field CSV -> heatmap SVG")
    r.add_argument("input", help="cloud or field CSV")
    r.add_argument("--out", default="plot.svg")
    return p


# --- certify ----------------------------------------------------------------

def cmd_certify(args):
    start = time.perf_counter()
    inputs = []
    try:
        if args.network:
            net = load_network(args.network)
            inputs.append(args.network)
        elif args.catalog:
            net = catalog(args.catalog, **_catalog_params(args))
        else:
            print("certify needs --network or --catalog "
                  f"(catalog names: {', '.join(catalog_names())})",
                  file=sys.stderr)
            return EXIT_USAGE
    except (OSError, NetworkError, TypeError, ValueError) as exc:
        print(f"certify: {exc}", file=sys.stderr)
        return EXIT_USAGE
    cert = certify(net, tol=args.tol_rank)
    text = cert.to_json() + "\n"
    outputs = []
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
        outputs.append(args.out)
    else:
        sys.stdout.write(text)
    man = RunManifest("certify", inputs,
                      {"catalog": args.catalog, **_catalog_params(args),
                       "tol_rank": args.tol_rank},
                      outputs)
    man.wall_time = time.perf_counter() - start
    man.write(_manifest_path(args.out))
    if not (cert.connected and cert.embedded):
        return EXIT_FAILED
    if cert.borderline:
        return EXIT_BORDERLINE
    return EXIT_OK


# --- configure ---------------------------------------------------------------

def cmd_configure(args):
    start = time.perf_counter()
    inputs = []
    try:
        if args.assembly:
            asm = load_assembly(args.assembly)
            inputs.append(args.assembly)
        elif args.catalog:
            asm = assembly_catalog(args.catalog, **_catalog_params(args))
        else:
            print("configure needs --assembly or --catalog "
                  f"(assembly names: {', '.join(assembly_names())})",
                  file=sys.stderr)
            return EXIT_USAGE
    except (OSError, NetworkError, TypeError, ValueError) as exc:
        print(f"configure: {exc}", file=sys.stderr)
        return EXIT_USAGE

    report = verify_assembly(asm)
    if not report.ok:
        for name in report.failing():
            print(f"condition {name} fails: {report.details[name]}",
                  file=sys.stderr)
        return EXIT_CONDITIONS

    table = load_or_build()
    try:
        result = solve_master(asm, args.kappa, args.ell, table,
                              tol=args.tol_newton, skip_verify=True)
    except SolverError as exc:
        print(f"configure: {exc}", file=sys.stderr)
        return EXIT_FAILED
    if not result.info.converged:
        print(f"configure: solver stalled at residual "
              f"{result.info.residual:.3e}", file=sys.stderr)
        return EXIT_FAILED

    config = generate_cloud(result, table)
    save_cloud(config, args.out)
    nb = neighbor_graph(config, delta=args.delta)
    report_path = args.out + ".report.json"
    with open(report_path, "w") as fh:
        json.dump({
            "points": len(config.points),
            "ell": args.ell, "kappa": args.kappa,
            "chain_counts": {f"{p}--{q}": m
                             for (p, q), m in sorted(config.m_map.items())},
            "condition_residuals": {k: float(v)
                                    for k, v in sorted(
                                        result.residuals.items())},
            "band_violations": [[i, j, d] for i, j, d in nb.violations],
            "degree_mismatches": [[i, e, g]
                                  for i, e, g in nb.degree_mismatches],
        }, fh, indent=1, sort_keys=True)
        fh.write("\n")
    man = RunManifest("configure", inputs,
                      {"catalog": args.catalog, **_catalog_params(args),
                       "ell": args.ell, "kappa": args.kappa,
                       "delta": args.delta, "tol_newton": args.tol_newton},
                      [args.out, report_path])
    man.wall_time = time.perf_counter() - start
    man.write(_manifest_path(args.out))
    if nb.violations or nb.degree_mismatches:
        if nb.violations:
            i, j, d = nb.violations[0]
            print(f"band violation: points {i}, {j} at distance {d:.6g}",
                  file=sys.stderr)
        else:
            i, e, g = nb.degree_mismatches[0]
            print(f"degree mismatch: point {i} expected {e} got {g}",
                  file=sys.stderr)
        return EXIT_CONDITIONS
    print(f"wrote {args.out} ({len(config.points)} points)")
    return EXIT_OK


# --- assemble ----------------------------------------------------------------

def _midchain_indices(config):
    """Indices of mid-chain points (j = m on each master edge), parsed
    from the provenance column."""
    by_edge = {}
    for i, pt in enumerate(config.points):
        if not pt.provenance.startswith("chain:"):
            continue
        _, p, q, j = pt.provenance.split(":")
        by_edge.setdefault((p, q), []).append((int(j), i))
    out = []
    for (p, q), js in sorted(by_edge.items()):
        m = (max(j for j, _ in js) + 1) // 2
        for j, i in js:
            if j == m:
                out.append(i)
    return out


def _select_windows(config, spec):
    if spec == "all":
        return list(range(len(config.points)))
    if spec == "anchors":
        return [i for i, pt in enumerate(config.points)
                if pt.provenance.startswith("anchor:")]
    try:
        return [int(s) for s in spec.split(",") if s.strip()]
    except ValueError:
        raise NetworkError(f"bad --windows value {spec!r}")


def _point_row(config, idx, table, delta):
    pt = config.points[idx]
    ell = config.ell
    window = FieldWindow(pt.z, ell / 4.0 + 2.0)
    proj = project_force(config, pt.z, table, window)
    sup, weighted = residual_norms(config, window, table, delta)
    pred = predicted_force(config, idx, table)
    return window, {
        "index": idx, "provenance": pt.provenance,
        "sup_norm": sup, "weighted_norm": weighted,
        "projection": [proj.real, proj.imag],
        "predicted": [pred.real, pred.imag],
        "projection_error": abs(proj - pred),
    }


def cmd_assemble(args):
    start = time.perf_counter()
    try:
        config = load_cloud(args.cloud, args.ell)
        sel = _select_windows(config, args.windows)
    except (OSError, NetworkError, ValueError) as exc:
        print(f"assemble: {exc}", file=sys.stderr)
        return EXIT_USAGE
    table = load_or_build()
    ups = float(table.upsilon(args.ell)) if args.ell >= 2.0 else float("nan")
    rows = []
    first_window = None
    for idx in sel:
        window, row = _point_row(config, idx, table, args.delta)
        row["gated"] = False
        rows.append(row)
        if first_window is None:
            first_window = window
    threshold = 0.05 * ups
    worst = 0.0
    seen = {r["index"]: r for r in rows}
    for idx in _midchain_indices(config):
        if idx in seen:
            row = seen[idx]
        else:
            _, row = _point_row(config, idx, table, args.delta)
            rows.append(row)
        row["gated"] = True
        worst = max(worst, float(np.hypot(*row["projection"])))
    gate_pass = not (worst > threshold)  # vacuously true without chains
    sup_max = max((r["sup_norm"] for r in rows), default=0.0)
    decay = (-float(np.log(sup_max * np.sqrt(args.ell))) / args.ell
             if sup_max > 0 else float("inf"))
    obj = {
        "ell": args.ell,
        "upsilon_ell": ups,
        "norms": {"sup_max": sup_max,
                  "weighted_max": max((r["weighted_norm"] for r in rows),
                                      default=0.0),
                  "decay_rate_estimate": decay},
        "gate": {"threshold": threshold, "worst_projection": worst,
                 "pass": gate_pass},
        "points": sorted(rows, key=lambda r: r["index"]),
    }
    with open(args.out, "w") as fh:
        json.dump(obj, fh, indent=1, sort_keys=True, default=float)
        fh.write("\n")
    outputs = [args.out]
    if args.plot and first_window is not None:
        x, y = first_window.axes()
        heatmap_svg(x, y, first_window.E, args.plot)
        outputs.append(args.plot)
    man = RunManifest("assemble", [args.cloud],
                      {"ell": args.ell, "delta": args.delta,
                       "windows": args.windows},
                      outputs)
    man.wall_time = time.perf_counter() - start
    man.write(_manifest_path(args.out))
    print(f"wrote {args.out} ({len(rows)} windows, gate "
          f"{'pass' if gate_pass else 'FAIL'})")
    return EXIT_OK if gate_pass else EXIT_FAILED


# --- plot --------------------------------------------------------------------

def cmd_plot(args):
    start = time.perf_counter()
    try:
        with open(args.input) as fh:
            header = fh.readline().strip()
        if header == "x,y,sign,provenance":
            config = load_cloud(args.input, 1.0)
            scatter_svg(config.points, args.out)
        elif header == "x,y,value":
            from .fields import load_field
            x, y, vals = load_field(args.input)
            heatmap_svg(x, y, vals, args.out)
        else:
            raise NetworkError(f"unrecognized CSV header {header!r}")
    except (OSError, NetworkError, ValueError) as exc:
        print(f"plot: {exc}", file=sys.stderr)
        return EXIT_USAGE
    man = RunManifest("plot", [args.input], {}, [args.out])
    man.wall_time = time.perf_counter() - start
    man.write(_manifest_path(args.out))
    print(f"wrote {args.out}")
    return EXIT_OK


_COMMANDS = {"certify": cmd_certify, "configure": cmd_configure,
             "assemble": cmd_assemble, "plot": cmd_plot}


def main(argv=None):
    args = build_parser().parse_args(argv)
    return _COMMANDS[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
