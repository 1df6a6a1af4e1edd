"""Command-line front end.

Subcommands cover the norm calculators, DF diagnostics, the FNO
pipeline, basis optimization, exponent scans, and the N2 dissociation
demo. Every run emits a versioned JSON report (plus CSV for tabular
payloads) that is byte-identical across repeated runs on the same
inputs.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__, basisopt, fno
from .chem import (BasisError, GeometryError, Molecule, BasisSet,
                   builtin_geometry, load_basis, load_geometry,
                   serialize_basis)
from .correlation import CISpaceError, CorrelationError, run_ci, run_mp2, \
    semicanonicalize
from .hamiltonian import HamiltonianError, read_fcidump
from .integrals import IntegralError, compute_integrals
from .norms import NormError, df_factorize, resource_estimate, sparse_norm
from .scf import SCFConvergenceError, run_rhf, transform_to_mo

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_SCF = 3
EXIT_CAP = 4
EXIT_IO = 5
EXIT_UNKNOWN = 9

SCHEMA_VERSION = 1
PAYLOAD_KINDS = ("norm_report", "df_report", "fno_report",
                 "optimization_trace", "scan_table", "n2_demo_table")

_DATA_DIR = os.path.join(os.path.dirname(__file__), "data")


class CLIError(RuntimeError):
    def __init__(self, message, exit_code):
        super().__init__(message)
        self.exit_code = exit_code


# --------------------------------------------------------------------------
# input resolution


def _resolve_geometry(spec: str, charge: int, multiplicity: int) -> Molecule:
    if os.path.sep in spec or spec.endswith(".xyz"):
        if not os.path.exists(spec):
            raise CLIError(f"geometry file not found: {spec}", EXIT_IO)
        return load_geometry(spec, charge, multiplicity)
    return builtin_geometry(spec, charge, multiplicity)


def _resolve_basis(spec: str) -> BasisSet:
    if os.path.sep in spec or spec.endswith(".json"):
        if not os.path.exists(spec):
            raise CLIError(f"basis file not found: {spec}", EXIT_IO)
        return load_basis(spec)
    path = os.path.join(_DATA_DIR, f"{spec.lower()}.json")
    if not os.path.exists(path):
        raise CLIError(f"no shipped basis named {spec!r}", EXIT_IO)
    return load_basis(path)


def _hamiltonian_from_args(args):
    """Build the MO Hamiltonian from the single configured integral
    source. Returns (ham, scf_or_None, provenance)."""
    have_geom = args.geometry is not None or args.basis is not None
    have_dump = getattr(args, "fcidump", None) is not None
    if have_geom == have_dump:
        raise CLIError(
            "exactly one integral source required: --geometry/--basis "
            "or --fcidump", EXIT_PARSE)
    if have_dump:
        if not os.path.exists(args.fcidump):
            raise CLIError(f"FCIDUMP not found: {args.fcidump}", EXIT_IO)
        ham = read_fcidump(args.fcidump)
        with open(args.fcidump, "rb") as fh:
            digest = hashlib.sha256(fh.read()).hexdigest()
        return ham, None, {"fcidump_hash": digest}
    if args.geometry is None or args.basis is None:
        raise CLIError("--geometry and --basis are both required", EXIT_PARSE)
    mol = _resolve_geometry(args.geometry, args.charge, args.multiplicity)
    basis = _resolve_basis(args.basis)
    ints = compute_integrals(mol, basis)
    scf = run_rhf(ints, mol.n_electrons)
    ham = transform_to_mo(ints, scf)
    prov = {"geometry_hash": mol.hash(), "basis_hash": basis.hash()}
    return ham, scf, prov


# --------------------------------------------------------------------------
# report emission


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        obj = float(obj)
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def _report_doc(command: str, payload_kind: str, payload, provenance: dict,
                status: str = "ok", error: str | None = None) -> dict:
    prov = {"code_version": __version__}
    prov.update(provenance or {})
    doc = {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "status": status,
        "provenance": prov,
        "payload_kind": payload_kind,
        "payload": _jsonable(payload),
    }
    if error is not None:
        doc["error"] = error
    return doc


def _write_report(outdir: str, doc: dict) -> str:
    path = os.path.join(outdir, f"{doc['command']}-report.json")
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    with open(path, "w") as fh:
        fh.write(text)
    return path


def _write_csv(outdir: str, name: str, header, rows) -> str:
    path = os.path.join(outdir, name)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow(["" if v is None else repr(v) if
                             isinstance(v, float) else v for v in row])
    return path


def _check_outdir(path: str) -> str:
    if not os.path.isdir(path):
        try:
            os.makedirs(path, exist_ok=True)
        except OSError as exc:
            raise CLIError(f"cannot create output directory: {exc}", EXIT_IO)
    if not os.access(path, os.W_OK):
        raise CLIError(f"output directory not writable: {path}", EXIT_IO)
    return path


def _parallel_runner(jobs: int):
    if jobs <= 1:
        return lambda fn, items: [fn(*it) for it in items]

    def runner(fn, items):
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, *zip(*items)))
    return runner


# --------------------------------------------------------------------------
# subcommands


def cmd_norm(args, outdir):
    ham, scf, prov = _hamiltonian_from_args(args)
    rep = sparse_norm(ham)
    df = df_factorize(ham, n_df=args.n_df)
    payload = {
        "n": ham.n,
        "n_electrons": ham.n_elec,
        "e_core": ham.e_core,
        "e_hf": scf.e_hf if scf is not None else None,
        "lambda_c": rep.lambda_c,
        "lambda_t": rep.lambda_t,
        "lambda_v": rep.lambda_v,
        "lambda_q": rep.lambda_q,
        "lambda_eff": rep.lambda_eff,
        "n_df": df.n_df,
        "lambda_df": df.lambda_df,
        "df_reconstruction_error": df.reconstruction_error,
    }
    return "norm_report", payload, prov, []


def cmd_df(args, outdir):
    ham, scf, prov = _hamiltonian_from_args(args)
    df = df_factorize(ham, n_df=args.n_df)
    leaf_sums = np.abs(df.w_t).sum(axis=1)
    est = resource_estimate(df.lambda_df, args.eps_qpe, ham.n, df.n_df)
    payload = {
        "n": ham.n,
        "n_df": df.n_df,
        "lambda_df": df.lambda_df,
        "lambda_one_body": float(np.abs(df.f0).sum()),
        "lambda_two_body": float(0.25 * np.sum(leaf_sums ** 2)),
        "reconstruction_error": df.reconstruction_error,
        "eps_qpe": est.eps_qpe,
        "walk_calls": est.walk_calls,
        "block_encoding_size": est.c_w,
    }
    rows = [(t, float(leaf_sums[t]), float(0.25 * leaf_sums[t] ** 2))
            for t in range(df.n_df)]
    csvs = [("df-leaves.csv", ("leaf", "sum_abs_w", "lambda_contribution"),
             rows)]
    return "df_report", payload, prov, csvs


def _fno_criterion_from_args(args):
    picked = [x is not None
              for x in (args.sigma, args.keep, args.reference_basis)]
    if sum(picked) != 1:
        raise CLIError(
            "exactly one of --sigma/--keep/--reference-basis required",
            EXIT_PARSE)
    if args.sigma is not None:
        return fno.FNOCriterion.occupation_threshold(args.sigma)
    if args.keep is not None:
        return fno.FNOCriterion.keep_count(args.keep)
    return None


def cmd_fno(args, outdir):
    if args.geometry is None or args.basis is None:
        raise CLIError("fno requires --geometry and --basis", EXIT_PARSE)
    mol = _resolve_geometry(args.geometry, args.charge, args.multiplicity)
    basis = _resolve_basis(args.basis)
    prov = {"geometry_hash": mol.hash(), "basis_hash": basis.hash()}
    crit = _fno_criterion_from_args(args)
    if crit is None:
        ref_basis = _resolve_basis(args.reference_basis)
        prov["reference_basis_hash"] = ref_basis.hash()
        rep = fno.fno_comparison_report(mol, basis, ref_basis,
                                        proxy=args.proxy,
                                        tolerance=args.tolerance_mha * 1e-3)
        payload = {
            "mode": "energy_match",
            "source_basis": rep.source_basis,
            "reference_basis": rep.reference_basis,
            "n_source": rep.n_source,
            "n_kept": rep.n_kept,
            "n_reference": rep.n_reference,
            "lambda_reference": rep.lambda_reference,
            "lambda_truncated": rep.lambda_truncated,
            "percent_norm_improvement": rep.percent_norm_improvement,
            "percent_orbital_reduction": rep.percent_orbital_reduction,
            "e_corr_reference": rep.e_corr_reference,
            "e_corr_truncated": rep.e_corr_truncated,
            "proxy": rep.proxy,
            "noon_last_kept": rep.noon_last_kept,
        }
        return "fno_report", payload, prov, []
    ints = compute_integrals(mol, basis)
    scf = run_rhf(ints, mol.n_electrons)
    ham_full = transform_to_mo(ints, scf)
    lam_before = df_factorize(ham_full).lambda_df
    ham_t, nos, _ = fno.build_fno_hamiltonian(mol, basis, crit)
    lam_after = df_factorize(ham_t).lambda_df
    ham_sc, eps = semicanonicalize(ham_t)
    e_corr = run_mp2(ham_sc, eps).e_corr
    kept_virt = ham_t.n - ham_t.n_occ
    payload = {
        "mode": crit.variant,
        "source_basis": basis.name,
        "sigma": crit.sigma,
        "keep": crit.keep,
        "n_full": ham_full.n,
        "n_kept": ham_t.n,
        "lambda_before": lam_before,
        "lambda_after": lam_after,
        "e_hf": scf.e_hf,
        "e_corr_mp2_truncated": e_corr,
        "noon_last_kept": float(nos.noon[kept_virt - 1])
        if kept_virt > 0 else 0.0,
    }
    return "fno_report", payload, prov, []


def cmd_optimize(args, outdir):
    if args.geometry is None or args.basis is None:
        raise CLIError("optimize requires --geometry and --basis", EXIT_PARSE)
    mol = _resolve_geometry(args.geometry, args.charge, args.multiplicity)
    base = _resolve_basis(args.basis)
    prov = {"geometry_hash": mol.hash(), "basis_hash": base.hash()}
    gamma = args.gamma
    lam_ref = None
    if args.normalize_gamma:
        ints = compute_integrals(mol, base)
        scf = run_rhf(ints, mol.n_electrons)
        lam_ref = df_factorize(transform_to_mo(ints, scf)).lambda_df
        gamma = gamma / lam_ref
    augmented, theta0 = basisopt.init_augmented(base, args.element,
                                                args.shell)
    cfg = basisopt.OptimizationConfig(
        mol, augmented, theta0, gamma=gamma,
        energy_method=args.energy_method, max_iter=args.max_iter)
    best_basis, trace = basisopt.optimize_basis(cfg)
    bi = trace.best_index
    basis_path = os.path.join(outdir, "optimize-basis.json")
    with open(basis_path, "w") as fh:
        fh.write(serialize_basis(best_basis))
    payload = {
        "element": args.element,
        "shell": args.shell,
        "gamma_effective": gamma,
        "lambda_reference": lam_ref,
        "energy_method": args.energy_method,
        "iterations": len(trace) - 1,
        "termination": trace.termination,
        "best_index": bi,
        "best_cost": trace.costs[bi],
        "best_energy": trace.energies[bi],
        "best_lambda": trace.lambdas[bi],
        "initial_energy": trace.energies[0],
        "initial_lambda": trace.lambdas[0],
        "optimized_basis_file": os.path.basename(basis_path),
        "trace": [{"theta": t, "energy": e, "lambda": l, "cost": g}
                  for t, e, l, g in zip(trace.thetas, trace.energies,
                                        trace.lambdas, trace.costs)],
    }
    rows = [(i, trace.energies[i], trace.lambdas[i], trace.costs[i])
            for i in range(len(trace))]
    csvs = [("optimize-trace.csv", ("iteration", "energy", "lambda", "cost"),
             rows)]
    return "optimization_trace", payload, prov, csvs


def _scan_point(mol, base, kind, alpha):
    return basisopt.scan_augmented_primitive(mol, base, kind, [alpha])[0]


def cmd_scan(args, outdir):
    if args.geometry is None or args.basis is None:
        raise CLIError("scan requires --geometry and --basis", EXIT_PARSE)
    mol = _resolve_geometry(args.geometry, args.charge, args.multiplicity)
    base = _resolve_basis(args.basis)
    prov = {"geometry_hash": mol.hash(), "basis_hash": base.hash()}
    try:
        grid = [float(tok) for tok in args.grid.split(",") if tok]
    except ValueError:
        raise CLIError(f"bad --grid value {args.grid!r}", EXIT_PARSE)
    if not grid:
        raise CLIError("empty --grid", EXIT_PARSE)
    runner = _parallel_runner(args.jobs)
    rows = runner(_scan_point, [(mol, base, args.kind, a) for a in grid])
    payload = {"kind": args.kind, "rows": rows}
    cols = ("alpha", "status", "n", "lambda_sparse", "lambda_df",
            "e_hf", "e_fci", "note")
    csv_rows = [tuple(row.get(c) for c in cols) for row in rows]
    return "scan_table", payload, prov, [("scan.csv", cols, csv_rows)]


def cmd_n2_demo(args, outdir):
    basis_dz = _resolve_basis(args.basis_dz)
    basis_tz = _resolve_basis(args.basis_tz)
    prov = {"basis_dz_hash": basis_dz.hash(), "basis_tz_hash": basis_tz.hash()}
    runner = _parallel_runner(args.jobs)
    rows = fno.n2_dissociation_demo(basis_dz, basis_tz,
                                    sigma_dz=args.sigma_dz,
                                    sigma_tz=args.sigma_tz,
                                    point_runner=runner)
    payload = {"grid_angstrom": list(fno.N2_GRID_ANGSTROM), "rows": rows}
    cols = ("bond_angstrom", "case", "sigma", "n_kept", "n_full",
            "lambda_df", "e_hf", "e_corr_mp2")
    csv_rows = [tuple(row.get(c) for c in cols) for row in rows]
    return "n2_demo_table", payload, prov, [("n2-demo.csv", cols, csv_rows)]


def validate_report(doc) -> list:
    """Schema validation; returns a list of problems (empty = valid)."""
    problems = []
    if not isinstance(doc, dict):
        return ["report is not a JSON object"]
    if doc.get("schema_version") != SCHEMA_VERSION:
        problems.append(f"schema_version must be {SCHEMA_VERSION}")
    for key in ("command", "status", "provenance", "payload_kind",
                "payload"):
        if key not in doc:
            problems.append(f"missing key {key!r}")
    if problems:
        return problems
    if doc["payload_kind"] not in PAYLOAD_KINDS:
        problems.append(f"unknown payload_kind {doc['payload_kind']!r}")
    if doc["status"] not in ("ok", "failed"):
        problems.append(f"unknown status {doc['status']!r}")
    if doc["status"] == "failed" and "error" not in doc:
        problems.append("failed report lacks an error message")
    prov = doc["provenance"]
    if not isinstance(prov, dict) or "code_version" not in prov:
        problems.append("provenance must carry code_version")

    def walk(node, path):
        if isinstance(node, dict):
            for k, v in node.items():
                walk(v, f"{path}.{k}")
        elif isinstance(node, list):
            for i, v in enumerate(node):
                walk(v, f"{path}[{i}]")
        elif isinstance(node, float) and not math.isfinite(node):
            problems.append(f"non-finite number at {path}")
    walk(doc["payload"], "payload")
    return problems


def cmd_schema_check(args, outdir):
    if not os.path.exists(args.report):
        raise CLIError(f"report file not found: {args.report}", EXIT_IO)
    try:
        with open(args.report) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise CLIError(f"report is not valid JSON: {exc}", EXIT_PARSE)
    problems = validate_report(doc)
    if problems:
        for p in problems:
            print(f"schema: {p}", file=sys.stderr)
        raise CLIError(f"{len(problems)} schema problem(s)", EXIT_PARSE)
    print(f"{args.report}: valid ({doc['payload_kind']})")
    return None


# --------------------------------------------------------------------------
# argument plumbing


def _add_common_args(p):
    # also accepted before the subcommand; SUPPRESS keeps the global
    # default when the flag is absent here
    p.add_argument("--config", default=argparse.SUPPRESS,
                   help="JSON file of flag defaults (flags win)")
    p.add_argument("--output-dir", default=argparse.SUPPRESS,
                   help="directory for report files")


def _add_source_args(p, fcidump=True):
    p.add_argument("--geometry", help="shipped geometry name or .xyz path")
    p.add_argument("--basis", help="shipped basis name or .json path")
    p.add_argument("--charge", type=int, default=0)
    p.add_argument("--multiplicity", type=int, default=1)
    if fcidump:
        p.add_argument("--fcidump", help="FCIDUMP path (alternative source)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lambdaq",
        description="LCU 1-norm estimation and reduction for molecular "
                    "Hamiltonians")
    parser.add_argument("--config",
                        help="JSON file of flag defaults (flags win)")
    parser.add_argument("--output-dir", default=".",
                        help="directory for report files")
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("norm", help="sparse and DF 1-norms")
    _add_common_args(p)
    _add_source_args(p)
    p.add_argument("--n-df", type=int, default=None,
                   help="DF rank (default 5N)")
    p.set_defaults(handler=cmd_norm)

    p = sub.add_parser("df", help="double-factorization diagnostics")
    _add_common_args(p)
    _add_source_args(p)
    p.add_argument("--n-df", type=int, default=None)
    p.add_argument("--eps-qpe", type=float, default=1.6e-3,
                   help="target phase-estimation accuracy (Ha)")
    p.set_defaults(handler=cmd_df)

    p = sub.add_parser("fno", help="frozen-natural-orbital pipeline")
    _add_common_args(p)
    _add_source_args(p, fcidump=False)
    p.add_argument("--sigma", type=float, default=None,
                   help="NOON threshold criterion")
    p.add_argument("--keep", type=int, default=None,
                   help="kept virtual count criterion")
    p.add_argument("--reference-basis", default=None,
                   help="energy-match against this basis")
    p.add_argument("--proxy", choices=("cisd", "mp2"), default="cisd")
    p.add_argument("--tolerance-mha", type=float, default=1.0)
    p.set_defaults(handler=cmd_fno)

    p = sub.add_parser("optimize", help="basis-parameter optimization")
    _add_common_args(p)
    _add_source_args(p, fcidump=False)
    p.add_argument("--element", required=True)
    p.add_argument("--shell", choices=("s", "p", "d", "f"), required=True)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--normalize-gamma", action="store_true",
                   help="divide gamma by the unaugmented DF norm")
    p.add_argument("--energy-method", choices=("cisd", "mp2"),
                   default="cisd")
    p.add_argument("--max-iter", type=int, default=100)
    p.set_defaults(handler=cmd_optimize)

    p = sub.add_parser("scan", help="augmented-primitive exponent scan")
    _add_common_args(p)
    _add_source_args(p, fcidump=False)
    p.add_argument("--kind", choices=("s", "p"), required=True)
    p.add_argument("--grid", required=True,
                   help="comma-separated exponent list")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(handler=cmd_scan)

    p = sub.add_parser("n2-demo", help="N2 dissociation FNO data")
    _add_common_args(p)
    p.add_argument("--basis-dz", default="cc-pvdz")
    p.add_argument("--basis-tz", default="cc-pvtz")
    p.add_argument("--sigma-dz", type=float, default=1e-4)
    p.add_argument("--sigma-tz", type=float, default=1e-3)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(handler=cmd_n2_demo)

    p = sub.add_parser("schema-check", help="validate a report file")
    _add_common_args(p)
    p.add_argument("--report", required=True)
    p.set_defaults(handler=cmd_schema_check)
    return parser


def _apply_config(parser, argv):
    """Config-file values become parser defaults, so explicit flags win."""
    if "--config" not in argv:
        return
    idx = argv.index("--config")
    if idx + 1 >= len(argv):
        raise CLIError("--config needs a path", EXIT_PARSE)
    path = argv[idx + 1]
    if not os.path.exists(path):
        raise CLIError(f"config file not found: {path}", EXIT_IO)
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except json.JSONDecodeError as exc:
        raise CLIError(f"config is not valid JSON: {exc}", EXIT_PARSE)
    if not isinstance(cfg, dict):
        raise CLIError("config must be a JSON object", EXIT_PARSE)
    cfg = {k.replace("-", "_"): v for k, v in cfg.items()}
    known = set()
    parsers = [parser]
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            parsers.extend(action.choices.values())
    for p in parsers:
        dests = {a.dest for a in p._actions}
        use = {k: v for k, v in cfg.items() if k in dests}
        known.update(use)
        if use:
            p.set_defaults(**use)
    unknown = set(cfg) - known
    if unknown:
        raise CLIError(
            f"config keys do not mirror any flag: {sorted(unknown)}",
            EXIT_PARSE)


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config(parser, argv)
    except CLIError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code not in (0, None) else EXIT_OK
    if getattr(args, "handler", None) is None:
        parser.print_help()
        return EXIT_PARSE

    try:
        outdir = _check_outdir(args.output_dir)
        result = args.handler(args, outdir)
        if result is None:
            return EXIT_OK
        kind, payload, prov, csvs = result
        doc = _report_doc(args.command, kind, payload, prov)
        path = _write_report(outdir, doc)
        for name, header, rows in csvs:
            _write_csv(outdir, name, header, rows)
        print(f"wrote {path}")
        return EXIT_OK
    except CLIError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (GeometryError, BasisError, HamiltonianError, NormError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except SCFConvergenceError as exc:
        _flush_failure(args, str(exc))
        print(f"error: SCF failed: {exc}", file=sys.stderr)
        return EXIT_SCF
    except (CISpaceError, basisopt.BasisOptError) as exc:
        _flush_failure(args, str(exc))
        print(f"error: cap exceeded: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (IntegralError, CorrelationError, fno.FNOError) as exc:
        _flush_failure(args, str(exc))
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNKNOWN
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except Exception as exc:    # reserved catch-all, keeps exit table total
        print(f"error: unexpected failure: {exc}", file=sys.stderr)
        return EXIT_UNKNOWN


_COMMAND_KINDS = {
    "norm": "norm_report",
    "df": "df_report",
    "fno": "fno_report",
    "optimize": "optimization_trace",
    "scan": "scan_table",
    "n2-demo": "n2_demo_table",
}


def _flush_failure(args, message: str):
    """Partial results are flushed with a failure marker when the
    pipeline dies after parsing."""
    try:
        outdir = _check_outdir(args.output_dir)
        kind = _COMMAND_KINDS.get(args.command, PAYLOAD_KINDS[0])
        doc = _report_doc(args.command, kind, None, {},
                          status="failed", error=message)
        _write_report(outdir, doc)
    except Exception:
        pass


if __name__ == "__main__":
    sys.exit(main())
