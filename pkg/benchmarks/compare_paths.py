"""Compare the numba-compiled kernels against the pure-Python fallback.

Usage:
    python3 benchmarks/compare_paths.py [--repeats 3] [--heavy]

The two execution paths are selected at import time by the environment
variable LAMBDAQ_NO_NUMBA, so this script re-executes itself in one
child process per path and merges the results into a single table.
Each stage is run once for warm-up (JIT compilation happens there) and
then `--repeats` times; the table reports the median.

--heavy adds a cc-pVDZ integral build (about ten seconds per repeat on
the fallback path); the default stage set takes about a minute on the
fallback path and seconds on the compiled one.
"""
import argparse
import json
import os
import statistics
import subprocess
import sys
import time

BASE_STAGES = ("integrals h2o/sto-3g", "fci lih/sto-3g",
               "norm pipeline h2o/sto-3g")
HEAVY_STAGES = ("integrals h2o/cc-pvdz",)


def stage_callable(name):
    from lambdaq.chem import builtin_geometry, load_basis
    from lambdaq.correlation import run_ci
    from lambdaq.integrals import compute_integrals
    from lambdaq.norms import df_factorize, sparse_norm
    from lambdaq.scf import run_rhf, transform_to_mo

    def pipeline(geometry, basis):
        mol, bs = builtin_geometry(geometry), load_basis(basis)
        ints = compute_integrals(mol, bs)
        scf = run_rhf(ints, mol.n_electrons)
        return mol, bs, transform_to_mo(ints, scf)

    if name == "integrals h2o/sto-3g":
        mol, bs = builtin_geometry("h2o"), load_basis("sto-3g")
        return lambda: compute_integrals(mol, bs)
    if name == "integrals h2o/cc-pvdz":
        mol, bs = builtin_geometry("h2o"), load_basis("cc-pvdz")
        return lambda: compute_integrals(mol, bs)
    if name == "fci lih/sto-3g":
        _, _, ham = pipeline("lih", "sto-3g")
        return lambda: run_ci(ham, "fci")
    if name == "norm pipeline h2o/sto-3g":
        mol, bs = builtin_geometry("h2o"), load_basis("sto-3g")

        def run():
            ints = compute_integrals(mol, bs)
            scf = run_rhf(ints, mol.n_electrons)
            ham = transform_to_mo(ints, scf)
            sparse_norm(ham)
            df_factorize(ham)
        return run
    raise SystemExit(f"unknown stage {name!r}")


def run_worker(stages, repeats):
    from lambdaq import _accel
    results = {"numba_active": _accel.NUMBA_ENABLED, "timings": {}}
    for name in stages:
        fn = stage_callable(name)
        fn()    # warm-up; JIT cost excluded
        samples = []
        for _ in range(repeats):
            t0 = time.perf_counter()
            fn()
            samples.append(time.perf_counter() - t0)
        results["timings"][name] = statistics.median(samples)
    print(json.dumps(results))


def run_child(no_numba, stages, repeats):
    env = dict(os.environ)
    if no_numba:
        env["LAMBDAQ_NO_NUMBA"] = "1"
    else:
        env.pop("LAMBDAQ_NO_NUMBA", None)
    cmd = [sys.executable, os.path.abspath(__file__), "--worker",
           "--repeats", str(repeats), "--stages", json.dumps(list(stages))]
    proc = subprocess.run(cmd, env=env, capture_output=True, text=True)
    if proc.returncode != 0:
        sys.stderr.write(proc.stderr)
        raise SystemExit(f"worker failed with code {proc.returncode}")
    doc = json.loads(proc.stdout.strip().splitlines()[-1])
    if doc["numba_active"] == no_numba:
        raise SystemExit("worker ran on the wrong path; "
                         "check LAMBDAQ_NO_NUMBA handling")
    return doc["timings"]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--heavy", action="store_true",
                    help="add the cc-pVDZ integral stage")
    ap.add_argument("--worker", action="store_true", help=argparse.SUPPRESS)
    ap.add_argument("--stages", help=argparse.SUPPRESS)
    args = ap.parse_args()

    if args.worker:
        run_worker(json.loads(args.stages), args.repeats)
        return

    stages = BASE_STAGES + (HEAVY_STAGES if args.heavy else ())
    print(f"timing {len(stages)} stages, median of {args.repeats} "
          f"(one process per path; warm-up excluded)")
    jit = run_child(False, stages, args.repeats)
    pure = run_child(True, stages, args.repeats)

    width = max(len(s) for s in stages)
    print(f"\n{'stage':<{width}}  {'numba':>10}  {'pure numpy':>10}  "
          f"{'speedup':>8}")
    for name in stages:
        ratio = pure[name] / jit[name] if jit[name] > 0 else float("inf")
        print(f"{name:<{width}}  {jit[name]:>9.4f}s  {pure[name]:>9.4f}s  "
              f"{ratio:>7.1f}x")


if __name__ == "__main__":
    main()
