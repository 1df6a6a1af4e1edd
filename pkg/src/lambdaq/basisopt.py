"""Joint energy/1-norm basis-parameter optimization.

Augments a polarization shell with donor primitives, then minimizes
g(theta) = (1-gamma)*E(theta) + gamma*lambda(theta) over the shell's
log-exponents and contraction coefficients with a derivative-free
simplex, keeping every trial exponent strictly positive by
construction.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .chem import (BasisSet, BasisShell, Molecule, ParameterSlot,
                   ParameterVector, apply_parameters, load_ano_donors)
from .correlation import CISpaceError, run_ci, run_mp2, semicanonicalize
from .hamiltonian import MOHamiltonian
from .integrals import compute_integrals
from .norms import df_factorize, sparse_norm
from .scf import SCFConvergenceError, run_rhf, transform_to_mo

log = logging.getLogger(__name__)

L_LABELS = {"s": 0, "p": 1, "d": 2, "f": 3}


class BasisOptError(RuntimeError):
    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


@dataclass(frozen=True)
class OptimizationConfig:
    """Cost-function setup.

    gamma is the effective weight after normalization; callers quoting a
    weight in inverse-norm units (w / lambda_ref) are expected to divide
    by the molecule-specific reference 1-norm of the unaugmented basis
    before constructing the config.
    """

    molecule: Molecule
    base: BasisSet
    theta0: ParameterVector
    gamma: float
    energy_method: str = "cisd"
    max_iter: int = 100
    n_df_factor: int = 5

    def __post_init__(self):
        if not (0.0 <= self.gamma <= 1.0):
            raise BasisOptError(f"gamma {self.gamma} outside [0, 1]")
        if self.max_iter < 1:
            raise BasisOptError("iteration cap must be >= 1")
        if self.energy_method not in ("cisd", "mp2"):
            raise BasisOptError(
                f"unknown energy method {self.energy_method!r}")


@dataclass
class OptimizationTrace:
    thetas: list = field(default_factory=list)
    energies: list = field(default_factory=list)
    lambdas: list = field(default_factory=list)
    costs: list = field(default_factory=list)
    termination: str = ""

    def record(self, theta: np.ndarray, e: float, lam: float, g: float):
        self.thetas.append(np.array(theta, dtype=np.float64))
        self.energies.append(float(e))
        self.lambdas.append(float(lam))
        self.costs.append(float(g))

    @property
    def best_index(self) -> int:
        return int(np.argmin(self.costs))

    def __len__(self) -> int:
        return len(self.costs)


def _total_energy(ham: MOHamiltonian, method: str) -> float:
    if method == "cisd":
        return run_ci(ham, "cisd").e_total
    ham2, eps = semicanonicalize(ham)
    return ham2.mean_field_energy() + run_mp2(ham2, eps).e_corr


def evaluate_cost(theta: ParameterVector, config: OptimizationConfig):
    """g = (1-gamma)*E + gamma*lambda_DF at one parameter point.

    A trial point whose SCF fails is reported as (+inf, nan, nan) so the
    optimizer rejects the step instead of aborting the run.
    """
    basis = apply_parameters(config.base, theta)
    try:
        ints = compute_integrals(config.molecule, basis)
        scf = run_rhf(ints, config.molecule.n_electrons)
        ham = transform_to_mo(ints, scf)
        e = _total_energy(ham, config.energy_method)
        n_df = min(config.n_df_factor * ham.n, ham.n * ham.n)
        lam = df_factorize(ham, n_df=n_df).lambda_df
    except (SCFConvergenceError, np.linalg.LinAlgError) as exc:
        log.warning("trial point rejected: %s", exc)
        return math.inf, math.nan, math.nan
    g = (1.0 - config.gamma) * e + config.gamma * lam
    return g, e, lam


def init_augmented(base: BasisSet, element: str, l_label: str,
                   donor_exponents=None, shell_index: int | None = None):
    """Replace a single-primitive polarization shell by a donor-derived
    contracted shell that initially spans the identical function.

    The donor exponent closest to the base exponent is replaced by the
    base exponent, and the contraction starts as the indicator vector on
    that primitive, so the initial basis reproduces the unaugmented
    energies to tight tolerance. Returns (BasisSet, ParameterVector).
    """
    if l_label not in L_LABELS:
        raise BasisOptError(f"unknown shell label {l_label!r}")
    l = L_LABELS[l_label]
    if donor_exponents is None:
        donors = load_ano_donors()
        try:
            donor_exponents = donors[element][l_label]
        except KeyError:
            raise BasisOptError(
                f"no donor exponents shipped for {element} {l_label}-shell")
    donor = np.sort(np.asarray(donor_exponents, dtype=np.float64))[::-1]
    if donor.size < 2:
        raise BasisOptError("donor shell must carry at least two primitives")

    shells = base.shells_for(element)
    matches = [i for i, sh in enumerate(shells) if sh.l == l]
    if not matches:
        raise BasisOptError(
            f"{element} has no {l_label}-shell in basis {base.name!r}")
    ish = matches[-1] if shell_index is None else shell_index
    target = shells[ish]
    if target.l != l:
        raise BasisOptError(
            f"shell {ish} of {element} has l={target.l}, expected {l}")
    if target.n_primitives != 1 or target.n_contracted != 1:
        raise BasisOptError(
            "augmentation target must be a single uncontracted primitive")
    alpha0 = float(target.exponents[0])

    exps = donor.copy()
    nearest = int(np.argmin(np.abs(exps - alpha0)))
    exps[nearest] = alpha0
    order = np.argsort(-exps, kind="stable")
    exps = exps[order]
    pos = int(np.nonzero(exps == alpha0)[0][0])
    coefs = np.zeros((exps.size, 1))
    coefs[pos, 0] = 1.0

    new_shells = list(shells)
    new_shells[ish] = BasisShell(l, exps, coefs)
    augmented = base.with_shells(element, new_shells)
    augmented = BasisSet(augmented.elements, f"{base.name}+{element}{l_label}",
                         augmented.harmonics)

    slots = [ParameterSlot(element, ish, "exponent", k)
             for k in range(exps.size)]
    slots += [ParameterSlot(element, ish, "coefficient", k, 0)
              for k in range(exps.size)]
    vals = np.concatenate([np.log(exps), coefs[:, 0]])
    return augmented, ParameterVector(vals, tuple(slots))


def optimize_basis(config: OptimizationConfig):
    """Nelder-Mead descent over the masked parameters.

    Returns (best BasisSet, OptimizationTrace); the returned basis is the
    minimum-cost iterate recorded in the trace.
    """
    n = len(config.theta0)
    trace = OptimizationTrace()
    x0 = config.theta0.values.copy()

    def cost(x):
        g, e, lam = evaluate_cost(config.theta0.with_values(x), config)
        return g, e, lam

    step = np.where([s.kind == "exponent" for s in config.theta0.slots],
                    0.25, 0.10)
    simplex = [x0]
    for i in range(n):
        xi = x0.copy()
        xi[i] += step[i]
        simplex.append(xi)
    evals = [cost(x) for x in simplex]
    if not any(math.isfinite(ev[0]) for ev in evals):
        trace.termination = "all initial trial points rejected"
        raise BasisOptError("every starting simplex vertex failed", trace)

    order = sorted(range(n + 1), key=lambda i: evals[i][0])
    simplex = [simplex[i] for i in order]
    evals = [evals[i] for i in order]
    trace.record(simplex[0], evals[0][1], evals[0][2], evals[0][0])

    alpha, gamma_e, rho, sigma = 1.0, 2.0, 0.5, 0.5
    termination = "iteration cap"
    for _ in range(config.max_iter):
        centroid = np.mean(simplex[:-1], axis=0)
        xr = centroid + alpha * (centroid - simplex[-1])
        fr = cost(xr)
        if fr[0] < evals[0][0]:
            xe = centroid + gamma_e * (xr - centroid)
            fe = cost(xe)
            if fe[0] < fr[0]:
                simplex[-1], evals[-1] = xe, fe
            else:
                simplex[-1], evals[-1] = xr, fr
        elif fr[0] < evals[-2][0]:
            simplex[-1], evals[-1] = xr, fr
        else:
            xc = centroid + rho * (simplex[-1] - centroid)
            fc = cost(xc)
            if fc[0] < evals[-1][0]:
                simplex[-1], evals[-1] = xc, fc
            else:
                for i in range(1, n + 1):
                    simplex[i] = simplex[0] + sigma * (simplex[i] - simplex[0])
                    evals[i] = cost(simplex[i])
        order = sorted(range(n + 1), key=lambda i: evals[i][0])
        simplex = [simplex[i] for i in order]
        evals = [evals[i] for i in order]
        trace.record(simplex[0], evals[0][1], evals[0][2], evals[0][0])
        finite = [ev[0] for ev in evals if math.isfinite(ev[0])]
        if len(finite) == n + 1 and max(finite) - min(finite) < 1e-10:
            termination = "converged"
            break
    trace.termination = termination

    best = trace.best_index
    theta_best = config.theta0.with_values(trace.thetas[best])
    return apply_parameters(config.base, theta_best), trace


def scan_augmented_primitive(mol: Molecule, base: BasisSet, kind: str,
                             exponent_grid) -> list:
    """Add one uncontracted primitive of the given kind to the heaviest
    element and scan its exponent, reporting both 1-norms plus HF and FCI
    energies per grid point. Failed points are marked, not fatal."""
    if kind not in ("s", "p"):
        raise BasisOptError(f"scan supports s or p shells, got {kind!r}")
    l = L_LABELS[kind]
    heavy = mol.symbols[int(np.argmax(mol.atomic_numbers))]
    rows = []
    for alpha in exponent_grid:
        row = {"alpha": float(alpha), "status": "ok", "note": ""}
        try:
            shell = BasisShell(l, np.array([float(alpha)]), np.ones((1, 1)))
            shells = tuple(base.shells_for(heavy)) + (shell,)
            trial = base.with_shells(heavy, shells)
            ints = compute_integrals(mol, trial)
            if ints.n_linear_dependent > 0:
                row["status"] = "lindep"
                row["note"] = (f"{ints.n_linear_dependent} overlap "
                               "eigenvalues below threshold")
            scf = run_rhf(ints, mol.n_electrons)
            ham = transform_to_mo(ints, scf)
            rep = sparse_norm(ham)
            row.update(
                n=ham.n,
                lambda_sparse=rep.lambda_q,
                lambda_df=df_factorize(ham).lambda_df,
                e_hf=scf.e_hf,
                e_fci=run_ci(ham, "fci").e_total,
            )
        except (SCFConvergenceError, CISpaceError,
                np.linalg.LinAlgError) as exc:
            row["status"] = "failed"
            row["note"] = str(exc)
        rows.append(row)
    return rows


def transfer_evaluate(optimized: BasisSet, molecules, reference: BasisSet,
                      energy_methods=("hf", "mp2", "cisd")) -> list:
    """Per-molecule energy and norm deltas of an optimized basis against
    a reference basis. Molecules outside the pipeline caps are skipped
    with a record rather than aborting the sweep."""
    rows = []
    for mol in molecules:
        row = {"formula": "".join(mol.symbols), "status": "ok", "note": ""}
        try:
            per = {}
            for tag, basis in (("ref", reference), ("opt", optimized)):
                ints = compute_integrals(mol, basis)
                scf = run_rhf(ints, mol.n_electrons)
                ham = transform_to_mo(ints, scf)
                ent = {"n": ham.n, "e_hf": scf.e_hf,
                       "lambda_df": df_factorize(ham).lambda_df}
                if "mp2" in energy_methods:
                    ham2, eps = semicanonicalize(ham)
                    ent["e_mp2"] = scf.e_hf + run_mp2(ham2, eps).e_corr
                if "cisd" in energy_methods:
                    try:
                        ent["e_cisd"] = run_ci(ham, "cisd").e_total
                    except CISpaceError as exc:
                        ent["e_cisd"] = None
                        row["note"] = f"cisd skipped: {exc}"
                per[tag] = ent
            row["n_ref"] = per["ref"]["n"]
            row["n_opt"] = per["opt"]["n"]
            for m in energy_methods:
                key = f"e_{m}"
                a, b = per["ref"].get(key), per["opt"].get(key)
                row[f"{key}_ref"] = a
                row[f"{key}_opt"] = b
                row[f"d{key}"] = None if (a is None or b is None) else b - a
            lr, lo = per["ref"]["lambda_df"], per["opt"]["lambda_df"]
            row["lambda_ref"] = lr
            row["lambda_opt"] = lo
            row["dlambda_percent"] = 100.0 * (lr - lo) / lr
        except (SCFConvergenceError, CISpaceError,
                np.linalg.LinAlgError) as exc:
            row["status"] = "skipped"
            row["note"] = str(exc)
        rows.append(row)
    return rows
