"""lambdaq: LCU 1-norm estimation and basis optimization for molecular
electronic Hamiltonians."""
__version__ = "0.1.0"

from .chem import (
    BasisError,
    BasisSet,
    BasisShell,
    GeometryError,
    Molecule,
    ParameterSlot,
    ParameterVector,
    apply_parameters,
    builtin_geometry,
    extract_parameters,
    load_basis,
    load_geometry,
)
from .integrals import IntegralSet, boys, compute_integrals
from .scf import SCFConvergenceError, SCFResult, run_rhf, transform_to_mo
from .hamiltonian import (
    MOHamiltonian,
    modified_one_body,
    read_fcidump,
    restrict_orbitals,
    write_fcidump,
)
from .norms import (
    DFFactorization,
    NormReport,
    ResourceEstimate,
    df_factorize,
    jw_oracle_norm,
    resource_estimate,
    sparse_norm,
)
from .correlation import (
    CIResult,
    CorrelationError,
    MP2Result,
    NaturalOrbitalSet,
    natural_orbitals,
    run_ci,
    run_mp2,
    semicanonicalize,
)
from .fno import (
    FNOCriterion,
    FNOReport,
    build_fno_hamiltonian,
    fno_comparison_report,
    n2_dissociation_demo,
)
from .basisopt import (
    OptimizationConfig,
    OptimizationTrace,
    evaluate_cost,
    init_augmented,
    optimize_basis,
    scan_augmented_primitive,
    transfer_evaluate,
)

__all__ = [
    "BasisError",
    "BasisSet",
    "BasisShell",
    "GeometryError",
    "Molecule",
    "ParameterSlot",
    "ParameterVector",
    "apply_parameters",
    "builtin_geometry",
    "extract_parameters",
    "load_basis",
    "load_geometry",
    "IntegralSet",
    "boys",
    "compute_integrals",
    "SCFConvergenceError",
    "SCFResult",
    "run_rhf",
    "transform_to_mo",
    "MOHamiltonian",
    "modified_one_body",
    "read_fcidump",
    "restrict_orbitals",
    "write_fcidump",
    "DFFactorization",
    "NormReport",
    "ResourceEstimate",
    "df_factorize",
    "jw_oracle_norm",
    "resource_estimate",
    "sparse_norm",
    "CIResult",
    "CorrelationError",
    "MP2Result",
    "NaturalOrbitalSet",
    "natural_orbitals",
    "run_ci",
    "run_mp2",
    "semicanonicalize",
    "FNOCriterion",
    "FNOReport",
    "build_fno_hamiltonian",
    "fno_comparison_report",
    "n2_dissociation_demo",
    "OptimizationConfig",
    "OptimizationTrace",
    "evaluate_cost",
    "init_augmented",
    "optimize_basis",
    "scan_augmented_primitive",
    "transfer_evaluate",
    "__version__",
]
