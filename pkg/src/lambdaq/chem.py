"""Molecular geometries, Gaussian basis sets, and the optimizer-facing
parameter view of a basis.

Conventions: coordinates are stored in Bohr (XYZ files are Angstrom),
basis exponents in Bohr^-2, angular momentum limited to l <= 3 by the
integral engine. Contraction matrices are (n_primitives, n_contracted);
published contraction coefficients refer to normalized primitives and are
stored verbatim (normalization is applied by the integral engine).
"""
from __future__ import annotations

import hashlib
import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

BOHR_PER_ANGSTROM = 1.8897259886

ATOMIC_NUMBERS = {
    "H": 1, "He": 2, "Li": 3, "Be": 4, "B": 5, "C": 6, "N": 7, "O": 8,
    "F": 9, "Ne": 10, "Na": 11, "Mg": 12, "Al": 13, "Si": 14, "P": 15,
    "S": 16, "Cl": 17, "Ar": 18,
}

ANGULAR_LABELS = "spdf"

_DATA_DIR = os.path.join(os.path.dirname(__file__), "data")


class GeometryError(ValueError):
    """Malformed or physically invalid molecular geometry."""


class BasisError(ValueError):
    """Malformed basis data or parameter mask."""


# --------------------------------------------------------------------------
# molecule


@dataclass(frozen=True)
class Molecule:
    """Nuclear framework: element symbols, charges and positions in Bohr."""

    symbols: tuple
    coords: np.ndarray         # (n_atoms, 3), Bohr
    charge: int = 0
    multiplicity: int = 1

    def __post_init__(self):
        coords = np.ascontiguousarray(np.asarray(self.coords, dtype=np.float64))
        if coords.shape != (len(self.symbols), 3):
            raise GeometryError(
                f"coordinate array shape {coords.shape} does not match "
                f"{len(self.symbols)} atoms")
        for sym in self.symbols:
            if sym not in ATOMIC_NUMBERS:
                raise GeometryError(f"unknown element symbol {sym!r}")
        for i in range(len(self.symbols)):
            for j in range(i + 1, len(self.symbols)):
                if np.linalg.norm(coords[i] - coords[j]) < 1e-6:
                    raise GeometryError(
                        f"atoms {i} and {j} are at identical positions")
        if self.multiplicity < 1:
            raise GeometryError("multiplicity must be a positive integer")
        if self.n_electrons <= 0:
            raise GeometryError("molecule has no electrons")
        if self.n_electrons % 2 != 0:
            raise GeometryError(
                f"odd electron count {self.n_electrons}: restricted "
                "references require closed shells")
        coords.flags.writeable = False
        object.__setattr__(self, "symbols", tuple(self.symbols))
        object.__setattr__(self, "coords", coords)

    @property
    def n_atoms(self) -> int:
        return len(self.symbols)

    @property
    def atomic_numbers(self) -> np.ndarray:
        return np.array([ATOMIC_NUMBERS[s] for s in self.symbols], dtype=np.int64)

    @property
    def n_electrons(self) -> int:
        return int(sum(ATOMIC_NUMBERS[s] for s in self.symbols) - self.charge)

    @property
    def atoms(self):
        z = self.atomic_numbers
        return [(self.symbols[i], int(z[i]), self.coords[i]) for i in range(self.n_atoms)]

    def nuclear_repulsion(self) -> float:
        z = self.atomic_numbers.astype(np.float64)
        e = 0.0
        for i in range(self.n_atoms):
            for j in range(i + 1, self.n_atoms):
                e += z[i] * z[j] / np.linalg.norm(self.coords[i] - self.coords[j])
        return float(e)

    def translated(self, shift) -> "Molecule":
        return Molecule(self.symbols, self.coords + np.asarray(shift, dtype=np.float64),
                        self.charge, self.multiplicity)

    def rotated(self, rot) -> "Molecule":
        rot = np.asarray(rot, dtype=np.float64)
        return Molecule(self.symbols, self.coords @ rot.T, self.charge,
                        self.multiplicity)

    def hash(self) -> str:
        lines = ["%s %.14e %.14e %.14e" % (s, *xyz)
                 for s, xyz in zip(self.symbols, self.coords)]
        lines.append(f"charge={self.charge} multiplicity={self.multiplicity}")
        return hashlib.sha256("\n".join(lines).encode()).hexdigest()


def load_geometry(path, charge: int = 0, multiplicity: int = 1) -> Molecule:
    """Read an XYZ file (Angstrom) into a Molecule (Bohr).

    First line: atom count; second line: free-form comment; then one
    "Symbol x y z" line per atom.
    """
    with open(path) as fh:
        raw = [ln for ln in fh.read().splitlines()]
    if not raw:
        raise GeometryError(f"{path}: empty file")
    try:
        n = int(raw[0].strip())
    except ValueError:
        raise GeometryError(f"{path}: malformed atom-count header {raw[0]!r}") from None
    body = [ln for ln in raw[2:] if ln.strip()]
    if len(body) != n:
        raise GeometryError(
            f"{path}: header claims {n} atoms but {len(body)} atom lines found")
    symbols, coords = [], []
    for ln in body:
        parts = ln.split()
        if len(parts) < 4:
            raise GeometryError(f"{path}: malformed atom line {ln!r}")
        sym = parts[0].capitalize()
        if sym not in ATOMIC_NUMBERS:
            raise GeometryError(f"{path}: unknown element symbol {parts[0]!r}")
        try:
            xyz = [float(v) for v in parts[1:4]]
        except ValueError:
            raise GeometryError(f"{path}: non-numeric coordinate in {ln!r}") from None
        symbols.append(sym)
        coords.append(xyz)
    coords = np.array(coords, dtype=np.float64) * BOHR_PER_ANGSTROM
    return Molecule(tuple(symbols), coords, charge, multiplicity)


def builtin_geometry(name: str, charge: int = 0, multiplicity: int = 1) -> Molecule:
    """Load one of the geometries shipped in the data directory."""
    path = os.path.join(_DATA_DIR, name.lower() + ".xyz")
    if not os.path.exists(path):
        raise GeometryError(f"no shipped geometry named {name!r}")
    return load_geometry(path, charge, multiplicity)


# --------------------------------------------------------------------------
# basis sets


@dataclass(frozen=True)
class BasisShell:
    """One contracted shell: angular momentum, primitive exponents, and a
    (n_primitives, n_contracted) contraction-coefficient matrix."""

    l: int
    exponents: np.ndarray
    coefficients: np.ndarray

    def __post_init__(self):
        exps = np.ascontiguousarray(np.asarray(self.exponents, dtype=np.float64))
        coef = np.ascontiguousarray(np.asarray(self.coefficients, dtype=np.float64))
        if coef.ndim == 1:
            coef = coef.reshape(-1, 1)
        if self.l < 0 or int(self.l) != self.l:
            raise BasisError(f"angular momentum must be a nonnegative integer, got {self.l}")
        if exps.ndim != 1 or exps.size == 0:
            raise BasisError("shell must carry at least one primitive")
        if coef.shape[0] != exps.size:
            raise BasisError(
                f"contraction matrix rows {coef.shape[0]} != primitive count {exps.size}")
        if np.any(exps <= 0.0):
            raise BasisError("all exponents must be positive")
        if np.any(np.all(coef == 0.0, axis=0)):
            raise BasisError("contraction matrix has an all-zero column")
        exps.flags.writeable = False
        coef.flags.writeable = False
        object.__setattr__(self, "l", int(self.l))
        object.__setattr__(self, "exponents", exps)
        object.__setattr__(self, "coefficients", coef)

    @property
    def n_primitives(self) -> int:
        return self.exponents.size

    @property
    def n_contracted(self) -> int:
        return self.coefficients.shape[1]

    @property
    def is_canonical(self) -> bool:
        return bool(np.all(np.diff(self.exponents) < 0.0)) or self.n_primitives == 1

    def canonicalized(self) -> "BasisShell":
        order = np.argsort(-self.exponents, kind="stable")
        exps = self.exponents[order]
        if np.any(np.diff(exps) == 0.0):
            raise BasisError(
                f"duplicate exponent within one l={self.l} shell")
        return BasisShell(self.l, exps, self.coefficients[order])


@dataclass(frozen=True)
class BasisSet:
    """Map from element symbol to its shells, plus a name tag.

    Harmonics convention is spherical solid harmonics for every shell
    ((2l+1) functions per contracted column).
    """

    elements: dict
    name: str = "unnamed"
    harmonics: str = "spherical"

    def __post_init__(self):
        object.__setattr__(self, "elements",
                           {el: tuple(shells) for el, shells in self.elements.items()})
        if self.harmonics != "spherical":
            raise BasisError("only the spherical-harmonics convention is supported")

    def shells_for(self, element: str):
        if element not in self.elements:
            raise BasisError(f"basis {self.name!r} has no entry for element {element!r}")
        return self.elements[element]

    def n_ao(self, mol: Molecule) -> int:
        total = 0
        for sym in mol.symbols:
            for sh in self.shells_for(sym):
                total += (2 * sh.l + 1) * sh.n_contracted
        return total

    def max_l(self, mol: Molecule) -> int:
        return max(sh.l for sym in mol.symbols for sh in self.shells_for(sym))

    def with_shells(self, element: str, shells) -> "BasisSet":
        new = dict(self.elements)
        new[element] = tuple(shells)
        return BasisSet(new, self.name, self.harmonics)

    def hash(self) -> str:
        return hashlib.sha256(serialize_basis(self).encode()).hexdigest()


def _fmt_real(x: float) -> str:
    s = "%.17E" % float(x)
    return s


def serialize_basis(basis: BasisSet) -> str:
    """Canonical text form of the basis schema (element -> shell list).

    Reals are printed in scientific notation with 17 significant digits so
    that load(serialize(b)) is bit-identical to b.
    """
    chunks = ["{"]
    el_items = []
    for el in sorted(basis.elements):
        sh_items = []
        for sh in basis.elements[el]:
            sh = sh.canonicalized()
            exps = ", ".join(_fmt_real(a) for a in sh.exponents)
            rows = ",\n        ".join(
                "[" + ", ".join(_fmt_real(c) for c in row) + "]"
                for row in sh.coefficients)
            sh_items.append(
                "    {\n"
                f'      "l": {sh.l},\n'
                f'      "exponents": [{exps}],\n'
                f'      "coefficients": [\n        {rows}\n      ]\n'
                "    }")
        el_items.append(f'  "{el}": [\n' + ",\n".join(sh_items) + "\n  ]")
    chunks.append(",\n".join(el_items))
    chunks.append("}")
    return "\n".join(chunks) + "\n"


def parse_basis(text: str, name: str = "unnamed") -> BasisSet:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise BasisError(f"basis data is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise BasisError("basis schema root must be a map element -> shells")
    elements = {}
    for el, shells in data.items():
        if el in elements:
            raise BasisError(f"duplicate element entry {el!r}")
        parsed = []
        for entry in shells:
            missing = {"l", "exponents", "coefficients"} - set(entry)
            if missing:
                raise BasisError(f"{el}: shell entry missing fields {sorted(missing)}")
            if len(entry["exponents"]) == 0:
                raise BasisError(f"{el}: shell with zero primitives")
            shell = BasisShell(entry["l"], entry["exponents"], entry["coefficients"])
            parsed.append(shell.canonicalized())
        elements[el] = tuple(parsed)
    return BasisSet(elements, name)


def load_basis(path_or_name: str) -> BasisSet:
    """Load a basis from a schema file, or by name from the shipped library
    (sto-3g, cc-pvdz, cc-pvtz)."""
    if os.path.exists(path_or_name):
        path = path_or_name
        name = os.path.splitext(os.path.basename(path))[0]
    else:
        name = path_or_name.lower()
        path = os.path.join(_DATA_DIR, name + ".json")
        if not os.path.exists(path):
            raise BasisError(f"no basis file or shipped basis named {path_or_name!r}")
    with open(path) as fh:
        return parse_basis(fh.read(), name)


def save_basis(basis: BasisSet, path: str) -> None:
    with open(path, "w") as fh:
        fh.write(serialize_basis(basis))


# --------------------------------------------------------------------------
# optimizer-facing parameter view


@dataclass(frozen=True)
class ParameterSlot:
    """Address of one tunable number inside a BasisSet."""

    element: str
    shell: int
    kind: str                  # "exponent" | "coefficient"
    primitive: int
    column: int = 0

    def __post_init__(self):
        if self.kind not in ("exponent", "coefficient"):
            raise BasisError(f"unknown slot kind {self.kind!r}")


@dataclass(frozen=True)
class ParameterVector:
    """Flat optimizer variables plus the mask mapping them onto a basis.

    Exponent slots hold log(alpha): apply_parameters exp-transforms them, so
    any real-valued iterate yields a strictly positive exponent.
    """

    values: np.ndarray
    slots: tuple

    def __post_init__(self):
        vals = np.ascontiguousarray(np.asarray(self.values, dtype=np.float64))
        slots = tuple(self.slots)
        if vals.ndim != 1 or vals.size != len(slots):
            raise BasisError(
                f"{vals.size} values for {len(slots)} parameter slots")
        seen = set()
        for s in slots:
            key = (s.element, s.shell, s.kind, s.primitive, s.column)
            if key in seen:
                raise BasisError(f"duplicate parameter slot {key}")
            seen.add(key)
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "slots", slots)

    def __len__(self) -> int:
        return self.values.size

    def with_values(self, values) -> "ParameterVector":
        return ParameterVector(np.asarray(values, dtype=np.float64), self.slots)


def apply_parameters(base: BasisSet, theta: ParameterVector) -> BasisSet:
    """Return a copy of base with masked slots replaced by theta's values.

    Pure function: base is never modified. Exponent slots are filled with
    exp(theta) to keep every exponent positive regardless of the iterate.
    """
    staged = {}
    for val, slot in zip(theta.values, theta.slots):
        if slot.element not in base.elements:
            raise BasisError(f"parameter targets missing element {slot.element!r}")
        shells = base.elements[slot.element]
        if not (0 <= slot.shell < len(shells)):
            raise BasisError(
                f"parameter targets missing shell {slot.shell} of {slot.element!r}")
        sh = shells[slot.shell]
        if not (0 <= slot.primitive < sh.n_primitives):
            raise BasisError(
                f"parameter targets missing primitive {slot.primitive} "
                f"of {slot.element!r} shell {slot.shell}")
        key = (slot.element, slot.shell)
        if key not in staged:
            staged[key] = (sh.exponents.copy(), sh.coefficients.copy())
        exps, coefs = staged[key]
        if slot.kind == "exponent":
            exps[slot.primitive] = math.exp(val)
        else:
            if not (0 <= slot.column < sh.n_contracted):
                raise BasisError(
                    f"parameter targets missing column {slot.column} "
                    f"of {slot.element!r} shell {slot.shell}")
            coefs[slot.primitive, slot.column] = val
    if not staged:
        return base
    new_elements = dict(base.elements)
    for (el, ish), (exps, coefs) in staged.items():
        shells = list(new_elements[el])
        shells[ish] = BasisShell(shells[ish].l, exps, coefs)
        new_elements[el] = tuple(shells)
    return BasisSet(new_elements, base.name, base.harmonics)


def extract_parameters(base: BasisSet, slots) -> ParameterVector:
    """Read the current values of the given slots out of a basis (exponents
    as log(alpha)), giving the optimizer's starting vector."""
    slots = tuple(slots)
    vals = np.empty(len(slots), dtype=np.float64)
    for k, slot in enumerate(slots):
        sh = base.shells_for(slot.element)[slot.shell]
        if slot.kind == "exponent":
            vals[k] = math.log(sh.exponents[slot.primitive])
        else:
            vals[k] = sh.coefficients[slot.primitive, slot.column]
    return ParameterVector(vals, slots)


def load_ano_donors() -> dict:
    """Donor exponent lists for shell augmentation, keyed element -> l-label."""
    with open(os.path.join(_DATA_DIR, "ano-donors.json")) as fh:
        return json.load(fh)
