import numpy as np
import pytest

from lambdaq.chem import (BOHR_PER_ANGSTROM, BasisError, BasisSet,
                          BasisShell, GeometryError, Molecule,
                          ParameterSlot, ParameterVector, apply_parameters,
                          builtin_geometry, extract_parameters, load_basis,
                          load_geometry, parse_basis, serialize_basis)


def write_xyz(tmp_path, text):
    path = tmp_path / "geom.xyz"
    path.write_text(text)
    return str(path)


def test_load_single_helium(tmp_path):
    mol = load_geometry(write_xyz(tmp_path, "1\ncomment\nHe 0 0 0\n"))
    assert mol.n_atoms == 1
    assert mol.atomic_numbers.tolist() == [2]
    assert np.all(mol.coords == 0.0)


def test_load_unit_conversion(tmp_path):
    mol = load_geometry(write_xyz(tmp_path,
                                  "2\n\nH 0 0 0\nH 0 0 0.7414\n"))
    d = np.linalg.norm(mol.coords[1] - mol.coords[0])
    assert d == pytest.approx(0.7414 * BOHR_PER_ANGSTROM, abs=1e-12)
    assert d == pytest.approx(1.40105, abs=1e-4)


def test_load_geometry_errors(tmp_path):
    with pytest.raises(GeometryError):
        load_geometry(write_xyz(tmp_path, "3\n\nH 0 0 0\nH 0 0 1\n"))
    with pytest.raises(GeometryError):
        load_geometry(write_xyz(tmp_path, "1\n\nXx 0 0 0\n"))
    with pytest.raises(GeometryError):
        load_geometry(write_xyz(tmp_path, "1\n\nH 0 zero 0\n"))
    with pytest.raises(GeometryError):
        load_geometry(write_xyz(tmp_path, "banana\n\nH 0 0 0\n"))


def test_molecule_invariants():
    with pytest.raises(GeometryError):
        Molecule(("H", "H"), np.zeros((2, 3)))
    with pytest.raises(GeometryError):    # odd electron count
        Molecule(("Li",), np.zeros((1, 3)))
    with pytest.raises(GeometryError):
        Molecule(("H", "H"), np.array([[0.0, 0, 0], [0, 0, 1.0]]),
                 multiplicity=0)
    mol = Molecule(("H", "H"), np.array([[0.0, 0, 0], [0, 0, 1.4]]))
    assert mol.n_electrons == 2
    assert mol.nuclear_repulsion() == pytest.approx(1.0 / 1.4)


def test_builtin_geometries_exist():
    for name in ("h2", "h4", "lih", "h2o", "nh3", "ch4", "hf", "n2", "he"):
        mol = builtin_geometry(name)
        assert mol.n_electrons % 2 == 0
    with pytest.raises(GeometryError):
        builtin_geometry("unobtainium")


def test_parse_basis_single_shell():
    bs = parse_basis('{"C": [{"l": 2, "exponents": [0.5500], '
                     '"coefficients": [[1.0]]}]}', "d-only")
    sh = bs.shells_for("C")[0]
    assert sh.l == 2 and sh.n_primitives == 1 and sh.n_contracted == 1
    assert sh.exponents[0] == 0.5500


def test_parse_basis_empty_and_errors():
    assert parse_basis("{}").elements == {}
    with pytest.raises(BasisError):
        parse_basis('{"H": [{"l": 0, "exponents": [], "coefficients": []}]}')
    with pytest.raises(BasisError):
        parse_basis('{"H": [{"l": 0, "exponents": [-1.0], '
                    '"coefficients": [[1.0]]}]}')
    with pytest.raises(BasisError):
        parse_basis('{"H": [{"l": 0, "coefficients": [[1.0]]}]}')
    with pytest.raises(BasisError):
        parse_basis("[1, 2]")
    with pytest.raises(BasisError):
        parse_basis("not json")


def test_shell_invariants():
    with pytest.raises(BasisError):
        BasisShell(-1, [1.0], [[1.0]])
    with pytest.raises(BasisError):
        BasisShell(0, [1.0, 2.0], [[0.0], [0.0]])   # all-zero column
    with pytest.raises(BasisError):
        BasisShell(0, [1.0, 1.0], [[0.5], [0.5]]).canonicalized()
    sh = BasisShell(0, [0.5, 2.0, 1.0], [[1.0], [2.0], [3.0]]).canonicalized()
    assert sh.exponents.tolist() == [2.0, 1.0, 0.5]
    assert sh.coefficients[:, 0].tolist() == [2.0, 3.0, 1.0]
    assert sh.is_canonical


def test_ano_shell_shape():
    donor = [4.5420, 1.9790, 0.8621, 0.3756, 0.1636]
    sh = BasisShell(2, donor, np.eye(5)).canonicalized()
    assert sh.n_primitives == 5
    assert np.all(np.diff(sh.exponents) < 0)


def test_serialize_roundtrip_bit_exact():
    for name in ("sto-3g", "cc-pvdz", "cc-pvtz"):
        bs = load_basis(name)
        bs2 = parse_basis(serialize_basis(bs), bs.name)
        assert set(bs2.elements) == set(bs.elements)
        for el in bs.elements:
            for sh, sh2 in zip(bs.elements[el], bs2.elements[el]):
                assert sh.l == sh2.l
                assert np.array_equal(sh.exponents, sh2.exponents)
                assert np.array_equal(sh.coefficients, sh2.coefficients)
        assert serialize_basis(bs2) == serialize_basis(bs)


def test_load_basis_missing():
    with pytest.raises(BasisError):
        load_basis("no-such-basis")


def test_apply_parameters_identity():
    base = load_basis("sto-3g")
    theta = ParameterVector(np.zeros(0), ())
    assert apply_parameters(base, theta) is base


def test_apply_parameters_exponent_transform():
    base = parse_basis('{"H": [{"l": 0, "exponents": [1.0], '
                       '"coefficients": [[1.0]]}]}')
    slot = ParameterSlot("H", 0, "exponent", 0)
    out = apply_parameters(base, ParameterVector([np.log(0.55)], (slot,)))
    assert out.shells_for("H")[0].exponents[0] == pytest.approx(0.55, rel=1e-15)
    # base untouched, and positivity holds for any real iterate
    assert base.shells_for("H")[0].exponents[0] == 1.0
    out2 = apply_parameters(base, ParameterVector([-40.0], (slot,)))
    assert out2.shells_for("H")[0].exponents[0] > 0.0


def test_apply_parameters_coefficient_and_errors():
    base = parse_basis('{"H": [{"l": 0, "exponents": [2.0, 1.0], '
                       '"coefficients": [[0.6], [0.4]]}]}')
    slot = ParameterSlot("H", 0, "coefficient", 1, 0)
    out = apply_parameters(base, ParameterVector([0.9], (slot,)))
    assert out.shells_for("H")[0].coefficients[1, 0] == 0.9
    with pytest.raises(BasisError):
        apply_parameters(base, ParameterVector(
            [0.0], (ParameterSlot("O", 0, "exponent", 0),)))
    with pytest.raises(BasisError):
        apply_parameters(base, ParameterVector(
            [0.0], (ParameterSlot("H", 3, "exponent", 0),)))
    with pytest.raises(BasisError):
        apply_parameters(base, ParameterVector(
            [0.0], (ParameterSlot("H", 0, "exponent", 7),)))


def test_extract_apply_roundtrip():
    base = load_basis("cc-pvdz")
    slots = (ParameterSlot("O", 3, "exponent", 0),
             ParameterSlot("O", 3, "coefficient", 0, 0))
    theta = extract_parameters(base, slots)
    same = apply_parameters(base, theta)
    sh0 = base.shells_for("O")[3]
    sh1 = same.shells_for("O")[3]
    assert np.allclose(sh1.exponents, sh0.exponents, rtol=0, atol=1e-15)
    assert np.array_equal(sh1.coefficients, sh0.coefficients)


def test_parameter_vector_duplicate_slot():
    s = ParameterSlot("H", 0, "exponent", 0)
    with pytest.raises(BasisError):
        ParameterVector([0.0, 1.0], (s, s))
    with pytest.raises(BasisError):
        ParameterSlot("H", 0, "wiggle", 0)


def test_basis_n_ao_counts():
    mol = builtin_geometry("h2o")
    assert load_basis("sto-3g").n_ao(mol) == 7
    assert load_basis("cc-pvdz").n_ao(mol) == 24
    assert load_basis("cc-pvtz").n_ao(mol) == 58
