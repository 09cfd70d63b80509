import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import dense_hamiltonian
from vqe_plateaus.errors import ConfigurationError, ParseError, ShapeError
from vqe_plateaus.hamiltonian import (
    PauliString,
    PauliSum,
    builtin_hamiltonian,
    bundled_manifest,
    bundled_names,
    extract_local,
    format_hamiltonian,
    interpolate,
    load_bundled,
    load_hamiltonian,
    parse_hamiltonian,
    write_hamiltonian,
)
from vqe_plateaus.statevector import ground_state


def test_pauli_string_masks():
    s = PauliString("XYZI")
    assert s.n_qubits == 4
    assert s.support == (0, 1, 2)
    assert s.x_mask == 0b0011
    assert s.z_mask == 0b0110
    assert s.y_count == 1
    assert PauliString.identity(3).is_identity


def test_pauli_string_rejects_bad_letters():
    with pytest.raises(ConfigurationError):
        PauliString("XAZ")


def test_duplicates_merge_in_first_appearance_order():
    h = PauliSum(2, [(1.0, "ZI"), (0.5, "XX"), (2.0, "ZI")])
    assert [str(s) for _, s in h.terms] == ["ZI", "XX"]
    assert h.coefficient("ZI") == 3.0


def test_cancelled_terms_are_dropped():
    h = PauliSum(2, [(1.0, "ZI"), (-1.0, "ZI")])
    assert len(h) == 0
    assert np.allclose(h.to_dense(), 0)


def test_coefficients_must_be_real_and_finite():
    with pytest.raises(ConfigurationError):
        PauliSum(1, [(1j, "Z")])
    with pytest.raises(ConfigurationError):
        PauliSum(1, [(math.inf, "Z")])


def test_width_mismatch_is_a_shape_error():
    with pytest.raises(ShapeError):
        PauliSum(2, [(1.0, "ZZZ")])


def test_pauli_sum_is_immutable():
    h = PauliSum(1, [(1.0, "Z")])
    with pytest.raises(AttributeError):
        h.terms = ()


def test_parse_comments_blanks_and_case():
    text = """
    # a comment
    -1.5 zz   # trailing comment

    0.25 XI
    """
    h = parse_hamiltonian(text)
    assert h.n_qubits == 2
    assert h.coefficient("ZZ") == -1.5
    assert h.coefficient("XI") == 0.25


@pytest.mark.parametrize(
    "text, line",
    [
        ("1.0 ZZ\n2.0 ZQ\n", 2),
        ("1.0 ZZ\n\n1.0 ZZZ\n", 3),
        ("abc ZZ\n", 1),
        ("1.0\n", 1),
        ("1.0 ZZ extra\n", 1),
        ("nan ZZ\n", 1),
    ],
)
def test_parse_errors_carry_line_numbers(text, line):
    with pytest.raises(ParseError) as info:
        parse_hamiltonian(text)
    assert info.value.line == line
    assert f"line {line}" in str(info.value)


def test_parse_empty_text_fails():
    with pytest.raises(ParseError):
        parse_hamiltonian("# nothing here\n")


terms_strategy = st.integers(1, 4).flatmap(
    lambda n: st.lists(
        st.tuples(
            st.floats(-10, 10, allow_nan=False, allow_infinity=False),
            st.text(alphabet="IXYZ", min_size=n, max_size=n),
        ),
        min_size=1,
        max_size=8,
    ).map(lambda terms: (n, terms))
)


@settings(max_examples=60, deadline=None)
@given(terms_strategy)
def test_format_parse_round_trip(data):
    n, terms = data
    h = PauliSum(n, terms)
    assert parse_hamiltonian(format_hamiltonian(h, header="round trip")) == h


def test_write_and_load_file(tmp_path):
    h = builtin_hamiltonian("transverse_field_ising", 3)
    path = tmp_path / "tfim3.txt"
    write_hamiltonian(h, path, header="three sites")
    assert load_hamiltonian(path) == h
    assert path.read_text().startswith("# three sites\n")


def test_missing_file_message():
    with pytest.raises(FileNotFoundError, match="file not found"):
        load_hamiltonian("/nonexistent/h.txt")


def test_extract_local_rules():
    h = PauliSum(
        4,
        [
            (1.0, "IIII"),
            (2.0, "ZIII"),
            (3.0, "XXII"),
            (4.0, "IIYZ"),
            (5.0, "ZIZI"),
            (6.0, "XXXI"),
            (7.0, "ZIIZ"),
        ],
    )
    local = extract_local(h)
    assert {str(s) for _, s in local.terms} == {"IIII", "ZIII", "XXII", "IIYZ"}


def test_interpolate_endpoints_and_midpoint():
    local = PauliSum(2, [(1.0, "ZI")])
    full = PauliSum(2, [(1.0, "ZI"), (2.0, "XX")])
    assert interpolate(local, full, 0.0) == local
    assert interpolate(local, full, 1.0) == full
    mid = interpolate(local, full, 0.5)
    assert mid.coefficient("ZI") == pytest.approx(1.0)
    assert mid.coefficient("XX") == pytest.approx(1.0)
    with pytest.raises(ConfigurationError):
        interpolate(local, full, 1.5)


def test_one_norm():
    h = PauliSum(2, [(-3.0, "II"), (1.5, "ZZ"), (-0.5, "XI")])
    assert h.one_norm() == 5.0
    assert h.one_norm(include_identity=False) == 2.0
    assert h.identity_coefficient == -3.0


def test_dense_matches_kron_oracle():
    rng = np.random.default_rng(3)
    from conftest import random_pauli_sum

    h = random_pauli_sum(rng, 3, 10)
    assert np.allclose(h.to_dense(), dense_hamiltonian(h), atol=1e-14)


def test_tfim_two_sites_ground_energy_is_minus_sqrt5():
    # -Z0Z1 - X0 - X1: in the even-parity sector the ground energy is -sqrt(J^2 + 4h^2)
    h = builtin_hamiltonian("transverse_field_ising", 2, {"J": 1.0, "h": 1.0})
    e0 = np.linalg.eigvalsh(dense_hamiltonian(h))[0]
    assert e0 == pytest.approx(-math.sqrt(5), abs=1e-12)


def test_builtin_term_layout():
    h = builtin_hamiltonian("transverse_field_ising", 3, {"J": 2.0, "h": 0.5})
    assert [(c, str(s)) for c, s in h.terms] == [
        (-2.0, "ZZI"),
        (-2.0, "IZZ"),
        (-0.5, "XII"),
        (-0.5, "IXI"),
        (-0.5, "IIX"),
    ]
    xxz = builtin_hamiltonian("heisenberg_xxz", 2, {"delta": 0.5, "h": 1.0})
    assert xxz.coefficient("ZZ") == 0.5
    assert xxz.coefficient("ZI") == -1.0


def test_builtin_rejects_unknown_names_and_params():
    with pytest.raises(ConfigurationError):
        builtin_hamiltonian("hubbard", 2)
    with pytest.raises(ConfigurationError):
        builtin_hamiltonian("transverse_field_ising", 2, {"g": 1.0})


def test_bundled_catalogue():
    names = bundled_names()
    for expected in ("h2", "lih", "beh2", "tfim_2", "tfim_4", "tfim_8", "xxz_6"):
        assert expected in names
    widths = {"h2": 4, "lih": 12, "beh2": 14}
    for name, n in widths.items():
        assert load_bundled(name).n_qubits == n
        manifest = bundled_manifest(name)
        assert manifest["n_qubits"] == n
        assert manifest["n_terms"] == len(load_bundled(name))
    assert load_hamiltonian("h2") == load_bundled("h2")


@pytest.mark.parametrize("name", ["h2", "tfim_2", "tfim_4", "xxz_6"])
def test_bundled_reference_energies_match(name):
    manifest = bundled_manifest(name)
    assert ground_state(load_bundled(name)).energy == pytest.approx(manifest["reference_energy"], abs=1e-9)


def test_h2_molecular_energies():
    manifest = bundled_manifest("h2")
    # exact STO-3G H2 at 0.735 angstrom
    assert manifest["fci_energy"] == pytest.approx(-1.13730604, abs=1e-7)
    assert manifest["reference_energy"] == pytest.approx(manifest["fci_energy"], abs=1e-8)
    assert manifest["hf_energy"] > manifest["fci_energy"]
