"""Shared oracles.

Everything here is built from explicit Kronecker products of 2x2 matrices,
independently of the package's bit-twiddling kernels.
"""

from __future__ import annotations

from functools import reduce

import numpy as np
import pytest

from vqe_plateaus.hamiltonian import PauliSum

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def embed(op: np.ndarray, qubit: int, n: int) -> np.ndarray:
    """Single-qubit ``op`` on ``qubit`` (qubit 0 = least-significant bit)."""
    # kron puts its first factor on the most-significant bit, so iterate high to low
    factors = [op if q == qubit else PAULI["I"] for q in reversed(range(n))]
    return reduce(np.kron, factors)


def dense_pauli(letters: str) -> np.ndarray:
    n = len(letters)
    return reduce(np.kron, [PAULI[letters[q]] for q in reversed(range(n))])


def dense_hamiltonian(h: PauliSum) -> np.ndarray:
    dim = 1 << h.n_qubits
    out = np.zeros((dim, dim), dtype=complex)
    for c, s in h.terms:
        out += c * dense_pauli(str(s))
    return out


def ry_matrix(t: float) -> np.ndarray:
    c, s = np.cos(t / 2), np.sin(t / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rz_matrix(t: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * t), np.exp(0.5j * t)])


def cnot_matrix(control: int, target: int, n: int) -> np.ndarray:
    dim = 1 << n
    out = np.zeros((dim, dim), dtype=complex)
    for k in range(dim):
        j = k ^ (1 << target) if (k >> control) & 1 else k
        out[j, k] = 1.0
    return out


def dense_circuit_state(circuit, params) -> np.ndarray:
    n = circuit.n_qubits
    psi = np.zeros(1 << n, dtype=complex)
    psi[0] = 1.0
    for g in circuit.gates:
        if g.kind == "CNOT":
            psi = cnot_matrix(*g.wires, n) @ psi
        elif g.kind == "RY":
            psi = embed(ry_matrix(params[g.param]), g.wires[0], n) @ psi
        else:
            psi = embed(rz_matrix(params[g.param]), g.wires[0], n) @ psi
    return psi


def random_pauli_sum(rng: np.random.Generator, n: int, n_terms: int) -> PauliSum:
    terms = []
    for _ in range(n_terms):
        letters = "".join(rng.choice(list("IXYZ"), size=n))
        terms.append((float(rng.normal()), letters))
    return PauliSum(n, terms)


# ---------------------------------------------------------------------------
# acceptance summary: one PASS/FAIL line per criterion at the end of the run
# ---------------------------------------------------------------------------

ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture
def record_criterion():
    def record(number: int, passed: bool, detail: str) -> None:
        line = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES[number] = line
        print(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[number])
