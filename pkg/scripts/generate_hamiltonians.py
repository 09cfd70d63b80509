#!/usr/bin/env python3
"""Regenerate the Hamiltonian files bundled under src/vqe_plateaus/data/hamiltonians.

Molecular entries need pyscf (not a package dependency):

    pip install pyscf
    python scripts/generate_hamiltonians.py

The electronic Hamiltonian is built from RHF molecular orbitals in STO-3G
with no active-space truncation, mapped with Jordan-Wigner over interleaved
spin orbitals (qubit 2i = orbital i spin-up, 2i+1 = spin-down).  Lattice
fixtures are written with the package's own builders.
"""

from __future__ import annotations

import argparse
import itertools
import json
import sys
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from vqe_plateaus.hamiltonian import PauliSum, builtin_hamiltonian, write_hamiltonian  # noqa: E402
from vqe_plateaus.statevector import apply_pauli_sum, ground_state  # noqa: E402

OUT = ROOT / "src" / "vqe_plateaus" / "data" / "hamiltonians"

MOLECULES = {
    "h2": {
        "name": "H2",
        "atom": "H 0 0 0; H 0 0 0.735",
        "bond_length_angstrom": 0.735,
    },
    "lih": {
        "name": "LiH",
        "atom": "Li 0 0 0; H 0 0 1.595",
        "bond_length_angstrom": 1.595,
    },
    "beh2": {
        "name": "BeH2",
        "atom": "Be 0 0 0; H 0 0 1.33; H 0 0 -1.33",
        "bond_length_angstrom": 1.33,
    },
}

LATTICES = {
    "tfim_2": ("transverse_field_ising", 2, {"J": 1.0, "h": 1.0}),
    "tfim_4": ("transverse_field_ising", 4, {"J": 1.0, "h": 1.0}),
    "tfim_8": ("transverse_field_ising", 8, {"J": 1.0, "h": 0.5}),
    "xxz_6": ("heisenberg_xxz", 6, {"J": 1.0, "delta": 0.5, "h": 0.2}),
}


# -- Jordan-Wigner in symplectic form: operator = coeff * X^x Z^z ------------

def _mul(a: dict, b: dict) -> dict:
    out: dict = {}
    for (x1, z1), c1 in a.items():
        for (x2, z2), c2 in b.items():
            sign = -1.0 if bin(z1 & x2).count("1") % 2 else 1.0
            key = (x1 ^ x2, z1 ^ z2)
            out[key] = out.get(key, 0.0) + sign * c1 * c2
    return out


def _ladder(j: int, dagger: bool) -> dict:
    below = (1 << j) - 1
    x = 1 << j
    # a_j^dag = 1/2 Z_{<j} (X_j - i Y_j) = 1/2 (X Z_{<j} + X Z_{<j} Z_j) with Y = i X Z
    sign = 1.0 if dagger else -1.0
    return {(x, below): 0.5, (x, below | x): 0.5 * sign}


def _accumulate(total: dict, term: dict, coeff: float) -> None:
    for key, c in term.items():
        total[key] = total.get(key, 0.0) + coeff * c


def _to_pauli_sum(ops: dict, n: int) -> PauliSum:
    terms = []
    for (x, z), c in ops.items():
        letters = []
        for q in range(n):
            bx, bz = (x >> q) & 1, (z >> q) & 1
            letters.append("IXZY"[bx + 2 * bz] if not (bx and bz) else "Y")
        # X Z = -i Y on every qubit carrying both bits
        c = c * (-1j) ** bin(x & z).count("1")
        if abs(c.imag) > 1e-10:
            raise RuntimeError(f"non-Hermitian residue {c} on {''.join(letters)}")
        if abs(c.real) > 1e-12:
            terms.append((c.real, "".join(letters)))
    terms.sort(key=lambda t: (sum(ch != "I" for ch in t[1]), t[1]))
    return PauliSum(n, terms)


def spin_orbital_qubit(p: int, norb: int, ordering: str) -> int:
    """Qubit carrying spin orbital ``p`` (p = 2 * spatial + spin)."""
    if ordering == "interleaved":
        return p
    return (p % 2) * norb + p // 2


def molecular_hamiltonian(atom: str, ordering: str = "interleaved"):
    from pyscf import ao2mo, fci, gto, scf

    mol = gto.M(atom=atom, basis="sto-3g", unit="Angstrom", verbose=0)
    mf = scf.RHF(mol).run()
    c = mf.mo_coeff
    norb = c.shape[1]
    h1 = c.T @ mf.get_hcore() @ c
    eri = ao2mo.restore(1, ao2mo.kernel(mol, c), norb)  # chemist (ij|kl)
    n = 2 * norb
    ladder = {
        (p, d): _ladder(spin_orbital_qubit(p, norb, ordering), d)
        for p in range(n)
        for d in (True, False)
    }

    total: dict = {(0, 0): complex(mol.energy_nuc())}
    for p, q in itertools.product(range(n), repeat=2):
        if p % 2 != q % 2:
            continue
        coeff = h1[p // 2, q // 2]
        if abs(coeff) > 1e-12:
            _accumulate(total, _mul(ladder[p, True], ladder[q, False]), coeff)
    # 1/2 sum h_pqrs a_p^dag a_q^dag a_r a_s with h_pqrs = (ps|qr)
    for p, q, r, s in itertools.product(range(n), repeat=4):
        if p == q or r == s or p % 2 != s % 2 or q % 2 != r % 2:
            continue
        coeff = 0.5 * eri[p // 2, s // 2, q // 2, r // 2]
        if abs(coeff) < 1e-12:
            continue
        op = _mul(_mul(ladder[p, True], ladder[q, True]), _mul(ladder[r, False], ladder[s, False]))
        _accumulate(total, op, coeff)

    e_fci = fci.FCI(mf).kernel()[0]
    return _to_pauli_sum(total, n), mol, mf, float(e_fci)


def sector_ground_energy(h: PauliSum, n_electrons: int) -> float:
    """Lowest eigenvalue restricted to a fixed particle number (dense, small sectors)."""
    n = h.n_qubits
    idx = [k for k in range(1 << n) if bin(k).count("1") == n_electrons]
    block = np.zeros((len(idx), len(idx)), dtype=np.complex128)
    for col, k in enumerate(idx):
        e = np.zeros(1 << n, dtype=np.complex128)
        e[k] = 1.0
        block[:, col] = apply_pauli_sum(h, e)[idx]
    return float(np.linalg.eigvalsh(block)[0])


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--only", nargs="*", help="subset of names to regenerate")
    args = parser.parse_args()
    wanted = set(args.only or list(MOLECULES) + list(LATTICES))

    for key, (model, n, params) in LATTICES.items():
        if key not in wanted:
            continue
        h = builtin_hamiltonian(model, n, params)
        header = f"{model} n={n} " + " ".join(f"{k}={v}" for k, v in params.items())
        write_hamiltonian(h, OUT / f"{key}.txt", header=header)
        gs = ground_state(h)
        manifest = {
            "name": key,
            "kind": "lattice",
            "model": model,
            "n_qubits": n,
            "params": params,
            "n_terms": len(h),
            "reference_energy": gs.energy,
            "reference_source": "vqe_plateaus.statevector.ground_state",
        }
        (OUT / f"{key}.json").write_text(json.dumps(manifest, indent=2) + "\n")
        print(f"{key}: {len(h)} terms, E0 = {gs.energy:.12f}")

    for key, spec in MOLECULES.items():
        if key not in wanted:
            continue
        import pyscf

        h, mol, mf, e_fci = molecular_hamiltonian(spec["atom"])
        n_el = int(mol.nelectron)
        e_sector = sector_ground_energy(h, n_el)
        if abs(e_sector - e_fci) > 1e-7:
            raise RuntimeError(f"{key}: qubit sector energy {e_sector} != FCI {e_fci}")
        gs = ground_state(h)
        header = (
            f"{spec['name']} STO-3G, Jordan-Wigner (interleaved spin orbitals), "
            f"{h.n_qubits} qubits, {len(h)} terms\n"
            f"leftmost letter acts on qubit 0; energies in Hartree; see {key}.json"
        )
        write_hamiltonian(h, OUT / f"{key}.txt", header=header)
        manifest = {
            "name": key,
            "kind": "molecule",
            "molecule": spec["name"],
            "geometry": {"atom": spec["atom"], "unit": "angstrom",
                         "bond_length_angstrom": spec["bond_length_angstrom"]},
            "basis": "sto-3g",
            "active_space": "full (no truncation)",
            "orbitals": "RHF canonical molecular orbitals",
            "mapping": "jordan-wigner; qubit 2i = MO i alpha, 2i+1 = MO i beta",
            "n_qubits": h.n_qubits,
            "n_electrons": n_el,
            "n_terms": len(h),
            "nuclear_repulsion": float(mol.energy_nuc()),
            "hf_energy": float(mf.e_tot),
            "fci_energy": e_fci,
            "sector_ground_energy": e_sector,
            "reference_energy": gs.energy,
            "reference_source": "lowest eigenvalue over the full qubit space "
                                "(vqe_plateaus.statevector.ground_state)",
            "generator": f"scripts/generate_hamiltonians.py with pyscf {pyscf.__version__}",
        }
        (OUT / f"{key}.json").write_text(json.dumps(manifest, indent=2) + "\n")
        print(f"{key}: {h.n_qubits} qubits, {len(h)} terms, FCI {e_fci:.10f}, "
              f"sector {e_sector:.10f}, global {gs.energy:.10f}")


if __name__ == "__main__":
    main()
