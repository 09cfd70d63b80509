"""Dense statevector simulation.

A statevector is a 1-D ``complex128`` numpy array of length ``2**n``.  Qubit
``q`` is bit ``q`` of the amplitude index (qubit 0 is least significant), so
the basis state ``|q_{n-1} ... q_1 q_0>`` sits at index ``sum_q q_q 2**q``.

The public gate functions are pure and return new arrays.  The underscore
kernels mutate in place and are what the circuit evaluator uses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import ConfigurationError, NumericalError, ShapeError
from .hamiltonian import PauliSum
from .rng import derive_rng

__all__ = [
    "MAX_QUBITS",
    "GroundStateSolution",
    "zero_state",
    "basis_state",
    "num_qubits",
    "apply_ry",
    "apply_rz",
    "apply_cnot",
    "apply_pauli_sum",
    "expectation",
    "fidelity",
    "ground_state",
]

MAX_QUBITS = 24


def num_qubits(state: np.ndarray) -> int:
    """Register width of ``state``; raises ShapeError if the length is not 2**n."""
    size = state.shape[0] if state.ndim == 1 else -1
    if size < 2 or size & (size - 1):
        raise ShapeError(f"statevector length must be a power of two >= 2, got shape {state.shape}")
    return size.bit_length() - 1


def zero_state(n_qubits: int) -> np.ndarray:
    """|0...0> on ``n_qubits`` qubits."""
    if not 1 <= n_qubits <= MAX_QUBITS:
        raise ConfigurationError(f"n_qubits must be in [1, {MAX_QUBITS}], got {n_qubits}")
    state = np.zeros(1 << n_qubits, dtype=np.complex128)
    state[0] = 1.0
    return state


def basis_state(n_qubits: int, index: int) -> np.ndarray:
    state = np.zeros(1 << n_qubits, dtype=np.complex128)
    state[index] = 1.0
    return state


def _check_qubit(n: int, qubit: int) -> None:
    if not 0 <= qubit < n:
        raise IndexError(f"qubit {qubit} out of range for {n}-qubit register")


# ---------------------------------------------------------------------------
# in-place kernels
# ---------------------------------------------------------------------------


def _split(state: np.ndarray, n: int, qubit: int) -> np.ndarray:
    return state.reshape(1 << (n - qubit - 1), 2, 1 << qubit)


def _gate1_(state: np.ndarray, n: int, qubit: int, m00, m01, m10, m11) -> None:
    v = _split(state, n, qubit)
    a0 = v[:, 0, :].copy()
    a1 = v[:, 1, :]
    v[:, 0, :] = m00 * a0 + m01 * a1
    v[:, 1, :] = m10 * a0 + m11 * a1


def _ry_(state: np.ndarray, n: int, qubit: int, angle: float) -> None:
    c, s = math.cos(angle / 2), math.sin(angle / 2)
    _gate1_(state, n, qubit, c, -s, s, c)


def _rz_(state: np.ndarray, n: int, qubit: int, angle: float) -> None:
    v = _split(state, n, qubit)
    v[:, 0, :] *= complex(math.cos(angle / 2), -math.sin(angle / 2))
    v[:, 1, :] *= complex(math.cos(angle / 2), math.sin(angle / 2))


def _cnot_index(n: int, control: int, target: int):
    hi, lo = max(control, target), min(control, target)
    shape = (1 << (n - hi - 1), 2, 1 << (hi - lo - 1), 2, 1 << lo)
    # axis 1 carries bit `hi`, axis 3 carries bit `lo`
    if control == hi:
        on0 = (slice(None), 1, slice(None), 0, slice(None))
        on1 = (slice(None), 1, slice(None), 1, slice(None))
    else:
        on0 = (slice(None), 0, slice(None), 1, slice(None))
        on1 = (slice(None), 1, slice(None), 1, slice(None))
    return shape, on0, on1


def _cnot_(state: np.ndarray, n: int, control: int, target: int) -> None:
    shape, on0, on1 = _cnot_index(n, control, target)
    v = state.reshape(shape)
    tmp = v[on0].copy()
    v[on0] = v[on1]
    v[on1] = tmp


# ---------------------------------------------------------------------------
# public gates
# ---------------------------------------------------------------------------


def apply_ry(state: np.ndarray, qubit: int, angle: float) -> np.ndarray:
    """exp(-i angle Y / 2) on ``qubit``."""
    n = num_qubits(state)
    _check_qubit(n, qubit)
    out = np.array(state, dtype=np.complex128, copy=True)
    _ry_(out, n, qubit, angle)
    return out


def apply_rz(state: np.ndarray, qubit: int, angle: float) -> np.ndarray:
    """exp(-i angle Z / 2) on ``qubit``."""
    n = num_qubits(state)
    _check_qubit(n, qubit)
    out = np.array(state, dtype=np.complex128, copy=True)
    _rz_(out, n, qubit, angle)
    return out


def apply_cnot(state: np.ndarray, control: int, target: int) -> np.ndarray:
    n = num_qubits(state)
    _check_qubit(n, control)
    _check_qubit(n, target)
    if control == target:
        raise IndexError(f"CNOT control and target are both qubit {control}")
    out = np.array(state, dtype=np.complex128, copy=True)
    _cnot_(out, n, control, target)
    return out


# ---------------------------------------------------------------------------
# Hamiltonian action
# ---------------------------------------------------------------------------


def _check_dims(state: np.ndarray, h: PauliSum) -> None:
    if state.ndim != 1 or state.shape[0] != 1 << h.n_qubits:
        raise ShapeError(
            f"Hamiltonian acts on {h.n_qubits} qubits but vector has shape {state.shape}"
        )


def apply_pauli_sum(h: PauliSum, v: np.ndarray) -> np.ndarray:
    """H v without forming the matrix (terms grouped by flip mask)."""
    _check_dims(v, h)
    index = np.arange(v.shape[0])
    out = np.zeros(v.shape[0], dtype=np.complex128)
    for x, diag in h.flip_groups:
        if x == 0:
            out += diag * v
        else:
            out += diag * v[index ^ x]
    return out


def expectation(state: np.ndarray, h: PauliSum) -> float:
    """<psi|H|psi> for a normalized ``state``."""
    _check_dims(state, h)
    value = np.vdot(state, apply_pauli_sum(h, state))
    if abs(value.imag) > 1e-10 * max(1.0, abs(value.real)):
        raise NumericalError(f"expectation has imaginary part {value.imag:.3e}")
    return float(value.real)


def fidelity(a: np.ndarray, b: np.ndarray) -> float:
    """|<a|b>|^2."""
    if a.shape != b.shape:
        raise ShapeError(f"fidelity between shapes {a.shape} and {b.shape}")
    return float(abs(np.vdot(a, b)) ** 2)


# ---------------------------------------------------------------------------
# ground state
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GroundStateSolution:
    """Lowest eigenpair of a Hamiltonian.

    ``eigenspace`` holds an orthonormal basis (``state`` first) of every
    eigenvector found within ``degeneracy_tol`` of ``energy``.
    """

    energy: float
    state: np.ndarray
    residual_norm: float
    eigenspace: tuple[np.ndarray, ...] = field(default=(), repr=False)
    matvecs: int = 0

    @property
    def degeneracy(self) -> int:
        return max(1, len(self.eigenspace))

    def overlap(self, psi: np.ndarray) -> float:
        """Squared norm of the projection of ``psi`` onto the ground eigenspace."""
        basis = self.eigenspace or (self.state,)
        total = sum(abs(np.vdot(g, psi)) ** 2 for g in basis)
        return float(min(total, 1.0))


def _fix_phase(v: np.ndarray) -> np.ndarray:
    k = int(np.argmax(np.abs(v)))
    return v * (abs(v[k]) / v[k])


def _project_out(w: np.ndarray, basis) -> np.ndarray:
    for b in basis:
        w = w - np.vdot(b, w) * b
    return w


def _lanczos_lowest(h, dim, start, locked, krylov_dim, tol_rel, max_restarts):
    """Restarted Lanczos with full reorthogonalization, deflated against ``locked``."""
    m = min(krylov_dim, dim - len(locked))
    v = _project_out(start, locked)
    v /= np.linalg.norm(v)
    best = (math.inf, None, math.inf)
    matvecs = 0
    for _restart in range(max_restarts + 1):
        V = np.zeros((m, dim), dtype=np.complex128)
        alpha = np.zeros(m)
        beta = np.zeros(m)
        k = 0
        for j in range(m):
            V[j] = v
            w = apply_pauli_sum(h, v)
            matvecs += 1
            alpha[j] = np.vdot(v, w).real
            w = w - alpha[j] * v
            if j > 0:
                w = w - beta[j - 1] * V[j - 1]
            # two passes of classical Gram-Schmidt keep the basis orthogonal to working precision
            for _ in range(2):
                w = w - V[: j + 1].T @ (V[: j + 1].conj() @ w)
                w = _project_out(w, locked)
            k = j + 1
            b = np.linalg.norm(w)
            if b < 1e-13 * max(1.0, abs(alpha[j])):
                break
            beta[j] = b
            v = w / b
        if k == 1:
            evals, evecs = np.array([alpha[0]]), np.ones((1, 1))
        else:
            evals, evecs = eigh_tridiagonal(alpha[:k], beta[: k - 1], select="i", select_range=(0, 0))
        theta = float(evals[0])
        x = V[:k].T @ evecs[:, 0]
        x = _project_out(x, locked)
        x /= np.linalg.norm(x)
        resid = float(np.linalg.norm(apply_pauli_sum(h, x) - theta * x))
        matvecs += 1
        if resid < best[2]:
            best = (theta, x, resid)
        if resid < tol_rel * max(1.0, abs(theta)):
            return theta, x, resid, matvecs
        v = x
    raise NumericalError(
        f"Lanczos did not converge after {max_restarts} restarts (best residual {best[2]:.3e})",
        residual=best[2],
    )


def ground_state(
    h: PauliSum,
    seed: int = 0,
    krylov_dim: int = 120,
    tol: float = 1e-10,
    max_restarts: int = 60,
    degeneracy_tol: float = 1e-8,
    max_degeneracy: int = 32,
) -> GroundStateSolution:
    """Smallest eigenvalue and eigenvector(s) of ``h`` by matrix-free Lanczos.

    The starting vector is drawn from a seeded stream, so the result is
    deterministic for a given ``seed``.  After the lowest pair converges the
    search is repeated in the orthogonal complement to collect degenerate
    partners (eigenvalues within ``degeneracy_tol``), up to ``max_degeneracy``.
    """
    n = h.n_qubits
    if n > MAX_QUBITS:
        raise ConfigurationError(f"ground_state supports up to {MAX_QUBITS} qubits, got {n}")
    dim = 1 << n
    rng = derive_rng(seed, "ground-state-start")
    start = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    energy, state, resid, matvecs = _lanczos_lowest(h, dim, start, [], krylov_dim, tol, max_restarts)
    state = _fix_phase(state)
    eigenspace = [state]
    while len(eigenspace) < min(dim, max_degeneracy):
        start = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
        e_next, x_next, _, used = _lanczos_lowest(
            h, dim, start, eigenspace, krylov_dim, tol, max_restarts
        )
        matvecs += used
        if e_next - energy > degeneracy_tol:
            break
        eigenspace.append(_fix_phase(x_next))
    return GroundStateSolution(
        energy=energy,
        state=state,
        residual_norm=resid,
        eigenspace=tuple(eigenspace),
        matvecs=matvecs,
    )
