"""Parameterized circuit families and their evaluation.

Three builders produce :class:`AnsatzCircuit` programs over {RY, RZ, CNOT}:

* ``build_efficient_su2`` -- layers of (RY, RZ on every qubit, circular CNOTs)
  followed by one closing rotation layer; ``2nL + 2n`` parameters.
* ``build_sea`` -- d1 RY layers, sparse CNOTs, d2 RZ layers, cross CNOTs,
  d3 RY layers, half-register CNOTs; ``n(d1 + d2 + d3)`` parameters.
* ``build_mps`` -- RY/RZ on every qubit then forward and backward sweeps of
  nearest-neighbour blocks; ``2n + 2(n - 1) chi`` parameters with chi = 2.

Wires are 0-indexed.  Published descriptions that count qubits from 1 are
shifted down by one: "1 -> 2" becomes (0, 1), "1 -> 3" becomes (0, 2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .errors import ConfigurationError, ShapeError
from .hamiltonian import PauliSum
from .statevector import (
    _cnot_,
    _gate1_,
    _ry_,
    _rz_,
    _split,
    apply_pauli_sum,
    expectation,
    zero_state,
)

__all__ = [
    "Gate",
    "AnsatzCircuit",
    "SeaDepthConfig",
    "build_efficient_su2",
    "build_sea",
    "build_mps",
    "build_circuit",
    "evaluate",
    "energy",
    "adjoint_gradient",
    "ANSATZ_FAMILIES",
]

RY, RZ, CNOT = "RY", "RZ", "CNOT"


class Gate(NamedTuple):
    kind: str
    wires: tuple[int, ...]
    param: int | None = None
    block: str = ""


@dataclass(frozen=True)
class AnsatzCircuit:
    """Ordered gate program; parameter slots are filled from a flat vector."""

    name: str
    n_qubits: int
    gates: tuple[Gate, ...]
    n_params: int
    config: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        used = set()
        for g in self.gates:
            if any(not 0 <= w < self.n_qubits for w in g.wires):
                raise ConfigurationError(f"gate {g} addresses a wire outside {self.n_qubits} qubits")
            if g.kind == CNOT:
                if len(g.wires) != 2 or g.wires[0] == g.wires[1] or g.param is not None:
                    raise ConfigurationError(f"malformed CNOT {g}")
            elif g.kind in (RY, RZ):
                if len(g.wires) != 1 or g.param is None:
                    raise ConfigurationError(f"malformed rotation {g}")
                used.add(g.param)
            else:
                raise ConfigurationError(f"unsupported gate kind {g.kind!r}")
        if used != set(range(self.n_params)):
            raise ConfigurationError("parameter slots must cover 0..n_params-1 without gaps")

    @property
    def n_cnots(self) -> int:
        return sum(g.kind == CNOT for g in self.gates)

    def cnot_pairs(self, block: str | None = None) -> list[tuple[int, int]]:
        """(control, target) of every CNOT, optionally restricted to one block."""
        return [g.wires for g in self.gates if g.kind == CNOT and (block is None or g.block == block)]

    def summary(self) -> dict:
        return {
            "builder": self.name,
            "n_qubits": self.n_qubits,
            "config": dict(self.config),
            "n_params": self.n_params,
            "n_gates": len(self.gates),
            "n_cnots": self.n_cnots,
        }


class _Builder:
    def __init__(self, n_qubits: int):
        self.n = n_qubits
        self.gates: list[Gate] = []
        self.next_param = 0

    def rot(self, kind: str, q: int, block: str) -> None:
        self.gates.append(Gate(kind, (q,), self.next_param, block))
        self.next_param += 1

    def layer(self, kinds: Sequence[str], block: str) -> None:
        for q in range(self.n):
            for kind in kinds:
                self.rot(kind, q, block)

    def cnot(self, control: int, target: int, block: str) -> None:
        self.gates.append(Gate(CNOT, (control, target), None, block))

    def done(self, name: str, **config) -> AnsatzCircuit:
        return AnsatzCircuit(name, self.n, tuple(self.gates), self.next_param, config)


def build_efficient_su2(n_qubits: int, layers: int) -> AnsatzCircuit:
    if n_qubits < 2:
        raise ConfigurationError(f"EfficientSU2 needs at least 2 qubits, got {n_qubits}")
    if layers < 0:
        raise ConfigurationError(f"layers must be >= 0, got {layers}")
    b = _Builder(n_qubits)
    for layer in range(layers):
        b.layer((RY, RZ), f"rot{layer}")
        for i in range(n_qubits):
            b.cnot(i, (i + 1) % n_qubits, f"ent{layer}")
    b.layer((RY, RZ), "final")
    return b.done("efficient_su2", layers=layers)


@dataclass(frozen=True)
class SeaDepthConfig:
    d1: int
    d2: int
    d3: int

    def __post_init__(self):
        if min(self.d1, self.d2, self.d3) < 0:
            raise ConfigurationError(f"SEA depths must be non-negative, got {self}")
        if self.d1 + self.d2 + self.d3 == 0:
            raise ConfigurationError("at least one SEA section needs a rotation layer")

    @classmethod
    def uniform(cls, depth: int) -> "SeaDepthConfig":
        return cls(depth, depth, depth)


def sea_entanglers(n_qubits: int) -> dict[str, list[tuple[int, int]]]:
    """CNOT lists of the three SEA entangling stages (0-indexed wires)."""
    half = n_qubits // 2
    return {
        "sparse": [(i, i + 1) for i in range(0, n_qubits - 1, 2)],
        "cross": [(i, i + 2) for i in range(0, n_qubits - 2, 2)],
        "full": [(i, i + half) for i in range(math.ceil(n_qubits / 2)) if i + half < n_qubits],
    }


def build_sea(n_qubits: int, cfg: SeaDepthConfig | Sequence[int]) -> AnsatzCircuit:
    if n_qubits < 2:
        raise ConfigurationError(f"SEA needs at least 2 qubits, got {n_qubits}")
    if not isinstance(cfg, SeaDepthConfig):
        cfg = SeaDepthConfig(*cfg)
    ent = sea_entanglers(n_qubits)
    b = _Builder(n_qubits)
    for d in range(cfg.d1):
        b.layer((RY,), f"sec1.{d}")
    for c, t in ent["sparse"]:
        b.cnot(c, t, "sparse")
    for d in range(cfg.d2):
        b.layer((RZ,), f"sec2.{d}")
    for c, t in ent["cross"]:
        b.cnot(c, t, "cross")
    for d in range(cfg.d3):
        b.layer((RY,), f"sec3.{d}")
    for c, t in ent["full"]:
        b.cnot(c, t, "full")
    return b.done("sea", depths=[cfg.d1, cfg.d2, cfg.d3])


def build_mps(n_qubits: int, bond_dim: int = 2) -> AnsatzCircuit:
    """Each two-qubit block is CNOT(i,i+1) RY(a on i) RY(b on i+1) CNOT(i,i+1)."""
    if bond_dim != 2:
        raise ConfigurationError(f"only bond dimension 2 is supported, got {bond_dim}")
    if n_qubits < 2:
        raise ConfigurationError(f"MPS ansatz needs at least 2 qubits, got {n_qubits}")
    b = _Builder(n_qubits)
    b.layer((RY, RZ), "init")
    sweep = list(range(n_qubits - 1))
    for direction, order in (("forward", sweep), ("backward", sweep[::-1])):
        for i in order:
            b.cnot(i, i + 1, direction)
            b.rot(RY, i, direction)
            b.rot(RY, i + 1, direction)
            b.cnot(i, i + 1, direction)
    return b.done("mps", bond_dim=bond_dim)


ANSATZ_FAMILIES: dict[str, Callable[[int, int], AnsatzCircuit]] = {
    "efficient_su2": build_efficient_su2,
    "sea": lambda n, depth: build_sea(n, SeaDepthConfig.uniform(depth)),
    "mps": lambda n, depth: build_mps(n, 2),
}


def build_circuit(family: str, n_qubits: int, depth: int) -> AnsatzCircuit:
    """Dispatch by family name; SEA depth L means [L, L, L], MPS ignores depth."""
    try:
        builder = ANSATZ_FAMILIES[family]
    except KeyError:
        raise ConfigurationError(
            f"unknown ansatz family {family!r}; choose from {sorted(ANSATZ_FAMILIES)}"
        ) from None
    return builder(n_qubits, depth)


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------


def _check_params(circuit: AnsatzCircuit, params) -> np.ndarray:
    params = np.asarray(params, dtype=float)
    if params.shape != (circuit.n_params,):
        raise ShapeError(f"{circuit.name} expects {circuit.n_params} parameters, got shape {params.shape}")
    return params


def _matrix(kind: str, angle: float):
    c, s = math.cos(angle / 2), math.sin(angle / 2)
    if kind == RY:
        return (c, -s, s, c)
    return (complex(c, -s), 0.0, 0.0, complex(c, s))


def _compose(a, b):
    """Matrix product a @ b of row-major 2x2 tuples."""
    return (
        a[0] * b[0] + a[1] * b[2],
        a[0] * b[1] + a[1] * b[3],
        a[2] * b[0] + a[3] * b[2],
        a[2] * b[1] + a[3] * b[3],
    )


def evaluate(circuit: AnsatzCircuit, params) -> np.ndarray:
    """U(theta)|0...0>.

    Runs of single-qubit rotations on a wire are multiplied into one 2x2
    matrix before touching the statevector; a CNOT flushes its two wires.
    """
    params = _check_params(circuit, params)
    n = circuit.n_qubits
    psi = zero_state(n)
    pending: list = [None] * n

    def flush(q):
        m = pending[q]
        if m is not None:
            _gate1_(psi, n, q, *m)
            pending[q] = None

    for g in circuit.gates:
        if g.kind == CNOT:
            c, t = g.wires
            flush(c)
            flush(t)
            _cnot_(psi, n, c, t)
        else:
            q = g.wires[0]
            m = _matrix(g.kind, params[g.param])
            pending[q] = m if pending[q] is None else _compose(m, pending[q])
    for q in range(n):
        flush(q)
    return psi


def energy(circuit: AnsatzCircuit, params, h: PauliSum) -> float:
    """<psi(theta)|H|psi(theta)>."""
    if h.n_qubits != circuit.n_qubits:
        raise ShapeError(f"circuit has {circuit.n_qubits} qubits, Hamiltonian {h.n_qubits}")
    return expectation(evaluate(circuit, params), h)


def adjoint_gradient(circuit: AnsatzCircuit, params, h: PauliSum) -> np.ndarray:
    """Exact dE/dtheta by one forward and one backward sweep.

    For a rotation exp(-i t P/2) the derivative contribution at the gate is
    Im <lambda|P|psi>, with psi the state just after the gate and lambda the
    back-propagated H psi.
    """
    params = _check_params(circuit, params)
    if h.n_qubits != circuit.n_qubits:
        raise ShapeError(f"circuit has {circuit.n_qubits} qubits, Hamiltonian {h.n_qubits}")
    n = circuit.n_qubits
    psi = evaluate(circuit, params)
    lam = apply_pauli_sum(h, psi)
    grad = np.zeros(circuit.n_params)
    for g in reversed(circuit.gates):
        if g.kind == CNOT:
            _cnot_(psi, n, *g.wires)
            _cnot_(lam, n, *g.wires)
            continue
        q = g.wires[0]
        p, l = _split(psi, n, q), _split(lam, n, q)
        if g.kind == RY:
            grad[g.param] += (np.vdot(l[:, 1, :], p[:, 0, :]) - np.vdot(l[:, 0, :], p[:, 1, :])).real
            _ry_(psi, n, q, -params[g.param])
            _ry_(lam, n, q, -params[g.param])
        else:
            grad[g.param] += (np.vdot(l[:, 0, :], p[:, 0, :]) - np.vdot(l[:, 1, :], p[:, 1, :])).imag
            _rz_(psi, n, q, -params[g.param])
            _rz_(lam, n, q, -params[g.param])
    return grad
