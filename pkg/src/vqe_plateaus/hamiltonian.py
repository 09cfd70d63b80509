"""Pauli-string Hamiltonians: representation, file format, locality filtering.

A Hamiltonian is a real linear combination of Pauli strings,

    H = sum_i c_i P_i,   P_i in {I, X, Y, Z}^n.

Strings are written with the leftmost letter acting on qubit 0, and qubit 0
is the least-significant bit of a statevector index.  The file format is one
term per line, ``<coefficient> <letters>``, ``#`` starts a comment and blank
lines are ignored.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from functools import cached_property
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .errors import ConfigurationError, ParseError, ShapeError

__all__ = [
    "PauliString",
    "PauliSum",
    "parse_hamiltonian",
    "parse_hamiltonian_file",
    "format_hamiltonian",
    "write_hamiltonian",
    "extract_local",
    "interpolate",
    "builtin_hamiltonian",
    "bundled_names",
    "load_bundled",
    "load_hamiltonian",
    "bundled_manifest",
]

MERGE_TOLERANCE = 1e-14
_LETTERS = frozenset("IXYZ")
_I_POWERS = (1.0 + 0j, 1j, -1.0 + 0j, -1j)
_BUNDLED_PACKAGE = "vqe_plateaus.data.hamiltonians"


@dataclass(frozen=True)
class PauliString:
    """Tensor product of single-qubit Paulis; ``letters[q]`` acts on qubit ``q``."""

    letters: str

    def __post_init__(self):
        if not self.letters:
            raise ConfigurationError("a Pauli string needs at least one qubit")
        bad = set(self.letters) - _LETTERS
        if bad:
            raise ConfigurationError(f"invalid Pauli letters {sorted(bad)} in {self.letters!r}")

    @property
    def n_qubits(self) -> int:
        return len(self.letters)

    @property
    def support(self) -> tuple[int, ...]:
        """Indices of the qubits with a non-identity letter."""
        return tuple(q for q, p in enumerate(self.letters) if p != "I")

    @property
    def is_identity(self) -> bool:
        return not self.support

    @property
    def x_mask(self) -> int:
        """Bit mask of the qubits flipped by the string (X or Y)."""
        return sum(1 << q for q, p in enumerate(self.letters) if p in "XY")

    @property
    def z_mask(self) -> int:
        """Bit mask of the qubits picking up a sign (Z or Y)."""
        return sum(1 << q for q, p in enumerate(self.letters) if p in "YZ")

    @property
    def y_count(self) -> int:
        return self.letters.count("Y")

    @classmethod
    def identity(cls, n_qubits: int) -> "PauliString":
        return cls("I" * n_qubits)

    def __str__(self) -> str:
        return self.letters


class PauliSum:
    """Immutable weighted sum of Pauli strings over a fixed register.

    Terms with identical strings are merged on construction (first-appearance
    order is kept) and merged coefficients with magnitude below 1e-14 are
    dropped.
    """

    def __init__(self, n_qubits: int, terms: Iterable[tuple[float, PauliString | str]] = ()):
        if n_qubits < 1:
            raise ConfigurationError(f"n_qubits must be >= 1, got {n_qubits}")
        merged: dict[PauliString, float] = {}
        for coeff, string in terms:
            if isinstance(string, str):
                string = PauliString(string)
            if string.n_qubits != n_qubits:
                raise ShapeError(
                    f"Pauli string {string} has {string.n_qubits} qubits, expected {n_qubits}"
                )
            if isinstance(coeff, complex):
                if coeff.imag != 0.0:
                    raise ConfigurationError(f"coefficient of {string} is not real: {coeff}")
                coeff = coeff.real
            coeff = float(coeff)
            if not math.isfinite(coeff):
                raise ConfigurationError(f"coefficient of {string} is not finite: {coeff}")
            merged[string] = merged.get(string, 0.0) + coeff
        object.__setattr__(self, "n_qubits", int(n_qubits))
        object.__setattr__(
            self,
            "terms",
            tuple((c, s) for s, c in merged.items() if abs(c) >= MERGE_TOLERANCE),
        )

    def __setattr__(self, name, value):
        if name in ("n_qubits", "terms"):
            raise AttributeError("PauliSum is immutable")
        object.__setattr__(self, name, value)

    # -- container protocol -------------------------------------------------

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PauliSum):
            return NotImplemented
        return self.n_qubits == other.n_qubits and dict(
            (s, c) for c, s in self.terms
        ) == dict((s, c) for c, s in other.terms)

    def __hash__(self) -> int:
        return hash((self.n_qubits, frozenset((s, c) for c, s in self.terms)))

    def __repr__(self) -> str:
        body = ", ".join(f"{c:+g}*{s}" for c, s in self.terms[:6])
        more = ", ..." if len(self.terms) > 6 else ""
        return f"PauliSum(n_qubits={self.n_qubits}, [{body}{more}])"

    # -- algebra ------------------------------------------------------------

    def __add__(self, other: "PauliSum") -> "PauliSum":
        if not isinstance(other, PauliSum):
            return NotImplemented
        if other.n_qubits != self.n_qubits:
            raise ShapeError(f"cannot add {self.n_qubits}- and {other.n_qubits}-qubit sums")
        return PauliSum(self.n_qubits, self.terms + other.terms)

    def __mul__(self, scalar: float) -> "PauliSum":
        return PauliSum(self.n_qubits, ((scalar * c, s) for c, s in self.terms))

    __rmul__ = __mul__

    def coefficient(self, string: PauliString | str) -> float:
        """Coefficient of ``string`` (0.0 if absent)."""
        if isinstance(string, str):
            string = PauliString(string)
        for c, s in self.terms:
            if s == string:
                return c
        return 0.0

    @property
    def identity_coefficient(self) -> float:
        return self.coefficient(PauliString.identity(self.n_qubits))

    def one_norm(self, include_identity: bool = True) -> float:
        """Sum of |c_i|, an upper bound on the operator norm."""
        return sum(abs(c) for c, s in self.terms if include_identity or not s.is_identity)

    # -- compiled action ----------------------------------------------------

    @cached_property
    def flip_groups(self) -> tuple[tuple[int, np.ndarray], ...]:
        """Terms grouped by flip mask for matrix-free application.

        Each entry is ``(x_mask, diag)`` such that
        ``(H v)[k] = sum_g diag_g[k] * v[k ^ x_mask_g]``.
        """
        dim = 1 << self.n_qubits
        index = np.arange(dim, dtype=np.int64)
        groups: dict[int, np.ndarray] = {}
        for coeff, string in self.terms:
            x, z = string.x_mask, string.z_mask
            # P|b> = i^ny (-1)^popcount(b & z) |b ^ x>, read off at k = b ^ x
            parity = np.bitwise_count((index ^ x) & z) & 1
            phase = _I_POWERS[string.y_count % 4]
            contrib = coeff * phase * (1.0 - 2.0 * parity)
            if x in groups:
                groups[x] = groups[x] + contrib
            else:
                groups[x] = contrib.astype(np.complex128)
        return tuple(sorted(groups.items(), key=lambda item: item[0]))

    def to_dense(self) -> np.ndarray:
        """Dense matrix; only sensible for small registers (tests, oracles)."""
        if self.n_qubits > 12:
            raise ConfigurationError("refusing to build a dense matrix above 12 qubits")
        dim = 1 << self.n_qubits
        mat = np.zeros((dim, dim), dtype=np.complex128)
        index = np.arange(dim)
        for x, diag in self.flip_groups:
            mat[index, index ^ x] += diag
        return mat


# ---------------------------------------------------------------------------
# File format
# ---------------------------------------------------------------------------

_FLOAT_RE = re.compile(r"^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$")


def parse_hamiltonian(text: str) -> PauliSum:
    """Parse the plain-text term-per-line format into a merged ``PauliSum``."""
    terms: list[tuple[float, str]] = []
    n_qubits: int | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) != 2:
            raise ParseError(f"expected '<coefficient> <letters>', got {raw.strip()!r}", lineno)
        coeff_text, letters = fields
        if not _FLOAT_RE.match(coeff_text):
            raise ParseError(f"non-numeric coefficient {coeff_text!r}", lineno)
        coeff = float(coeff_text)
        if not math.isfinite(coeff):
            raise ParseError(f"coefficient {coeff_text!r} is not finite", lineno)
        letters = letters.upper()
        bad = set(letters) - _LETTERS
        if bad:
            raise ParseError(f"bad Pauli letter(s) {''.join(sorted(bad))!r} in {letters!r}", lineno)
        if n_qubits is None:
            n_qubits = len(letters)
        elif len(letters) != n_qubits:
            raise ParseError(
                f"string {letters!r} has {len(letters)} qubits, earlier terms have {n_qubits}",
                lineno,
            )
        terms.append((coeff, letters))
    if n_qubits is None:
        raise ParseError("no Hamiltonian terms found")
    return PauliSum(n_qubits, terms)


def parse_hamiltonian_file(path: str | Path) -> PauliSum:
    with open(path, encoding="utf-8") as fh:
        return parse_hamiltonian(fh.read())


def format_hamiltonian(h: PauliSum, header: str | None = None) -> str:
    """Serialize with shortest round-trip float formatting."""
    lines = []
    if header:
        lines.extend(f"# {row}" for row in header.splitlines())
    if not h.terms:
        # an all-zero sum still has to carry its register width
        lines.append(f"0.0 {'I' * h.n_qubits}")
    lines.extend(f"{c!r} {s}" for c, s in h.terms)
    return "\n".join(lines) + "\n"


def write_hamiltonian(h: PauliSum, path: str | Path, header: str | None = None) -> None:
    Path(path).write_text(format_hamiltonian(h, header), encoding="utf-8")


# ---------------------------------------------------------------------------
# Operations used by the mitigation methods
# ---------------------------------------------------------------------------


def _is_local(string: PauliString) -> bool:
    support = string.support
    if len(support) <= 1:
        return True
    return len(support) == 2 and support[1] - support[0] == 1


def extract_local(h: PauliSum) -> PauliSum:
    """Keep single-qubit terms, adjacent two-qubit terms and the identity."""
    return PauliSum(h.n_qubits, [(c, s) for c, s in h.terms if _is_local(s)])


def interpolate(h_local: PauliSum, h_global: PauliSum, s: float) -> PauliSum:
    """``(1 - s) * h_local + s * h_global`` merged term-wise."""
    if h_local.n_qubits != h_global.n_qubits:
        raise ShapeError(
            f"interpolating {h_local.n_qubits}- and {h_global.n_qubits}-qubit Hamiltonians"
        )
    if not 0.0 <= s <= 1.0:
        raise ConfigurationError(f"interpolation parameter must lie in [0, 1], got {s}")
    if s == 0.0:
        return h_local
    if s == 1.0:
        return h_global
    return PauliSum(
        h_local.n_qubits,
        [((1.0 - s) * c, p) for c, p in h_local.terms] + [(s * c, p) for c, p in h_global.terms],
    )


def _string_with(n: int, placements: Mapping[int, str]) -> str:
    letters = ["I"] * n
    for q, p in placements.items():
        letters[q] = p
    return "".join(letters)


def builtin_hamiltonian(name: str, n_qubits: int, params: Mapping[str, float] | None = None) -> PauliSum:
    """Lattice model fixtures on an open chain.

    ``transverse_field_ising``: ``-J sum Z_i Z_{i+1} - h sum X_i`` with
    defaults J=1, h=1.  Couplings come first (i ascending), then fields.

    ``heisenberg_xxz``: ``J sum (X_i X_{i+1} + Y_i Y_{i+1} + delta Z_i Z_{i+1})
    - h sum Z_i`` with defaults J=1, delta=1, h=0.  For each bond the XX, YY
    and ZZ terms appear in that order, fields last.
    """
    params = dict(params or {})
    if n_qubits < 1:
        raise ConfigurationError(f"n_qubits must be >= 1, got {n_qubits}")
    terms: list[tuple[float, str]] = []
    if name == "transverse_field_ising":
        unknown = set(params) - {"J", "h"}
        J = float(params.get("J", 1.0))
        field = float(params.get("h", 1.0))
        for i in range(n_qubits - 1):
            terms.append((-J, _string_with(n_qubits, {i: "Z", i + 1: "Z"})))
        for i in range(n_qubits):
            terms.append((-field, _string_with(n_qubits, {i: "X"})))
    elif name == "heisenberg_xxz":
        unknown = set(params) - {"J", "delta", "h"}
        J = float(params.get("J", 1.0))
        delta = float(params.get("delta", 1.0))
        field = float(params.get("h", 0.0))
        for i in range(n_qubits - 1):
            for p, scale in (("X", 1.0), ("Y", 1.0), ("Z", delta)):
                terms.append((J * scale, _string_with(n_qubits, {i: p, i + 1: p})))
        for i in range(n_qubits):
            terms.append((-field, _string_with(n_qubits, {i: "Z"})))
    else:
        raise ConfigurationError(
            f"unknown builtin Hamiltonian {name!r}; choose transverse_field_ising or heisenberg_xxz"
        )
    if unknown:
        raise ConfigurationError(f"unknown parameters for {name}: {sorted(unknown)}")
    return PauliSum(n_qubits, terms)


# ---------------------------------------------------------------------------
# Bundled data files
# ---------------------------------------------------------------------------


def _bundled_dir():
    return resources.files(_BUNDLED_PACKAGE)


def bundled_names() -> list[str]:
    """Names of the Hamiltonian files shipped with the package."""
    return sorted(
        entry.name[: -len(".txt")]
        for entry in _bundled_dir().iterdir()
        if entry.name.endswith(".txt")
    )


def bundled_path(name: str) -> Path:
    entry = _bundled_dir() / f"{name}.txt"
    if not entry.is_file():
        raise FileNotFoundError(f"no bundled Hamiltonian named {name!r}; have {bundled_names()}")
    return Path(str(entry))


def load_bundled(name: str) -> PauliSum:
    return parse_hamiltonian(bundled_path(name).read_text(encoding="utf-8"))


def bundled_manifest(name: str) -> dict:
    """Provenance sidecar of a bundled Hamiltonian (empty if none)."""
    import json

    entry = _bundled_dir() / f"{name}.json"
    if not entry.is_file():
        return {}
    return json.loads(entry.read_text(encoding="utf-8"))


def resolve_hamiltonian_path(spec: str | Path) -> Path:
    """Resolve a filesystem path, falling back to a bundled Hamiltonian name."""
    path = Path(spec)
    if path.is_file():
        return path
    if path.suffix == "" and str(spec) in bundled_names():
        return bundled_path(str(spec))
    raise FileNotFoundError(f"file not found: {spec}")


def load_hamiltonian(spec: str | Path) -> PauliSum:
    """Load a Hamiltonian from a path or a bundled name (e.g. ``"h2"``)."""
    return parse_hamiltonian_file(resolve_hamiltonian_path(spec))
