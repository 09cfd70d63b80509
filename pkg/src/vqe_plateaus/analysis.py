"""Gradient statistics, plateau classification, landscapes and stability.

Gradients here are central differences with step ``epsilon``:

    g_j = (E(t + eps e_j) - E(t - eps e_j)) / (2 eps)

Every parameter of the supported circuits enters through a single rotation
exp(-i t P / 2), so E is a + b cos t_j + c sin t_j along each coordinate and
the central difference equals ``sin(eps) / eps`` times the exact derivative.
``method="adjoint"`` uses that identity to obtain the same numbers from one
adjoint sweep instead of ``2d`` energy evaluations.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .ansatz import AnsatzCircuit, adjoint_gradient, build_circuit, energy
from .errors import ConfigurationError, NumericalError, ShapeError, UndefinedRatioError
from .hamiltonian import PauliSum
from .rng import derive_int_seed, derive_rng

log = logging.getLogger(__name__)

__all__ = [
    "GradientStats",
    "PlateauClassification",
    "LandscapeGrid",
    "finite_diff_gradient",
    "parameter_shift_gradient",
    "central_gradient",
    "gradient_scan",
    "classify",
    "classify_ratio",
    "landscape_scan",
    "scan_grid",
    "stability",
    "DEFAULT_DEPTHS",
]

DEFAULT_DEPTHS = (1, 2, 5, 10, 20, 50)
DEFAULT_EPSILON = 1e-4

GRADIENT_MAINTAINED = "gradient_maintained"
MODERATE_PLATEAU = "moderate_plateau"
STRONG_PLATEAU = "strong_plateau"
LABEL_DISPLAY = {
    GRADIENT_MAINTAINED: "Grad. Maintained",
    MODERATE_PLATEAU: "Mod. Plateau",
    STRONG_PLATEAU: "Strong Plateau",
}


# ---------------------------------------------------------------------------
# gradients
# ---------------------------------------------------------------------------


def _checked_energy(circuit, theta, h):
    value = energy(circuit, theta, h)
    if not math.isfinite(value):
        raise NumericalError(f"non-finite energy {value}")
    return value


def finite_diff_gradient(
    circuit: AnsatzCircuit, h: PauliSum, theta, epsilon: float = DEFAULT_EPSILON
) -> np.ndarray:
    """Central differences, two energy evaluations per component."""
    if not epsilon > 0:
        raise ConfigurationError(f"epsilon must be > 0, got {epsilon}")
    theta = np.asarray(theta, dtype=float)
    grad = np.empty(theta.shape[0])
    shifted = theta.copy()
    for j in range(theta.shape[0]):
        shifted[j] = theta[j] + epsilon
        e_plus = _checked_energy(circuit, shifted, h)
        shifted[j] = theta[j] - epsilon
        e_minus = _checked_energy(circuit, shifted, h)
        shifted[j] = theta[j]
        grad[j] = (e_plus - e_minus) / (2.0 * epsilon)
    return grad


def parameter_shift_gradient(circuit: AnsatzCircuit, h: PauliSum, theta) -> np.ndarray:
    """Exact derivative via the +/- pi/2 shift rule."""
    theta = np.asarray(theta, dtype=float)
    grad = np.empty(theta.shape[0])
    shifted = theta.copy()
    for j in range(theta.shape[0]):
        shifted[j] = theta[j] + math.pi / 2
        e_plus = _checked_energy(circuit, shifted, h)
        shifted[j] = theta[j] - math.pi / 2
        e_minus = _checked_energy(circuit, shifted, h)
        shifted[j] = theta[j]
        grad[j] = 0.5 * (e_plus - e_minus)
    return grad


def central_gradient(
    circuit: AnsatzCircuit,
    h: PauliSum,
    theta,
    epsilon: float = DEFAULT_EPSILON,
    method: str = "adjoint",
) -> np.ndarray:
    """Central-difference gradient by explicit differencing or the adjoint identity."""
    if method == "finite_difference":
        return finite_diff_gradient(circuit, h, theta, epsilon)
    if method != "adjoint":
        raise ConfigurationError(f"unknown gradient method {method!r}")
    if not epsilon > 0:
        raise ConfigurationError(f"epsilon must be > 0, got {epsilon}")
    grad = adjoint_gradient(circuit, theta, h) * (math.sin(epsilon) / epsilon)
    if not np.all(np.isfinite(grad)):
        raise NumericalError("non-finite gradient component")
    return grad


# ---------------------------------------------------------------------------
# gradient statistics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GradientStats:
    depth: int
    sample_count: int
    mean_norm: float
    variance_of_norms: float
    per_sample_norms: np.ndarray = field(repr=False)
    n_params: int = 0
    sub_seed: int | None = None

    @classmethod
    def from_norms(cls, depth: int, norms, n_params: int = 0, sub_seed: int | None = None):
        norms = np.asarray(norms, dtype=float)
        mean = float(norms.mean())
        # population variance: divide by N, not N - 1
        variance = float(np.mean((norms - mean) ** 2))
        return cls(depth, int(norms.shape[0]), mean, variance, norms, n_params, sub_seed)


def _uniform_sampler(rng: np.random.Generator, dim: int) -> np.ndarray:
    return rng.uniform(0.0, 2.0 * math.pi, size=dim)


def gradient_scan(
    builder: str | Callable[[int], AnsatzCircuit],
    h: PauliSum,
    depths: Sequence[int] = DEFAULT_DEPTHS,
    n_samples: int = 100,
    seed: int = 42,
    epsilon: float = DEFAULT_EPSILON,
    method: str = "adjoint",
    subsample: int | None = None,
    label: str = "",
    sampler: Callable[[np.random.Generator, int], np.ndarray] = _uniform_sampler,
) -> list[GradientStats]:
    """Gradient-norm distribution at random parameters, one entry per depth.

    Each depth draws its samples from its own stream keyed by
    ``(seed, "grad-scan", label, depth)``, so adding or removing depths leaves
    the others untouched.  ``subsample=m`` differentiates only ``m`` random
    components per sample and rescales the squared norm by ``d/m``; it only
    applies to ``method="finite_difference"`` and is off by default.
    """
    if n_samples < 2:
        raise ConfigurationError(f"n_samples must be >= 2, got {n_samples}")
    if isinstance(builder, str):
        family = builder
        builder = lambda depth: build_circuit(family, h.n_qubits, depth)  # noqa: E731
    # a constant offset cannot move any gradient; dropping it keeps flat landscapes exactly flat
    h = PauliSum(h.n_qubits, [(c, s) for c, s in h.terms if not s.is_identity])
    results = []
    for depth in depths:
        circuit = builder(depth)
        if circuit.n_qubits != h.n_qubits:
            raise ShapeError(f"circuit has {circuit.n_qubits} qubits, Hamiltonian {h.n_qubits}")
        rng = derive_rng(seed, "grad-scan", label, depth)
        norms = np.empty(n_samples)
        for i in range(n_samples):
            theta = sampler(rng, circuit.n_params)
            if subsample is not None and method == "finite_difference" and subsample < circuit.n_params:
                idx = np.sort(rng.choice(circuit.n_params, size=subsample, replace=False))
                norms[i] = _subsampled_norm(circuit, h, theta, epsilon, idx)
            else:
                norms[i] = float(np.linalg.norm(central_gradient(circuit, h, theta, epsilon, method)))
        results.append(
            GradientStats.from_norms(
                depth, norms, circuit.n_params, derive_int_seed(seed, "grad-scan", label, depth)
            )
        )
        log.debug("grad-scan %s depth=%d var=%.4g", label, depth, results[-1].variance_of_norms)
    return results


def _subsampled_norm(circuit, h, theta, epsilon, idx) -> float:
    shifted = np.array(theta, dtype=float)
    total = 0.0
    for j in idx:
        base = shifted[j]
        shifted[j] = base + epsilon
        e_plus = _checked_energy(circuit, shifted, h)
        shifted[j] = base - epsilon
        e_minus = _checked_energy(circuit, shifted, h)
        shifted[j] = base
        total += ((e_plus - e_minus) / (2 * epsilon)) ** 2
    return math.sqrt(total * circuit.n_params / len(idx))


def write_gradient_stats_csv(stats: Sequence[GradientStats], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["depth", "mean_norm", "variance", "n_samples"])
        for s in stats:
            writer.writerow([s.depth, repr(s.mean_norm), repr(s.variance_of_norms), s.sample_count])


# ---------------------------------------------------------------------------
# classification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PlateauClassification:
    ratio: float
    label: str

    @property
    def display(self) -> str:
        return LABEL_DISPLAY[self.label]


def classify_ratio(ratio: float) -> PlateauClassification:
    if ratio >= 0.5:
        label = GRADIENT_MAINTAINED
    elif ratio >= 0.01:
        label = MODERATE_PLATEAU
    else:
        label = STRONG_PLATEAU
    return PlateauClassification(float(ratio), label)


def classify(stats_shallow, stats_deep) -> PlateauClassification:
    """Ratio of deep to shallow gradient-norm variance and its regime.

    Accepts :class:`GradientStats` or bare variances.
    """
    v_shallow = getattr(stats_shallow, "variance_of_norms", stats_shallow)
    v_deep = getattr(stats_deep, "variance_of_norms", stats_deep)
    if not v_shallow > 0:
        raise UndefinedRatioError(
            f"baseline gradient variance is {v_shallow}; the variance ratio is undefined"
        )
    return classify_ratio(v_deep / v_shallow)


# ---------------------------------------------------------------------------
# landscapes
# ---------------------------------------------------------------------------


@dataclass
class LandscapeGrid:
    center: np.ndarray
    directions: tuple[np.ndarray, np.ndarray]
    half_range: float
    resolution: int
    energies: np.ndarray
    center_energy: float = math.nan
    center_value: float = math.nan
    center_tolerance: float = math.nan

    @property
    def axis(self) -> np.ndarray:
        return np.linspace(-self.half_range, self.half_range, self.resolution)

    @property
    def center_deviation(self) -> float:
        return abs(self.center_value - self.center_energy)

    @property
    def center_consistent(self) -> bool:
        return self.center_deviation <= self.center_tolerance

    def rows(self):
        """(i, j, x, y, energy) for every cell, row-major in i."""
        axis = self.axis
        for i in range(self.resolution):
            for j in range(self.resolution):
                yield i, j, float(axis[i]), float(axis[j]), float(self.energies[i, j])

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["i", "j", "x", "y", "energy"])
            for i, j, x, y, e in self.rows():
                writer.writerow([i, j, repr(x), repr(y), repr(e)])


def _directions(mode: str, dim: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    if dim < 2:
        raise ShapeError(f"a 2-D landscape needs at least 2 parameters, got {dim}")
    if mode == "first_two_coords":
        u, v = np.zeros(dim), np.zeros(dim)
        u[0], v[1] = 1.0, 1.0
        return u, v
    if mode == "random_orthonormal":
        rng = derive_rng(seed, "landscape-directions")
        u = rng.standard_normal(dim)
        u /= np.linalg.norm(u)
        v = rng.standard_normal(dim)
        for _ in range(2):
            v -= np.dot(u, v) * u
        v /= np.linalg.norm(v)
        return u, v
    raise ConfigurationError(f"unknown direction mode {mode!r}")


def scan_grid(objective: Callable[[np.ndarray], float], center, u, v, half_range: float, resolution: int) -> np.ndarray:
    """objective(center + x u + y v) over a uniform ``resolution`` x ``resolution`` grid."""
    if resolution < 2:
        raise ConfigurationError(f"resolution must be >= 2, got {resolution}")
    if half_range < 0:
        raise ConfigurationError(f"half_range must be >= 0, got {half_range}")
    center = np.asarray(center, dtype=float)
    axis = np.linspace(-half_range, half_range, resolution)
    out = np.empty((resolution, resolution))
    for i, x in enumerate(axis):
        row = center + x * u
        for j, y in enumerate(axis):
            out[i, j] = objective(row + y * v)
    return out


def landscape_scan(
    circuit: AnsatzCircuit,
    h: PauliSum,
    theta_star,
    half_range: float = 0.4,
    resolution: int = 100,
    direction_mode: str = "first_two_coords",
    seed: int = 42,
) -> LandscapeGrid:
    """Energy on a 2-D slice through ``theta_star``.

    The centre check compares E(theta_star) with the middle cell (odd
    resolution, tolerance 1e-10) or with the mean of the four middle cells
    (even resolution).  In the even case the first-order terms cancel and the
    tolerance is the curvature bound 2 s^2 ||H'||_1, where s is half the
    grid spacing times (|u|_1 + |v|_1) / 2 and H' drops the identity term.
    """
    theta_star = np.asarray(theta_star, dtype=float)
    if theta_star.shape != (circuit.n_params,):
        raise ShapeError(
            f"centre has {theta_star.shape[0] if theta_star.ndim else 0} entries, "
            f"ansatz has {circuit.n_params} parameters"
        )
    if half_range == 0:
        log.warning("landscape half-range is 0; every cell is the centre energy")
    u, v = _directions(direction_mode, circuit.n_params, seed)
    grid = scan_grid(lambda t: energy(circuit, t, h), theta_star, u, v, half_range, resolution)
    e_star = energy(circuit, theta_star, h)
    mid = resolution // 2
    if resolution % 2:
        value = float(grid[mid, mid])
        tol = 1e-10
    else:
        value = float(grid[mid - 1 : mid + 1, mid - 1 : mid + 1].mean())
        spacing = 2.0 * half_range / (resolution - 1)
        s = 0.5 * spacing * (np.abs(u).sum() + np.abs(v).sum()) / 2.0
        tol = 2.0 * s * s * h.one_norm(include_identity=False) + 1e-10
    return LandscapeGrid(theta_star, (u, v), half_range, resolution, grid, e_star, value, tol)


# ---------------------------------------------------------------------------
# stability
# ---------------------------------------------------------------------------


def stability(trace, window: int = 20) -> float:
    """Population standard deviation of the last ``min(window, len)`` energies."""
    if window < 1:
        raise ConfigurationError(f"window must be >= 1, got {window}")
    energies = np.asarray(getattr(trace, "energies", trace), dtype=float)
    if energies.size == 0:
        raise ConfigurationError("stability of an empty trace is undefined")
    if energies.size < window:
        log.info("trace has %d energies, fewer than the %d-step window", energies.size, window)
    tail = energies[-window:]
    # shifting by one sample changes nothing mathematically but makes a constant tail exactly 0
    return float(np.std(tail - tail[0]))
