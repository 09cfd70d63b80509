"""SPSA minimization with power-law gain schedules.

At iteration k (0-based):

    a_k = a / (k + 1 + A) ** alpha        step size
    c_k = c / (k + 1) ** gamma            perturbation size
    g_k = (E(t + c_k D) - E(t - c_k D)) / (2 c_k D)
    t  <- t - a_k g_k

with D a vector of independent +/-1 signs drawn from the run's seeded stream.
"""

from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Callable

import numpy as np

from .errors import ConfigurationError, NumericalError
from .rng import RNG_ID, derive_rng

__all__ = [
    "SpsaConfig",
    "ConvergenceTrace",
    "default_spsa_config",
    "spsa_schedule",
    "spsa_minimize",
    "gaussian_init",
    "write_trace_csv",
    "read_trace_csv",
]


@dataclass(frozen=True)
class SpsaConfig:
    a: float = 0.1
    c: float = 0.1
    A: float = 0.0
    alpha: float = 0.602
    gamma: float = 0.101
    max_iterations: int = 1000
    seed: int = 42
    record_energy: bool = True

    def __post_init__(self):
        if not self.a > 0:
            raise ConfigurationError(f"a must be > 0, got {self.a}")
        if not self.c > 0:
            raise ConfigurationError(f"c must be > 0, got {self.c}")
        if not self.A >= 0:
            raise ConfigurationError(f"A must be >= 0, got {self.A}")
        if not 0.5 < self.alpha <= 1.0:
            raise ConfigurationError(f"alpha must lie in (0.5, 1], got {self.alpha}")
        if not 0.0 < self.gamma <= 0.5:
            raise ConfigurationError(f"gamma must lie in (0, 0.5], got {self.gamma}")
        # 0 is allowed so that a run can report its starting point only
        if self.max_iterations < 0:
            raise ConfigurationError(f"max_iterations must be >= 0, got {self.max_iterations}")
        if self.seed < 0:
            raise ConfigurationError(f"seed must be non-negative, got {self.seed}")

    def with_budget(self, iterations: int) -> "SpsaConfig":
        return replace(self, max_iterations=iterations)

    def to_dict(self) -> dict:
        return asdict(self)


def default_spsa_config(**overrides) -> SpsaConfig:
    """a=0.1, c=0.1, A=0, alpha=0.602, gamma=0.101, 1000 iterations, seed 42."""
    return SpsaConfig(**overrides)


def spsa_schedule(cfg: SpsaConfig, k: int) -> tuple[float, float]:
    """(a_k, c_k) for 0-based iteration ``k``."""
    return cfg.a / (k + 1 + cfg.A) ** cfg.alpha, cfg.c / (k + 1) ** cfg.gamma


@dataclass
class ConvergenceTrace:
    """History of one SPSA run.

    ``energies[k]`` is the objective at the iterate produced by step k, so
    the last entry is the energy of ``final_params``.
    """

    energies: np.ndarray
    final_params: np.ndarray
    wall_time: float = 0.0
    evaluations: int = 0
    initial_params: np.ndarray | None = field(default=None, repr=False)
    observed: np.ndarray | None = field(default=None, repr=False)

    @property
    def iterations(self) -> int:
        return len(self.energies)


def _finite(value: float, k: int, what: str) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise NumericalError(f"objective returned {value} for {what} at iteration {k}", iteration=k)
    return value


def spsa_minimize(
    objective: Callable[[np.ndarray], float],
    theta0,
    cfg: SpsaConfig,
    stream: tuple = ("spsa",),
    observe: Callable[[np.ndarray], float] | None = None,
) -> ConvergenceTrace:
    """Run ``cfg.max_iterations`` SPSA steps from ``theta0``.

    Perturbation signs come from ``derive_rng(cfg.seed, *stream)``; the trace
    is a pure function of ``(objective, theta0, cfg, stream)``.  With
    ``cfg.record_energy`` the objective is called three times per step,
    otherwise twice and the midpoint of the two probes is recorded instead.
    ``observe`` is evaluated on every iterate into ``trace.observed``; it does
    not count as an objective call.
    """
    theta = np.array(theta0, dtype=float, copy=True)
    if theta.ndim != 1 or not np.all(np.isfinite(theta)):
        raise ConfigurationError("theta0 must be a finite 1-D vector")
    initial = theta.copy()
    rng = derive_rng(cfg.seed, *stream)
    energies = np.empty(cfg.max_iterations)
    observed = np.empty(cfg.max_iterations) if observe is not None else None
    calls = 0
    start = time.perf_counter()
    for k in range(cfg.max_iterations):
        a_k, c_k = spsa_schedule(cfg, k)
        delta = rng.integers(0, 2, size=theta.shape[0]) * 2.0 - 1.0
        e_plus = _finite(objective(theta + c_k * delta), k, "E+")
        e_minus = _finite(objective(theta - c_k * delta), k, "E-")
        calls += 2
        g_hat = (e_plus - e_minus) / (2.0 * c_k * delta)
        theta = theta - a_k * g_hat
        if cfg.record_energy:
            energies[k] = _finite(objective(theta), k, "trace energy")
            calls += 1
        else:
            energies[k] = 0.5 * (e_plus + e_minus)
        if observed is not None:
            observed[k] = _finite(observe(theta), k, "observed energy")
    return ConvergenceTrace(
        energies=energies,
        final_params=theta,
        wall_time=time.perf_counter() - start,
        evaluations=calls,
        initial_params=initial,
        observed=observed,
    )


def gaussian_init(dim: int, sigma: float, seed: int, stream: tuple = ("gaussian-init",)) -> np.ndarray:
    """I.i.d. N(0, sigma^2) samples; sigma is a standard deviation."""
    if dim < 1:
        raise ConfigurationError(f"dim must be >= 1, got {dim}")
    if sigma < 0:
        raise ConfigurationError(f"sigma must be >= 0, got {sigma}")
    return sigma * derive_rng(seed, *stream).standard_normal(dim)


def write_trace_csv(energies, path: str | Path, extra: dict[str, np.ndarray] | None = None) -> None:
    """CSV with columns ``iteration,energy`` (plus any ``extra`` columns)."""
    extra = extra or {}
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["iteration", "energy", *extra])
        for k, e in enumerate(energies):
            writer.writerow([k, repr(float(e)), *(repr(float(col[k])) for col in extra.values())])


def read_trace_csv(path: str | Path) -> np.ndarray:
    with open(path, encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    return np.array([float(r["energy"]) for r in rows])


def run_manifest(cfg: SpsaConfig, wall_time: float, **extra) -> str:
    payload = {"spsa": cfg.to_dict(), "rng": RNG_ID, "wall_time_s": wall_time, **extra}
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"
