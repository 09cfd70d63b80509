"""The five VQE strategies compared by the toolkit.

Every method starts from ``gaussian_init(sigma=0.01)`` and spends exactly
``cfg.max_iterations`` SPSA steps, split across stages where a method has
more than one.  Each stage restarts the gain schedule at k = 0 and draws its
perturbations from its own stream ``(method, "stage", index)``.

Two energy series are kept per run.  ``trace.energies`` holds what the
optimizer saw (the stage Hamiltonian); ``global_energies`` re-evaluates
every iterate on the full Hamiltonian so methods can be compared directly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .analysis import central_gradient, stability
from .ansatz import AnsatzCircuit, build_efficient_su2, build_mps, build_sea, energy, evaluate
from .errors import ConfigurationError
from .hamiltonian import PauliSum, extract_local, interpolate
from .optimizer import ConvergenceTrace, SpsaConfig, gaussian_init, spsa_minimize, write_trace_csv
from .rng import RNG_ID
from .statevector import GroundStateSolution, expectation, ground_state

__all__ = [
    "METHODS",
    "MethodResult",
    "StageRecord",
    "Metrics",
    "compute_metrics",
    "run_method",
    "run_standard",
    "run_local_global",
    "run_adiabatic",
    "run_sea",
    "run_pretrained",
    "scan_setup",
]

METHODS = ("standard", "local_global", "adiabatic", "sea", "pretrained")
INIT_SIGMA = 0.01
STABILITY_WINDOW = 20


@dataclass(frozen=True)
class Metrics:
    final_energy: float
    energy_error: float
    fidelity: float
    stability: float
    stability_window: int
    stability_short: bool


def compute_metrics(
    final_state: np.ndarray,
    h: PauliSum,
    reference: GroundStateSolution,
    energies,
    window: int = STABILITY_WINDOW,
) -> Metrics:
    """Energy error, ground-space fidelity and end-of-trace stability.

    Fidelity is the weight of ``final_state`` in the ground eigenspace, which
    is the usual squared overlap when the ground state is unique.  With no
    recorded energies stability is reported as 0 over a window of 0.
    """
    e_final = expectation(final_state, h)
    energies = np.asarray(energies, dtype=float)
    used = min(window, energies.size)
    stab = stability(energies, window) if energies.size else 0.0
    return Metrics(
        final_energy=e_final,
        energy_error=abs(e_final - reference.energy),
        fidelity=reference.overlap(final_state),
        stability=stab,
        stability_window=used,
        stability_short=energies.size < window,
    )


@dataclass(frozen=True)
class StageRecord:
    label: str
    ansatz: dict
    iterations: int
    initial_params: np.ndarray = field(repr=False)
    final_params: np.ndarray = field(repr=False)


@dataclass
class MethodResult:
    method: str
    trace: ConvergenceTrace
    global_energies: np.ndarray
    final_energy: float
    reference_energy: float
    energy_error: float
    fidelity: float
    stability: float
    stability_window: int
    stability_short: bool
    gradient_norm: float
    stage_boundaries: list[int]
    stages: list[StageRecord]
    circuit: AnsatzCircuit = field(repr=False)
    final_params: np.ndarray = field(repr=False)
    config: SpsaConfig = field(repr=False)
    knobs: dict = field(default_factory=dict)

    @property
    def n_params(self) -> int:
        return self.circuit.n_params

    def to_record(self, **extra) -> dict:
        """JSON-serializable summary.

        Wall time is left out so that identical runs give identical files.
        """
        return {
            "method": self.method,
            **extra,
            "final_energy": self.final_energy,
            "reference_energy": self.reference_energy,
            "energy_error": self.energy_error,
            "fidelity": self.fidelity,
            "stability": self.stability,
            "stability_window": self.stability_window,
            "stability_short_trace": self.stability_short,
            "gradient_norm": self.gradient_norm,
            "iterations": self.trace.iterations,
            "evaluations": self.trace.evaluations,
            "stage_boundaries": list(self.stage_boundaries),
            "stages": [
                {"label": s.label, "ansatz": s.ansatz, "iterations": s.iterations} for s in self.stages
            ],
            "ansatz": self.circuit.summary(),
            "knobs": dict(self.knobs),
            "spsa": self.config.to_dict(),
            "rng": RNG_ID,
            "final_params": [float(x) for x in self.final_params],
        }

    def export(self, directory: str | Path, molecule: str, layers: int, seed: int | None = None) -> tuple[Path, Path]:
        """Write ``<molecule>_<method>_<layers>L_<seed>.json`` and the matching trace CSV."""
        seed = self.config.seed if seed is None else seed
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        stem = f"{molecule}_{self.method}_{layers}L_{seed}"
        json_path, csv_path = directory / f"{stem}.json", directory / f"{stem}.csv"
        record = self.to_record(molecule=molecule, layers=layers, seed=seed)
        json_path.write_text(json.dumps(record, indent=2) + "\n", encoding="utf-8")
        write_trace_csv(self.trace.energies, csv_path, {"global_energy": self.global_energies})
        return json_path, csv_path


# ---------------------------------------------------------------------------
# stage runner
# ---------------------------------------------------------------------------


@dataclass
class _Stage:
    label: str
    circuit: AnsatzCircuit
    h: PauliSum
    iterations: int


def _run_stages(method, stages, theta0, h_full, cfg, transfer=None):
    """Run stages in order, warm-starting each from the previous optimum.

    ``transfer(prev_circuit, next_circuit, theta)`` maps parameters across a
    change of ansatz; without it the vector is passed through unchanged.
    """
    theta = np.asarray(theta0, dtype=float)
    energies, global_energies, records, boundaries = [], [], [], []
    evaluations, wall = 0, 0.0
    circuit = stages[0].circuit
    done = 0
    for index, stage in enumerate(stages):
        if stage.circuit is not circuit:
            theta = transfer(circuit, stage.circuit, theta) if transfer else theta
            circuit = stage.circuit
        if stage.iterations == 0:
            continue
        if done:
            boundaries.append(done)
        stage_h, stage_circuit = stage.h, stage.circuit
        trace = spsa_minimize(
            lambda t: energy(stage_circuit, t, stage_h),
            theta,
            cfg.with_budget(stage.iterations),
            stream=(method, "stage", index),
            observe=None if stage_h is h_full else (lambda t: energy(stage_circuit, t, h_full)),
        )
        energies.append(trace.energies)
        global_energies.append(trace.energies if trace.observed is None else trace.observed)
        records.append(StageRecord(stage.label, stage.circuit.summary(), stage.iterations, theta.copy(), trace.final_params))
        evaluations += trace.evaluations
        wall += trace.wall_time
        theta = trace.final_params
        done += stage.iterations
    trace = ConvergenceTrace(
        energies=np.concatenate(energies) if energies else np.empty(0),
        final_params=theta,
        wall_time=wall,
        evaluations=evaluations,
        initial_params=np.asarray(theta0, dtype=float),
    )
    glob = np.concatenate(global_energies) if global_energies else np.empty(0)
    return trace, glob, records, boundaries, circuit


def _finish(method, h, cfg, reference, stages, theta0, transfer=None, knobs=None, gradient_epsilon=1e-4):
    if sum(s.iterations for s in stages) != cfg.max_iterations:
        raise AssertionError("stage budgets must sum to the configured budget")
    if reference is None:
        reference = ground_state(h)
    trace, glob, records, boundaries, circuit = _run_stages(method, stages, theta0, h, cfg, transfer)
    state = evaluate(circuit, trace.final_params)
    metrics = compute_metrics(state, h, reference, glob)
    grad = central_gradient(circuit, h, trace.final_params, gradient_epsilon)
    return MethodResult(
        method=method,
        trace=trace,
        global_energies=glob,
        final_energy=metrics.final_energy,
        reference_energy=reference.energy,
        energy_error=metrics.energy_error,
        fidelity=metrics.fidelity,
        stability=metrics.stability,
        stability_window=metrics.stability_window,
        stability_short=metrics.stability_short,
        gradient_norm=float(np.linalg.norm(grad)),
        stage_boundaries=boundaries,
        stages=records,
        circuit=circuit,
        final_params=trace.final_params,
        config=cfg,
        knobs=knobs or {},
    )


def _check_split(split: float) -> None:
    if not 0.0 <= split <= 1.0:
        raise ConfigurationError(f"split must lie in [0, 1], got {split}")


def _local_part(h: PauliSum) -> PauliSum:
    local = extract_local(h)
    if all(term.is_identity for _, term in local.terms):
        raise ConfigurationError(
            "the Hamiltonian has no single-qubit or adjacent two-qubit terms to form a local stage"
        )
    return local


def _init(circuit: AnsatzCircuit, cfg: SpsaConfig, method: str) -> np.ndarray:
    return gaussian_init(circuit.n_params, INIT_SIGMA, cfg.seed, stream=("gaussian-init", method))


# ---------------------------------------------------------------------------
# methods
# ---------------------------------------------------------------------------


def run_standard(h: PauliSum, n_layers: int, cfg: SpsaConfig, reference: GroundStateSolution | None = None) -> MethodResult:
    circuit = build_efficient_su2(h.n_qubits, n_layers)
    stages = [_Stage("full", circuit, h, cfg.max_iterations)]
    return _finish("standard", h, cfg, reference, stages, _init(circuit, cfg, "standard"))


def run_sea(h: PauliSum, depth: int, cfg: SpsaConfig, reference: GroundStateSolution | None = None) -> MethodResult:
    circuit = build_sea(h.n_qubits, (depth, depth, depth))
    stages = [_Stage("full", circuit, h, cfg.max_iterations)]
    return _finish("sea", h, cfg, reference, stages, _init(circuit, cfg, "sea"))


def run_local_global(
    h: PauliSum,
    n_layers: int,
    cfg: SpsaConfig,
    split: float = 0.5,
    reference: GroundStateSolution | None = None,
) -> MethodResult:
    """Local-term warm-up for ``round(split * budget)`` steps, then the full Hamiltonian."""
    _check_split(split)
    local = _local_part(h)
    circuit = build_efficient_su2(h.n_qubits, n_layers)
    first = round(split * cfg.max_iterations)
    stages = [
        _Stage("local", circuit, local, first),
        _Stage("global", circuit, h, cfg.max_iterations - first),
    ]
    return _finish(
        "local_global", h, cfg, reference, stages, _init(circuit, cfg, "local_global"), knobs={"split": split}
    )


def adiabatic_stage_lengths(budget: int, n_steps: int) -> list[int]:
    """Equal shares of ``budget``; any remainder goes to the last stages."""
    base, extra = divmod(budget, n_steps)
    return [base + (1 if t >= n_steps - extra else 0) for t in range(n_steps)]


def run_adiabatic(
    h: PauliSum,
    n_layers: int,
    cfg: SpsaConfig,
    n_steps: int = 5,
    reference: GroundStateSolution | None = None,
) -> MethodResult:
    """Optimize H(s_t) = (1 - s_t) H_local + s_t H for s_t = t / n_steps, t = 1..n_steps."""
    if n_steps < 1:
        raise ConfigurationError(f"n_steps must be >= 1, got {n_steps}")
    local = _local_part(h)
    circuit = build_efficient_su2(h.n_qubits, n_layers)
    stages = []
    for t, length in enumerate(adiabatic_stage_lengths(cfg.max_iterations, n_steps), start=1):
        s = t / n_steps
        stage_h = h if t == n_steps else interpolate(local, h, s)
        stages.append(_Stage(f"s={s:g}", circuit, stage_h, length))
    return _finish(
        "adiabatic", h, cfg, reference, stages, _init(circuit, cfg, "adiabatic"), knobs={"n_steps": n_steps}
    )


def transfer_parameters(mps_params, n_full: int, seed: int) -> np.ndarray:
    """First min(d_mps, n_full) slots from the MPS optimum, the rest from N(0, 0.01^2)."""
    out = gaussian_init(n_full, INIT_SIGMA, seed, stream=("pretrained-fill",))
    m = min(len(mps_params), n_full)
    out[:m] = np.asarray(mps_params, dtype=float)[:m]
    return out


def run_pretrained(
    h: PauliSum,
    n_layers: int,
    cfg: SpsaConfig,
    split: float = 0.5,
    reference: GroundStateSolution | None = None,
) -> MethodResult:
    """MPS-circuit optimization on ``h``, then EfficientSU2 seeded with the MPS optimum."""
    _check_split(split)
    mps = build_mps(h.n_qubits, 2)
    full = build_efficient_su2(h.n_qubits, n_layers)
    first = round(split * cfg.max_iterations)
    second = cfg.max_iterations - first
    stages = [_Stage("mps", mps, h, first)]
    if second or split < 1.0:
        stages.append(_Stage("efficient_su2", full, h, second))

    def transfer(prev, nxt, theta):
        return transfer_parameters(theta, nxt.n_params, cfg.seed)

    return _finish(
        "pretrained", h, cfg, reference, stages, _init(mps, cfg, "pretrained"), transfer, knobs={"split": split}
    )


_RUNNERS = {
    "standard": lambda h, layers, cfg, ref, knobs: run_standard(h, layers, cfg, reference=ref),
    "sea": lambda h, layers, cfg, ref, knobs: run_sea(h, layers, cfg, reference=ref),
    "local_global": lambda h, layers, cfg, ref, knobs: run_local_global(
        h, layers, cfg, knobs.get("split", 0.5), reference=ref
    ),
    "adiabatic": lambda h, layers, cfg, ref, knobs: run_adiabatic(
        h, layers, cfg, knobs.get("n_steps", 5), reference=ref
    ),
    "pretrained": lambda h, layers, cfg, ref, knobs: run_pretrained(
        h, layers, cfg, knobs.get("split", 0.5), reference=ref
    ),
}


def run_method(
    method: str,
    h: PauliSum,
    layers: int,
    cfg: SpsaConfig,
    reference: GroundStateSolution | None = None,
    **knobs,
) -> MethodResult:
    try:
        runner = _RUNNERS[method]
    except KeyError:
        raise ConfigurationError(f"unknown method {method!r}; choose from {list(METHODS)}") from None
    unknown = set(knobs) - {"split", "n_steps"}
    if unknown:
        raise ConfigurationError(f"unknown method options {sorted(unknown)}")
    return runner(h, layers, cfg, reference, knobs)


def scan_setup(method: str, h: PauliSum, adiabatic_s: float = 0.5) -> tuple[str, PauliSum]:
    """(ansatz family, operator) whose gradient statistics stand for ``method``.

    Local-Global is scanned on the local operator it starts from, Adiabatic
    on the interpolated operator at ``adiabatic_s``; Standard and Pretrained
    share the EfficientSU2 circuit on the full Hamiltonian and differ only in
    their sub-seed stream.
    """
    if method in ("standard", "pretrained"):
        return "efficient_su2", h
    if method == "sea":
        return "sea", h
    if method == "local_global":
        return "efficient_su2", _local_part(h)
    if method == "adiabatic":
        return "efficient_su2", interpolate(_local_part(h), h, adiabatic_s)
    raise ConfigurationError(f"unknown method {method!r}; choose from {list(METHODS)}")
