"""Statevector VQE toolkit for measuring and mitigating barren plateaus."""

__version__ = "0.1.0"

from .analysis import (
    GradientStats,
    LandscapeGrid,
    PlateauClassification,
    classify,
    finite_diff_gradient,
    gradient_scan,
    landscape_scan,
    parameter_shift_gradient,
    stability,
)
from .ansatz import (
    AnsatzCircuit,
    SeaDepthConfig,
    adjoint_gradient,
    build_circuit,
    build_efficient_su2,
    build_mps,
    build_sea,
    energy,
    evaluate,
)
from .errors import (
    ConfigurationError,
    NumericalError,
    ParseError,
    ShapeError,
    UndefinedRatioError,
    VqeError,
)
from .hamiltonian import (
    PauliString,
    PauliSum,
    builtin_hamiltonian,
    extract_local,
    interpolate,
    load_hamiltonian,
    parse_hamiltonian,
)
from .methods import (
    METHODS,
    MethodResult,
    compute_metrics,
    run_adiabatic,
    run_local_global,
    run_method,
    run_pretrained,
    run_sea,
    run_standard,
)
from .optimizer import ConvergenceTrace, SpsaConfig, default_spsa_config, gaussian_init, spsa_minimize
from .rng import RNG_ID, derive_rng
from .statevector import GroundStateSolution, expectation, fidelity, ground_state, zero_state
