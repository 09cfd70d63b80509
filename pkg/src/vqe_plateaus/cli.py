"""Command-line interface: ``vqe-plateaus <subcommand> [options]``.

Exit status is 0 on success, 1 on a numerical or convergence failure (or a
failed campaign cell) and 2 on a usage or configuration error.

Every subcommand accepts ``--config FILE``, a JSON object whose keys are
flag names with dashes replaced by underscores.  An explicit flag beats the
file, and the file beats the built-in default.  For ``campaign`` and
``report`` the file is the campaign definition itself.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import NumericalError, ParseError, VqeError
from .rng import RNG_ID

log = logging.getLogger("vqe_plateaus")

OUTPUT_ENV = "VQE_PLATEAUS_OUTPUT"
LOW_SAMPLE_WARNING = 10

DEFAULTS = {
    "seed": 42,
    "output": None,  # resolved from the environment at run time
    "jobs": None,  # resolved to the CPU count at run time
    "hamiltonian": None,
    "state_format": "npy",
    "method": "standard",
    "layers": 30,
    "iterations": 1000,
    "split": 0.5,
    "n_steps": 5,
    "depths": "1,2,5,10,20,50",
    "samples": 100,
    "epsilon": 1e-4,
    "gradient": "adjoint",
    "center": "zero",
    "range": 0.4,
    "resolution": 100,
    "directions": "first_two_coords",
    "figure": True,
}


class UsageError(Exception):
    """Bad invocation detected after argument parsing."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(2, f"{self.prog}: error: {message}\n")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, help="master seed for every random stream (default 42)")
    p.add_argument(
        "--output", help=f"output directory (default ${OUTPUT_ENV} or ./vqe-output)"
    )
    p.add_argument("--jobs", type=int, help="worker processes (default: available cores)")
    p.add_argument("--config", help="JSON file of option values; explicit flags take precedence")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to standard error")


def _hamiltonian_arg(p: argparse.ArgumentParser) -> None:
    p.add_argument("--hamiltonian", help="Hamiltonian file or bundled name (h2, lih, beh2, tfim_2, ...)")


def _method_arg(p: argparse.ArgumentParser) -> None:
    p.add_argument("--method", help="standard, local_global, adiabatic, sea or pretrained")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="vqe-plateaus", description="Barren-plateau VQE benchmarking toolkit.")
    parser.add_argument("--version", action="version", version=f"vqe-plateaus {__version__} (rng: {RNG_ID})")
    sub = parser.add_subparsers(dest="command", metavar="SUBCOMMAND", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("ground-state", help="exact ground energy and state of a Hamiltonian")
    _hamiltonian_arg(p)
    p.add_argument("--state-format", choices=("npy", "txt"), help="state file format (default npy)")
    _common(p)

    p = sub.add_parser("run", help="run one VQE method and write its trace and result record")
    _hamiltonian_arg(p)
    _method_arg(p)
    p.add_argument("--layers", type=int, help="ansatz depth (default 30)")
    p.add_argument("--iterations", type=int, help="SPSA iteration budget (default 1000)")
    p.add_argument("--split", type=float, help="stage-1 share of the budget for local_global/pretrained (0.5)")
    p.add_argument("--n-steps", type=int, help="adiabatic interpolation steps (default 5)")
    _common(p)

    p = sub.add_parser("grad-scan", help="gradient-norm variance against depth and plateau classification")
    _hamiltonian_arg(p)
    _method_arg(p)
    p.add_argument("--depths", help="comma-separated positive depths (default 1,2,5,10,20,50)")
    p.add_argument("--samples", type=int, help="random parameter samples per depth (default 100)")
    p.add_argument("--epsilon", type=float, help="central-difference step (default 1e-4)")
    p.add_argument("--gradient", choices=("adjoint", "finite_difference"),
                   help="adjoint sweep or explicit differencing; both give the same values")
    p.add_argument("--no-figure", dest="figure", action="store_const", const=False, help="skip the PNG plot")
    _common(p)

    p = sub.add_parser("landscape", help="2-D energy slice around a parameter vector")
    _hamiltonian_arg(p)
    _method_arg(p)
    p.add_argument("--layers", type=int, help="ansatz depth when the centre does not fix it (default 30)")
    p.add_argument("--center", help="result JSON from `run`, a .npy/.txt vector, or 'zero' (default)")
    p.add_argument("--range", type=float, help="half-width of the grid in radians (default 0.4)")
    p.add_argument("--resolution", type=int, help="grid points per axis (default 100)")
    p.add_argument("--directions", choices=("first_two_coords", "random_orthonormal"))
    p.add_argument("--no-figure", dest="figure", action="store_const", const=False, help="skip the heatmap")
    _common(p)

    p = sub.add_parser("campaign", help="run a molecule x method campaign from a JSON definition")
    _common(p)

    p = sub.add_parser("report", help="render tables and figures of a finished campaign")
    p.add_argument("--no-figure", dest="figure", action="store_const", const=False, help="skip PNG figures")
    _common(p)
    return parser


# ---------------------------------------------------------------------------
# option resolution
# ---------------------------------------------------------------------------


def _resolve(args: argparse.Namespace) -> dict:
    file_values = {}
    if args.config and args.command not in ("campaign", "report"):
        file_values = _read_json(args.config)
        if not isinstance(file_values, dict):
            raise UsageError(f"{args.config}: expected a JSON object of option values")
        unknown = set(file_values) - set(DEFAULTS)
        if unknown:
            raise UsageError(f"{args.config}: unknown options {sorted(unknown)}")
    opts = {}
    for key, default in DEFAULTS.items():
        flag = getattr(args, key, None)
        opts[key] = flag if flag is not None else file_values.get(key, default)
    if opts["output"] is None:
        opts["output"] = os.environ.get(OUTPUT_ENV) or "vqe-output"
    if opts["jobs"] is None:
        opts["jobs"] = os.cpu_count() or 1
    if opts["seed"] < 0:
        raise UsageError(f"--seed must be non-negative, got {opts['seed']}")
    return opts


def _read_json(path):
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise FileNotFoundError(f"file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: invalid JSON: {exc}") from None


def _load_h(opts):
    from .hamiltonian import load_hamiltonian

    if not opts["hamiltonian"]:
        raise UsageError("--hamiltonian is required")
    return load_hamiltonian(opts["hamiltonian"]), Path(str(opts["hamiltonian"])).stem


def _check_method(method: str) -> None:
    from .methods import METHODS

    if method not in METHODS:
        raise UsageError(f"invalid method {method!r}; valid methods: {', '.join(METHODS)}")


def _output_dir(opts) -> Path:
    out = Path(opts["output"])
    out.mkdir(parents=True, exist_ok=True)
    return out


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_ground_state(opts) -> int:
    from .statevector import ground_state

    h, name = _load_h(opts)
    solution = ground_state(h, seed=opts["seed"])
    out = _output_dir(opts)
    if opts["state_format"] == "npy":
        path = out / f"{name}_ground_state.npy"
        np.save(path, solution.state)
    else:
        path = out / f"{name}_ground_state.txt"
        np.savetxt(path, np.column_stack([solution.state.real, solution.state.imag]),
                   header="real imag", fmt="%.17g")
    print(f"ground energy: {solution.energy:.12f}")
    print(f"qubits: {h.n_qubits}  degeneracy: {solution.degeneracy}  residual: {solution.residual_norm:.2e}")
    print(f"state: {path}")
    return 0


def cmd_run(opts) -> int:
    from .methods import run_method
    from .optimizer import SpsaConfig

    _check_method(opts["method"])
    h, name = _load_h(opts)
    if opts["iterations"] < 0:
        raise UsageError(f"--iterations must be >= 0, got {opts['iterations']}")
    knobs = {}
    if opts["method"] in ("local_global", "pretrained"):
        knobs["split"] = opts["split"]
    elif opts["method"] == "adiabatic":
        knobs["n_steps"] = opts["n_steps"]
    cfg = SpsaConfig(max_iterations=opts["iterations"], seed=opts["seed"])
    result = run_method(opts["method"], h, opts["layers"], cfg, **knobs)
    json_path, csv_path = result.export(_output_dir(opts), name, opts["layers"], opts["seed"])
    short = " (short trace)" if result.stability_short else ""
    print(
        f"{result.method}: final_energy={result.final_energy:.10f} exact={result.reference_energy:.10f} "
        f"energy_error={result.energy_error:.3e} fidelity={result.fidelity:.6f} "
        f"stability={result.stability:.3e}{short} params={result.n_params} "
        f"time={result.trace.wall_time:.2f}s"
    )
    print(f"wrote {json_path} and {csv_path}")
    return 0


def _parse_depths(text) -> list[int]:
    if isinstance(text, (list, tuple)):
        items = list(text)
    else:
        items = [t for t in str(text).split(",") if t.strip()]
    try:
        depths = [int(t) for t in items]
    except ValueError:
        raise UsageError(f"depths must be comma-separated positive integers, got {text!r}") from None
    if not depths or any(d < 1 for d in depths):
        raise UsageError(f"depths must be comma-separated positive integers, got {text!r}")
    return depths


def cmd_grad_scan(opts) -> int:
    from .analysis import classify, gradient_scan, write_gradient_stats_csv
    from .methods import scan_setup

    _check_method(opts["method"])
    depths = _parse_depths(opts["depths"])
    if opts["samples"] < 2:
        raise UsageError(f"--samples must be >= 2, got {opts['samples']}")
    if opts["samples"] < LOW_SAMPLE_WARNING:
        print(f"warning: only {opts['samples']} samples per depth; variances will be noisy", file=sys.stderr)
    h, name = _load_h(opts)
    family, operator = scan_setup(opts["method"], h)
    stats = gradient_scan(
        family, operator, depths, opts["samples"], opts["seed"], opts["epsilon"], opts["gradient"],
        label=opts["method"],
    )
    out = _output_dir(opts)
    path = out / f"{name}_{opts['method']}_gradients_{opts['seed']}.csv"
    write_gradient_stats_csv(stats, path)
    for s in stats:
        print(f"depth {s.depth:>3}: mean |grad| = {s.mean_norm:.6g}  var = {s.variance_of_norms:.6g}")
    if opts["figure"]:
        from .plotting import plot_variance_scaling

        plot_variance_scaling({opts["method"]: stats}, out / f"{name}_{opts['method']}_gradients_{opts['seed']}.png",
                              f"{name} {opts['method']}")
    if len(stats) >= 2:
        verdict = classify(stats[0], stats[-1])
        print(f"variance ratio (depth {stats[-1].depth} / depth {stats[0].depth}) = {verdict.ratio:.6g}: "
              f"{verdict.display}")
    print(f"wrote {path}")
    return 0


def _load_center(spec: str, method: str, layers: int, n_qubits: int):
    """(circuit, centre vector) from a result record, a vector file or ``zero``."""
    from .ansatz import build_circuit, build_mps, build_sea

    family = "sea" if method == "sea" else "efficient_su2"
    if spec == "zero":
        circuit = build_circuit(family, n_qubits, layers)
        return circuit, np.zeros(circuit.n_params)
    path = Path(spec)
    if not path.exists():
        raise FileNotFoundError(f"file not found: {spec}")
    if path.suffix == ".json":
        record = _read_json(path)
        try:
            ansatz = record["ansatz"]
            theta = np.asarray(record["final_params"], dtype=float)
        except (KeyError, TypeError):
            raise UsageError(f"{spec}: not a result record (needs 'ansatz' and 'final_params')") from None
        builder, config = ansatz["builder"], ansatz.get("config", {})
        if builder == "sea":
            circuit = build_sea(n_qubits, config["depths"])
        elif builder == "mps":
            circuit = build_mps(n_qubits, config.get("bond_dim", 2))
        else:
            circuit = build_circuit("efficient_su2", n_qubits, config["layers"])
        return circuit, theta
    theta = np.load(path) if path.suffix == ".npy" else np.loadtxt(path, ndmin=1)
    return build_circuit(family, n_qubits, layers), np.asarray(theta, dtype=float).ravel()


def cmd_landscape(opts) -> int:
    from .analysis import landscape_scan

    _check_method(opts["method"])
    if opts["resolution"] < 2:
        raise UsageError(f"--resolution must be >= 2, got {opts['resolution']}")
    if opts["range"] < 0:
        raise UsageError(f"--range must be >= 0, got {opts['range']}")
    h, name = _load_h(opts)
    circuit, theta = _load_center(str(opts["center"]), opts["method"], opts["layers"], h.n_qubits)
    if theta.shape != (circuit.n_params,):
        raise UsageError(
            f"centre vector has {theta.size} entries but the {circuit.name} ansatz has {circuit.n_params} parameters"
        )
    if opts["range"] == 0:
        print("warning: --range 0 gives a grid of identical cells", file=sys.stderr)
    grid = landscape_scan(circuit, h, theta, opts["range"], opts["resolution"], opts["directions"], opts["seed"])
    out = _output_dir(opts)
    path = out / f"{name}_{opts['method']}_landscape.csv"
    grid.write_csv(path)
    if opts["figure"]:
        from .plotting import plot_landscape

        plot_landscape(grid, out / f"{name}_{opts['method']}_landscape.png", f"{name} {opts['method']}")
    status = "ok" if grid.center_consistent else "FAILED"
    print(f"grid {grid.resolution}x{grid.resolution} over +/-{grid.half_range} rad; "
          f"energy range [{grid.energies.min():.8f}, {grid.energies.max():.8f}]")
    print(f"centre check {status}: E(centre)={grid.center_energy:.10f} grid={grid.center_value:.10f} "
          f"deviation={grid.center_deviation:.2e} tolerance={grid.center_tolerance:.2e}")
    print(f"wrote {path}")
    if not grid.center_consistent:
        raise NumericalError("landscape centre cell disagrees with the centre energy")
    return 0


def _campaign_config(opts, args):
    from .campaign import CampaignConfig

    if not args.config:
        raise UsageError(f"{args.command} needs --config pointing at a campaign JSON file")
    data = _read_json(args.config)
    # the environment variable is a default, so the file's own output wins over it
    output = args.output or (None if isinstance(data, dict) and "output" in data else os.environ.get(OUTPUT_ENV))
    overrides = {
        "output": output,
        "jobs": args.jobs,
        "seeds": [args.seed] if args.seed is not None else None,
    }
    return CampaignConfig.load(args.config, **overrides)


def cmd_campaign(opts, args) -> int:
    from .campaign import register_report, render_report, run_campaign

    cfg = _campaign_config(opts, args)
    report = run_campaign(cfg)
    paths = render_report(report, figures=True)
    register_report(cfg, paths)
    failed = [(row, a, e) for row in report.rows for a, e in row.errors.items()]
    print(f"campaign: {len(report.rows)} rows, {report.computed} cells computed, {report.skipped} reused")
    for row, analysis, error in failed:
        print(f"error: {row.molecule}/{row.method}/{analysis}/{row.seed}: {error}", file=sys.stderr)
    print(f"report: {Path(cfg.output) / 'report'}")
    return 1 if failed else 0


def cmd_report(opts, args) -> int:
    from .campaign import load_report, register_report, render_report

    cfg = _campaign_config(opts, args)
    report = load_report(cfg)
    paths = render_report(report, figures=opts["figure"])
    register_report(cfg, paths)
    for path in paths:
        if path.suffix == ".txt":
            print(f"== {path.name}")
            print(path.read_text(encoding="utf-8"), end="")
    return 0


COMMANDS = {
    "ground-state": cmd_ground_state,
    "run": cmd_run,
    "grad-scan": cmd_grad_scan,
    "landscape": cmd_landscape,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s"
    )
    try:
        opts = _resolve(args)
        if args.command == "campaign":
            return cmd_campaign(opts, args)
        if args.command == "report":
            return cmd_report(opts, args)
        return COMMANDS[args.command](opts)
    except FileNotFoundError as exc:
        msg = str(exc)
        if not msg.startswith("file not found"):
            msg = f"file not found: {exc.filename or msg}"
        print(f"error: {msg}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (UsageError, ParseError, VqeError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
