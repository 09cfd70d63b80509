"""Declarative benchmark campaigns over molecules, methods and analyses.

A campaign is a JSON config naming Hamiltonians and methods.  It expands
into cells ``(molecule, method, analysis, seed)`` with ``analysis`` in
``{"convergence", "gradient"}``.  Each cell writes its own files, and the
parent process then registers them in ``manifest.json`` with their SHA-256
hashes.  A cell whose files are registered and unchanged is skipped on the
next run, which makes interrupted campaigns resumable.

Wall times go to ``timing.json`` only, so the manifest and every table are
byte-identical across reruns of the same config.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import os
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .analysis import DEFAULT_DEPTHS, GradientStats, classify, gradient_scan, write_gradient_stats_csv
from .errors import ConfigurationError, UndefinedRatioError
from .hamiltonian import load_hamiltonian, resolve_hamiltonian_path
from .methods import METHODS, run_method, scan_setup
from .optimizer import SpsaConfig
from .rng import RNG_ID
from .statevector import GroundStateSolution, ground_state

log = logging.getLogger(__name__)

ANALYSES = ("convergence", "gradient")
MANIFEST = "manifest.json"
TIMING = "timing.json"


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HamiltonianEntry:
    name: str
    path: str


@dataclass(frozen=True)
class CampaignConfig:
    hamiltonians: tuple[HamiltonianEntry, ...]
    methods: tuple[str, ...] = METHODS
    layers: int = 30
    depths: tuple[int, ...] = DEFAULT_DEPTHS
    iterations: int = 1000
    seeds: tuple[int, ...] = (42,)
    output: str = "campaign-output"
    samples: int = 100
    epsilon: float = 1e-4
    gradient: str = "adjoint"
    analyses: tuple[str, ...] = ANALYSES
    split: float = 0.5
    n_steps: int = 5
    jobs: int = 1

    def __post_init__(self):
        if not self.hamiltonians:
            raise ConfigurationError("a campaign needs at least one Hamiltonian")
        names = [e.name for e in self.hamiltonians]
        if len(set(names)) != len(names):
            raise ConfigurationError(f"duplicate Hamiltonian names in {names}")
        for method in self.methods:
            if method not in METHODS:
                raise ConfigurationError(f"unknown method {method!r}; choose from {list(METHODS)}")
        for analysis in self.analyses:
            if analysis not in ANALYSES:
                raise ConfigurationError(f"unknown analysis {analysis!r}; choose from {list(ANALYSES)}")
        if self.iterations < 1:
            raise ConfigurationError(f"iterations must be >= 1, got {self.iterations}")
        if not self.depths or any(d < 1 for d in self.depths):
            raise ConfigurationError(f"depths must be a non-empty list of positive integers, got {self.depths}")
        if self.layers < 0:
            raise ConfigurationError(f"layers must be >= 0, got {self.layers}")
        if self.samples < 2:
            raise ConfigurationError(f"samples must be >= 2, got {self.samples}")
        if not self.seeds or any(s < 0 for s in self.seeds):
            raise ConfigurationError(f"seeds must be non-negative, got {self.seeds}")
        if self.jobs < 1:
            raise ConfigurationError(f"jobs must be >= 1, got {self.jobs}")

    @classmethod
    def from_dict(cls, data: dict, base_dir: str | Path | None = None) -> "CampaignConfig":
        data = dict(data)
        allowed = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - allowed
        if unknown:
            raise ConfigurationError(f"unknown campaign keys {sorted(unknown)}")
        entries = []
        for item in data.pop("hamiltonians", []):
            if isinstance(item, str):
                item = {"name": Path(item).stem, "path": item}
            path = str(item["path"])
            if base_dir is not None and not Path(path).is_absolute() and (Path(base_dir) / path).exists():
                path = str(Path(base_dir) / path)
            entries.append(HamiltonianEntry(str(item.get("name", Path(path).stem)), path))
        for key in ("methods", "depths", "seeds", "analyses"):
            if key in data:
                data[key] = tuple(data[key])
        return cls(hamiltonians=tuple(entries), **data)

    @classmethod
    def load(cls, path: str | Path, **overrides) -> "CampaignConfig":
        path = Path(path)
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise FileNotFoundError(f"file not found: {path}") from None
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"{path}: invalid JSON: {exc}") from None
        data.update({k: v for k, v in overrides.items() if v is not None})
        return cls.from_dict(data, base_dir=path.parent)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["hamiltonians"] = [asdict(e) for e in self.hamiltonians]
        for key in ("methods", "depths", "seeds", "analyses"):
            out[key] = list(out[key])
        return out

    def validate_files(self) -> None:
        for entry in self.hamiltonians:
            load_hamiltonian(entry.path)


# ---------------------------------------------------------------------------
# ground-state cache
# ---------------------------------------------------------------------------


def file_sha256(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def cached_ground_state(hamiltonian_path: str | Path, cache_dir: str | Path) -> GroundStateSolution:
    """Ground state of the file, solved once per distinct file content."""
    path = resolve_hamiltonian_path(hamiltonian_path)
    cache = Path(cache_dir) / f"ground_{file_sha256(path)}.npz"
    if cache.exists():
        with np.load(cache) as data:
            return GroundStateSolution(
                energy=float(data["energy"]),
                state=data["state"],
                residual_norm=float(data["residual_norm"]),
                eigenspace=tuple(data["eigenspace"]),
                matvecs=int(data["matvecs"]),
            )
    solution = ground_state(load_hamiltonian(path))
    cache.parent.mkdir(parents=True, exist_ok=True)
    tmp = cache.with_suffix(".tmp.npz")
    np.savez(
        tmp,
        energy=solution.energy,
        state=solution.state,
        residual_norm=solution.residual_norm,
        eigenspace=np.array(solution.eigenspace),
        matvecs=solution.matvecs,
    )
    os.replace(tmp, cache)
    return solution


# ---------------------------------------------------------------------------
# cells
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Cell:
    molecule: str
    method: str
    analysis: str
    seed: int

    @property
    def key(self) -> str:
        return f"{self.molecule}/{self.method}/{self.analysis}/{self.seed}"


def expand_cells(cfg: CampaignConfig) -> list[Cell]:
    return [
        Cell(entry.name, method, analysis, seed)
        for entry in cfg.hamiltonians
        for method in cfg.methods
        for seed in cfg.seeds
        for analysis in cfg.analyses
    ]


def _relative(path: Path, root: Path) -> str:
    return path.relative_to(root).as_posix()


def _run_cell(cfg: CampaignConfig, cell: Cell) -> dict:
    """Compute one cell; returns its manifest entry plus wall time."""
    import time

    root = Path(cfg.output)
    entry = next(e for e in cfg.hamiltonians if e.name == cell.molecule)
    start = time.perf_counter()
    try:
        h = load_hamiltonian(entry.path)
        if cell.analysis == "convergence":
            reference = cached_ground_state(entry.path, root / "cache")
            result = run_method(
                cell.method,
                h,
                cfg.layers,
                SpsaConfig(max_iterations=cfg.iterations, seed=cell.seed),
                reference=reference,
                **_knobs(cfg, cell.method),
            )
            files = result.export(root / "runs", cell.molecule, cfg.layers, cell.seed)
        else:
            family, operator = scan_setup(cell.method, h)
            stats = gradient_scan(
                family, operator, cfg.depths, cfg.samples, cell.seed, cfg.epsilon, cfg.gradient, label=cell.method
            )
            out = root / "gradients" / f"{cell.molecule}_{cell.method}_{cell.seed}.csv"
            out.parent.mkdir(parents=True, exist_ok=True)
            write_gradient_stats_csv(stats, out)
            files = (out,)
        record = {
            "status": "ok",
            "files": {_relative(Path(f), root): file_sha256(f) for f in files},
        }
    except Exception as exc:  # noqa: BLE001 - a failing cell must not stop the campaign
        log.error("cell %s failed: %s", cell.key, exc)
        record = {
            "status": "error",
            "error": f"{type(exc).__name__}: {exc}",
            "traceback": traceback.format_exc(limit=4),
        }
    record["wall_time_s"] = time.perf_counter() - start
    return record


def _knobs(cfg: CampaignConfig, method: str) -> dict:
    if method in ("local_global", "pretrained"):
        return {"split": cfg.split}
    if method == "adiabatic":
        return {"n_steps": cfg.n_steps}
    return {}


def _cell_done(record: dict | None, root: Path) -> bool:
    if not record or record.get("status") != "ok":
        return False
    for rel, digest in record["files"].items():
        path = root / rel
        if not path.exists() or file_sha256(path) != digest:
            return False
    return True


def _write_json_atomic(path: Path, payload) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    os.replace(tmp, path)


# ---------------------------------------------------------------------------
# campaign
# ---------------------------------------------------------------------------


@dataclass
class ReportRow:
    molecule: str
    method: str
    seed: int
    result: dict | None = None
    gradient_stats: list[GradientStats] | None = None
    errors: dict[str, str] = field(default_factory=dict)
    trace: dict[str, np.ndarray] | None = None

    @property
    def classification(self):
        if not self.gradient_stats or len(self.gradient_stats) < 2:
            return None
        try:
            return classify(self.gradient_stats[0], self.gradient_stats[-1])
        except UndefinedRatioError:
            return None


@dataclass
class CampaignReport:
    config: CampaignConfig
    rows: list[ReportRow]
    computed: int = 0
    skipped: int = 0

    @property
    def failed(self) -> bool:
        return any(row.errors for row in self.rows)

    @property
    def reference_energies(self) -> dict[str, float]:
        out = {}
        for row in self.rows:
            if row.result is not None:
                out.setdefault(row.molecule, row.result["reference_energy"])
        return out


def run_campaign(cfg: CampaignConfig) -> CampaignReport:
    """Run every pending cell and return the assembled report.

    Ground states are solved up front, once per distinct file, so worker
    processes only read the cache.
    """
    cfg.validate_files()
    root = Path(cfg.output)
    root.mkdir(parents=True, exist_ok=True)
    manifest_path = root / MANIFEST
    manifest = json.loads(manifest_path.read_text()) if manifest_path.exists() else {}
    cells_state: dict = manifest.get("cells", {})
    timing_path = root / TIMING
    timing = json.loads(timing_path.read_text()) if timing_path.exists() else {}

    hamiltonians = {}
    for entry in cfg.hamiltonians:
        path = resolve_hamiltonian_path(entry.path)
        digest = file_sha256(path)
        hamiltonians[entry.name] = {"path": entry.path, "sha256": digest}
        if "convergence" in cfg.analyses:
            cached_ground_state(path, root / "cache")
            hamiltonians[entry.name]["ground_state_cache"] = f"cache/ground_{digest}.npz"

    def register(cell: Cell, record: dict) -> None:
        timing[cell.key] = record.pop("wall_time_s")
        cells_state[cell.key] = record
        _write_manifest(manifest_path, cfg, hamiltonians, cells_state)
        _write_json_atomic(timing_path, timing)

    pending = [c for c in expand_cells(cfg) if not _cell_done(cells_state.get(c.key), root)]
    skipped = len(expand_cells(cfg)) - len(pending)
    if cfg.jobs > 1 and len(pending) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            futures = [(cell, pool.submit(_run_cell, cfg, cell)) for cell in pending]
            for cell, future in futures:
                register(cell, future.result())
    else:
        for cell in pending:
            register(cell, _run_cell(cfg, cell))
    _write_manifest(manifest_path, cfg, hamiltonians, cells_state)
    report = load_report(cfg)
    report.computed, report.skipped = len(pending), skipped
    return report


def _write_manifest(path: Path, cfg: CampaignConfig, hamiltonians: dict, cells: dict) -> None:
    previous = json.loads(path.read_text()) if path.exists() else {}
    payload = {
        "artifact": "vqe_plateaus",
        "version": __version__,
        "rng": RNG_ID,
        "config": cfg.to_dict() | {"output": ".", "jobs": None},
        "hamiltonians": hamiltonians,
        "cells": {k: cells[k] for k in sorted(cells)},
        "report": previous.get("report", {}),
    }
    _write_json_atomic(path, payload)


def register_report(cfg: CampaignConfig, paths: Sequence[Path]) -> None:
    """Record rendered report files and their hashes in the campaign manifest."""
    root = Path(cfg.output)
    manifest_path = root / MANIFEST
    manifest = json.loads(manifest_path.read_text()) if manifest_path.exists() else {}
    manifest["report"] = {
        _relative(Path(p).resolve(), root.resolve()): file_sha256(p) for p in sorted(paths)
    }
    _write_json_atomic(manifest_path, manifest)


def _read_stats(path: Path) -> list[GradientStats]:
    with open(path, encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    return [
        GradientStats(int(r["depth"]), int(r["n_samples"]), float(r["mean_norm"]), float(r["variance"]), np.empty(0))
        for r in rows
    ]


def load_report(cfg: CampaignConfig) -> CampaignReport:
    """Assemble the report from the manifest and the registered files."""
    root = Path(cfg.output)
    manifest_path = root / MANIFEST
    cells = json.loads(manifest_path.read_text())["cells"] if manifest_path.exists() else {}
    rows = []
    for entry in cfg.hamiltonians:
        for method in cfg.methods:
            for seed in cfg.seeds:
                row = ReportRow(entry.name, method, seed)
                for analysis in cfg.analyses:
                    record = cells.get(Cell(entry.name, method, analysis, seed).key)
                    if record is None:
                        row.errors[analysis] = "not run"
                        continue
                    if record["status"] != "ok":
                        row.errors[analysis] = record.get("error", "failed")
                        continue
                    for rel in record["files"]:
                        path = root / rel
                        if path.suffix == ".json":
                            row.result = json.loads(path.read_text(encoding="utf-8"))
                        elif analysis == "gradient":
                            row.gradient_stats = _read_stats(path)
                        else:
                            row.trace = _read_trace(path)
                rows.append(row)
    return CampaignReport(cfg, rows)


def _read_trace(path: Path) -> dict[str, np.ndarray]:
    with open(path, encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    return {
        "energy": np.array([float(r["energy"]) for r in rows]),
        "global_energy": np.array([float(r["global_energy"]) for r in rows]),
    }


# ---------------------------------------------------------------------------
# rendering
# ---------------------------------------------------------------------------


def _fmt(x: float | None, spec: str = ".6g") -> str:
    return "" if x is None else format(x, spec)


def _text_table(header: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    widths = [max(len(str(c)) for c in col) for col in zip(header, *rows)] if rows else [len(h) for h in header]
    lines = ["  ".join(str(c).ljust(w) for c, w in zip(header, widths)).rstrip()]
    lines.append("  ".join("-" * w for w in widths))
    for row in rows:
        lines.append("  ".join(str(c).ljust(w) for c, w in zip(row, widths)).rstrip())
    return "\n".join(lines) + "\n"


def _csv_text(header: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def variance_table(report: CampaignReport) -> tuple[list[str], list[list[str]]]:
    """Molecule, Method, Var at the shallowest and deepest depth, ratio, classification."""
    depths = report.config.depths
    lo, hi = min(depths), max(depths)
    multi_seed = len(report.config.seeds) > 1
    header = ["Molecule", "Method", f"Var_{lo}L", f"Var_{hi}L", "Var.Ratio", "Classification"]
    if multi_seed:
        header.append("Seed")
    rows = []
    for row in report.rows:
        if "gradient" not in report.config.analyses:
            continue
        if row.gradient_stats:
            by_depth = {s.depth: s.variance_of_norms for s in row.gradient_stats}
            verdict = row.classification
            cells = [
                row.molecule,
                row.method,
                _fmt(by_depth.get(lo), ".4g"),
                _fmt(by_depth.get(hi), ".4g"),
                _fmt(verdict.ratio, ".4g") if verdict else "undefined",
                verdict.display if verdict else "undefined",
            ]
        else:
            cells = [row.molecule, row.method, "", "", "", "ERROR: " + row.errors.get("gradient", "")]
        if multi_seed:
            cells.append(str(row.seed))
        rows.append(cells)
    return header, rows


def stability_table(report: CampaignReport) -> tuple[list[str], list[list[str]]]:
    """Molecule, Method, Stability, Grad. Norm, State Fidelity."""
    multi_seed = len(report.config.seeds) > 1
    header = ["Molecule", "Method", "Stability", "Grad. Norm", "State Fidelity"]
    if multi_seed:
        header.append("Seed")
    rows = []
    for row in report.rows:
        if "convergence" not in report.config.analyses:
            continue
        r = row.result
        if r is not None:
            cells = [row.molecule, row.method, _fmt(r["stability"], ".4g"), _fmt(r["gradient_norm"], ".4g"),
                     _fmt(r["fidelity"], ".4f")]
        else:
            cells = [row.molecule, row.method, "", "", "ERROR: " + row.errors.get("convergence", "")]
        if multi_seed:
            cells.append(str(row.seed))
        rows.append(cells)
    return header, rows


def results_table(report: CampaignReport) -> tuple[list[str], list[list[str]]]:
    header = ["Molecule", "Method", "Seed", "Parameters", "Final Energy", "Exact Energy", "Energy Error",
              "Fidelity", "Stability", "Status"]
    rows = []
    for row in report.rows:
        if "convergence" not in report.config.analyses:
            continue
        r = row.result
        if r is None:
            rows.append([row.molecule, row.method, str(row.seed), "", "", "", "", "", "",
                         "ERROR: " + row.errors.get("convergence", "")])
            continue
        status = "ok (short trace)" if r["stability_short_trace"] else "ok"
        rows.append([
            row.molecule, row.method, str(row.seed), str(r["ansatz"]["n_params"]),
            _fmt(r["final_energy"], ".10f"), _fmt(r["reference_energy"], ".10f"),
            _fmt(r["energy_error"], ".3e"), _fmt(r["fidelity"], ".6f"), _fmt(r["stability"], ".3e"), status,
        ])
    return header, rows


def render_report(report: CampaignReport, directory: str | Path | None = None, figures: bool = True) -> list[Path]:
    """Write the tables, gnuplot data files and (optionally) PNG figures.

    Tables come as CSV plus aligned text: ``variance_scaling``,
    ``stability`` and ``results``.  Convergence curves are written as
    whitespace-separated ``.dat`` files under ``convergence/`` with the
    columns ``iteration energy global_energy``; plot with e.g.
    ``plot 'h2_sea_42.dat' using 1:3 with lines``.
    """
    root = Path(directory if directory is not None else report.config.output) / "report"
    root.mkdir(parents=True, exist_ok=True)
    written = []
    for name, (header, rows) in (
        ("variance_scaling", variance_table(report)),
        ("stability", stability_table(report)),
        ("results", results_table(report)),
    ):
        for suffix, text in ((".csv", _csv_text(header, rows)), (".txt", _text_table(header, rows))):
            path = root / f"{name}{suffix}"
            path.write_text(text, encoding="utf-8")
            written.append(path)

    conv = root / "convergence"
    conv.mkdir(exist_ok=True)
    for row in report.rows:
        if row.trace is None:
            continue
        path = conv / f"{row.molecule}_{row.method}_{row.seed}.dat"
        lines = ["# iteration energy global_energy"]
        for k, (e, g) in enumerate(zip(row.trace["energy"], row.trace["global_energy"]), start=1):
            lines.append(f"{k} {e!r} {g!r}")
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        written.append(path)

    if figures:
        written.extend(_render_figures(report, root / "figures"))
    return written


def _render_figures(report: CampaignReport, directory: Path) -> list[Path]:
    from .plotting import plot_convergence, plot_variance_scaling

    directory.mkdir(parents=True, exist_ok=True)
    out = []
    references = report.reference_energies
    for entry in report.config.hamiltonians:
        for seed in report.config.seeds:
            rows = [r for r in report.rows if r.molecule == entry.name and r.seed == seed]
            series = {r.method: r.trace["global_energy"] for r in rows if r.trace is not None}
            if series:
                out.append(plot_convergence(
                    series, directory / f"convergence_{entry.name}_{seed}.png",
                    references.get(entry.name), f"{entry.name}, seed {seed}",
                ))
            stats = {r.method: r.gradient_stats for r in rows if r.gradient_stats}
            if stats:
                out.append(plot_variance_scaling(
                    stats, directory / f"variance_{entry.name}_{seed}.png", f"{entry.name}, seed {seed}"
                ))
    return out
