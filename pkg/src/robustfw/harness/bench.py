"""Experiment execution and CSV emission."""

from __future__ import annotations

import csv
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import List, Optional, Sequence, Union

from ..core import Method, SolverConfig, SolverTrace
from ..solvers import RunResult, solve
from .instances import InstanceError, InstanceFile, generate_instance, read_instance

log = logging.getLogger(__name__)

TRACE_HEADER = ("iteration", "lmo_calls", "elapsed_seconds", "f_value", "f_mu_value", "dual_bound")
SUMMARY_HEADER = ("instance", "method", "termination", "iterations", "lmo_calls",
                  "f_best", "dual_bound", "elapsed_seconds")
TIMING_COLUMNS = ("elapsed_seconds",)


@dataclass(frozen=True)
class GeneratorParams:
    kind: str
    n: int
    gamma: float
    seed: int
    edge_prob: Optional[float] = None

    def build(self) -> InstanceFile:
        return generate_instance(self.kind, self.n, self.gamma, self.seed, self.edge_prob)


InstanceSource = Union[str, Path, GeneratorParams, InstanceFile]


@dataclass
class ExperimentSpec:
    instances: List[InstanceSource]
    methods: List[Method]
    output: Path
    config: SolverConfig = field(default_factory=SolverConfig)
    workers: int = 1

    def __post_init__(self):
        if not self.instances:
            raise ValueError("experiment needs at least one instance")
        if not self.methods:
            raise ValueError("experiment needs at least one method")
        self.methods = [Method(m) for m in self.methods]
        self.output = Path(self.output)
        if self.workers < 1:
            raise ValueError("workers must be positive")

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentSpec":
        """Build from a JSON-style dict.

        ``instances`` entries are paths or ``{"kind", "n", "gamma", "seed"}``
        objects where ``gamma`` and ``seed`` may also be lists (swept as a grid).
        """
        sources: List[InstanceSource] = []
        for item in data.get("instances", []):
            if isinstance(item, str):
                sources.append(Path(item))
                continue
            gammas = item["gamma"] if isinstance(item["gamma"], list) else [item["gamma"]]
            seeds = item["seed"] if isinstance(item["seed"], list) else [item["seed"]]
            for g in gammas:
                for s in seeds:
                    sources.append(GeneratorParams(item["kind"], int(item["n"]), float(g), int(s),
                                                   item.get("edge_prob")))
        cfg = {k: data[k] for k in ("epsilon", "mu_override", "max_iters", "max_lmo_calls",
                                    "conv_hull_period") if k in data}
        return cls(sources, [Method(m) for m in data.get("methods", [])],
                   Path(data.get("output", "results")), SolverConfig(**cfg),
                   int(data.get("workers", 1)))


@dataclass
class ExperimentReport:
    completed: List[dict]
    failures: List[str]

    @property
    def ok(self) -> bool:
        return not self.failures


def fmt(value) -> str:
    """Locale-independent shortest round-trip decimal; empty for None."""
    if value is None:
        return ""
    if isinstance(value, int):
        return str(value)
    return repr(float(value))


def write_trace_csv(trace: SolverTrace, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_HEADER)
        for r in trace.records:
            w.writerow([fmt(r.iteration), fmt(r.lmo_calls), fmt(r.elapsed), fmt(r.f_value),
                        fmt(r.f_mu_value), fmt(r.dual_bound)])


def read_trace_csv(path, drop_timing: bool = False) -> List[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    if drop_timing:
        for row in rows:
            for col in TIMING_COLUMNS:
                row.pop(col, None)
    return rows


def summary_row(name: str, result: RunResult) -> dict:
    last = result.trace.records[-1] if result.trace.records else None
    return {
        "instance": name,
        "method": result.method.value,
        "termination": result.termination.value,
        "iterations": fmt(result.iterations),
        "lmo_calls": fmt(result.lmo_calls),
        "f_best": fmt(result.f_best),
        "dual_bound": fmt(result.dual_bound),
        "elapsed_seconds": fmt(last.elapsed if last else 0.0),
    }


def trace_path(output: Path, name: str, method: Method) -> Path:
    return output / f"{name}__{method.value}.csv"


def _run_cell(inst: InstanceFile, method: Method, config: SolverConfig, output: Path) -> dict:
    problem = inst.to_problem()
    result = solve(problem, replace(config, method=method))
    write_trace_csv(result.trace, trace_path(output, inst.name, method))
    return summary_row(inst.name, result)


def _load(source: InstanceSource) -> InstanceFile:
    if isinstance(source, InstanceFile):
        return source
    if isinstance(source, GeneratorParams):
        try:
            return source.build()
        except ValueError as exc:
            raise InstanceError(str(exc)) from exc
    return read_instance(source)


def run_experiment(spec: ExperimentSpec) -> ExperimentReport:
    """Run every (instance, method) cell and write trace CSVs plus ``summary.csv``.

    Instances that fail to load are reported in ``failures``; the remaining
    cells still run and their files are kept.
    """
    spec.output.mkdir(parents=True, exist_ok=True)
    failures: List[str] = []
    cells = []
    seen = set()
    for source in spec.instances:
        try:
            inst = _load(source)
        except InstanceError as exc:
            log.error("instance %s: %s", source, exc)
            failures.append(f"{source}: {exc}")
            continue
        if inst.name in seen:
            raise ValueError(f"duplicate instance name {inst.name!r}")
        seen.add(inst.name)
        cells.extend((inst, m) for m in spec.methods)

    if spec.workers > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            futures = [pool.submit(_run_cell, inst, m, spec.config, spec.output)
                       for inst, m in cells]
            rows = [f.result() for f in futures]
    else:
        rows = [_run_cell(inst, m, spec.config, spec.output) for inst, m in cells]

    write_summary(rows, spec.output / "summary.csv")
    return ExperimentReport(rows, failures)


def write_summary(rows: Sequence[dict], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=SUMMARY_HEADER, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)


def load_spec(path) -> ExperimentSpec:
    return ExperimentSpec.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
