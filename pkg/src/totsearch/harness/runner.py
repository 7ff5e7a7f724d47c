"""Run configuration, single-instance runs, benches and transcript replay.

A run directory holds:

    events.jsonl      the RunLog, one event per line
    transcript.jsonl  every backend call with its reply (replayable)
    summary.json      outcome, plan, statistics and metrics
    metrics.csv       the metrics as one flat row
    run.json          the RunConfig, for ``replay``
"""
from __future__ import annotations

import csv
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Optional, Sequence

from ..backends import HTTPBackend, MockBackend, OracleBackend, RecordingBackend, ReplayBackend
from ..backends.base import Backend
from ..domains.base import Domain
from ..domains.instances import load_instance
from ..errors import ConfigError
from ..search.config import Beam, Mcts, SearchResult
from ..search.engine import SearchRun
from .metrics import MetricsReport, compute_metrics, reachability_labels
from .presets import Components, load_preset

log = logging.getLogger(__name__)

BACKENDS = ("oracle", "mock", "http", "replay")


@dataclass
class RunConfig:
    instance: str
    preset: Optional[str] = None
    # explicit components instead of a preset (programmatic use only)
    components: Optional[Components] = field(default=None, compare=False)
    backend: str = "oracle"
    seed: int = 0
    out_dir: Optional[str] = None
    # mock backend noise
    error_rate: float = 0.0
    invalid_rate: float = 0.0
    # http backend
    endpoint: Optional[str] = None
    model: Optional[str] = None
    # replay backend
    transcript: Optional[str] = None
    # optional overrides of the preset's numbers
    max_depth: Optional[int] = None
    max_expansions: Optional[int] = None
    width: Optional[int] = None
    iterations: Optional[int] = None
    # E4 needs oracle reachability labels; cheap at desk scale
    labels: bool = True

    def __post_init__(self):
        if (self.preset is None) == (self.components is None):
            raise ConfigError("give exactly one of a preset or explicit components")
        if self.backend not in BACKENDS:
            raise ConfigError(f"unknown backend {self.backend!r}; choose from {', '.join(BACKENDS)}")
        if self.backend == "replay" and not self.transcript:
            raise ConfigError("replay backend needs a transcript")
        if self.preset is not None:
            load_preset(self.preset)

    def to_dict(self) -> dict:
        if self.components is not None:
            raise ConfigError("runs with explicit components cannot be serialised")
        return {f.name: getattr(self, f.name) for f in fields(self) if f.name != "components"}

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)} - {"components"}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown RunConfig fields: {', '.join(sorted(unknown))}")
        return cls(**d)


@dataclass
class RunOutcome:
    instance_id: str
    result: SearchResult
    metrics: MetricsReport
    transcript: list[dict]

    def summary(self) -> dict:
        return {
            "instance": self.instance_id,
            "outcome": self.result.outcome,
            "plan": self.result.plan(),
            "best_path": self.result.best_path,
            "stats": self.result.stats.as_dict(),
            "metrics": self.metrics.as_dict(),
        }


def build_components(cfg: RunConfig, domain: Domain) -> Components:
    if cfg.components is not None:
        return cfg.components
    comp = load_preset(cfg.preset).build(domain, cfg.seed)
    sc = comp.config
    budget = sc.budget
    if cfg.max_depth is not None:
        budget = replace(budget, max_depth=cfg.max_depth)
        comp.horizon = cfg.max_depth if comp.horizon is not None else None
    if cfg.max_expansions is not None:
        budget = replace(budget, max_expansions=cfg.max_expansions)
    strategy, pruning = sc.strategy, sc.pruning
    if cfg.width is not None:
        if not isinstance(strategy, Beam):
            raise ConfigError("--width only applies to beam presets")
        strategy, pruning = Beam(cfg.width), None
    if cfg.iterations is not None:
        if not isinstance(strategy, Mcts):
            raise ConfigError("--iterations only applies to MCTS presets")
        strategy = replace(strategy, iterations=cfg.iterations)
    comp.config = replace(sc, strategy=strategy, pruning=pruning, budget=budget)
    return comp


def build_backend(cfg: RunConfig, domain: Domain, comp: Components) -> Backend:
    kw = dict(evaluator_mode=comp.evaluator_mode, horizon=comp.horizon)
    if cfg.backend == "oracle":
        return OracleBackend(domain, **kw)
    if cfg.backend == "mock":
        return MockBackend(domain, seed=cfg.seed, error_rate=cfg.error_rate,
                           invalid_rate=cfg.invalid_rate, **kw)
    if cfg.backend == "http":
        return HTTPBackend(base_url=cfg.endpoint, model=cfg.model)
    return ReplayBackend.from_file(cfg.transcript)


def run_instance(cfg: RunConfig, domain: Optional[Domain] = None) -> RunOutcome:
    """Run one search; write the run directory when ``cfg.out_dir`` is set."""
    domain = domain if domain is not None else load_instance(cfg.instance)
    comp = build_components(cfg, domain)
    recorder = RecordingBackend(build_backend(cfg, domain, comp))
    run = SearchRun(domain.problem(), recorder, comp.proposal, constraints=comp.constraints,
                    cost=comp.cost, heuristic=comp.heuristic, combiner=comp.combiner,
                    config=comp.config, validate=comp.validate, goal_mode=comp.goal_mode)
    result = run.run()
    labels = [reachability_labels(result.log, domain, comp.config.budget.max_depth)] if cfg.labels else None
    metrics = compute_metrics([result.log], labels)
    out = RunOutcome(domain.instance_id, result, metrics, recorder.records)
    if cfg.out_dir is not None:
        write_run(out, Path(cfg.out_dir), cfg)
    return out


def write_run(out: RunOutcome, path: Path, cfg: Optional[RunConfig] = None) -> None:
    path.mkdir(parents=True, exist_ok=True)
    out.result.log.write(path / "events.jsonl")
    with open(path / "transcript.jsonl", "w") as fh:
        for rec in out.transcript:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
    (path / "summary.json").write_text(json.dumps(out.summary(), indent=2, sort_keys=True) + "\n")
    write_metrics_csv(path / "metrics.csv", [(out.instance_id, out.metrics)])
    if cfg is not None and cfg.components is None:
        (path / "run.json").write_text(json.dumps(cfg.to_dict(), indent=2, sort_keys=True) + "\n")


def write_metrics_csv(path: Path, rows: Sequence[tuple[str, MetricsReport]]) -> None:
    names = [f.name for f in fields(MetricsReport)]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["instance"] + names)
        for inst, m in rows:
            d = asdict(m)
            w.writerow([inst] + ["" if d[k] is None else d[k] for k in names])


def _bench_one(cfg: RunConfig) -> tuple[str, dict, str, str]:
    out = run_instance(cfg)
    return out.instance_id, out.summary(), out.result.log.to_jsonl(), json.dumps(asdict(out.metrics))


def bench(instances: Sequence[str], base: RunConfig, out_dir: Path, workers: int = 1) -> MetricsReport:
    """Run ``base`` over several instance files.

    Per-instance run directories go under ``out_dir/<instance id>``; the
    top level gets ``metrics.csv`` (one row per instance plus ``ALL``) and
    ``summary.json``.  Rows are ordered by instance id whatever the worker
    count.
    """
    out_dir = Path(out_dir)
    cfgs = [replace(base, instance=str(p), out_dir=None) for p in instances]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            done = list(pool.map(_bench_one, cfgs))
    else:
        done = [_bench_one(c) for c in cfgs]
    done.sort(key=lambda x: x[0])
    rows, summaries = [], []
    for inst, summary, jsonl, metrics_json in done:
        rows.append((inst, MetricsReport(**json.loads(metrics_json))))
        summaries.append(summary)
        run_dir = out_dir / inst
        run_dir.mkdir(parents=True, exist_ok=True)
        (run_dir / "events.jsonl").write_text(jsonl)
        (run_dir / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    total = aggregate(rows)
    write_metrics_csv(out_dir / "metrics.csv", rows + [("ALL", total)])
    (out_dir / "summary.json").write_text(
        json.dumps({"instances": summaries, "aggregate": asdict(total)}, indent=2, sort_keys=True) + "\n")
    return total


def aggregate(rows: Sequence[tuple[str, MetricsReport]]) -> MetricsReport:
    """Pool per-instance reports: sums for counts, weighted success rate,
    plain means over instances for the optional quality metrics."""
    ms = [m for _, m in rows]
    n = sum(m.instances for m in ms)

    def mean(attr):
        vals = [getattr(m, attr) for m in ms if getattr(m, attr) is not None]
        return sum(vals) / len(vals) if vals else None

    return MetricsReport(
        instances=n,
        success_rate=sum(m.success_rate * m.instances for m in ms) / n if n else 0.0,
        expansions=sum(m.expansions for m in ms),
        generated_thoughts=sum(m.generated_thoughts for m in ms),
        tokens=sum(m.tokens for m in ms),
        backend_calls=sum(m.backend_calls for m in ms),
        distinct_valid_paths=sum(m.distinct_valid_paths for m in ms),
        candidate_diversity=mean("candidate_diversity"),
        discriminative_accuracy=mean("discriminative_accuracy"),
        calibration_error=mean("calibration_error"),
    )


def replay_run(run_dir: Path, out_dir: Optional[Path] = None) -> tuple[RunOutcome, bool]:
    """Re-execute a persisted run from its transcript; report whether the log matches."""
    run_dir = Path(run_dir)
    cfg = RunConfig.from_dict(json.loads((run_dir / "run.json").read_text()))
    cfg = replace(cfg, backend="replay", transcript=str(run_dir / "transcript.jsonl"),
                  out_dir=None if out_dir is None else str(out_dir))
    out = run_instance(cfg)
    same = out.result.log.to_jsonl() == (run_dir / "events.jsonl").read_text()
    return out, same
