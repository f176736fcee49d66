"""Repetition grid over datasets x classifiers x strategies.

A run directory holds, per (dataset, classifier, strategy) cell, the
per-repetition metrics, a per-user breakdown and the first repetition's
prediction records; per (dataset, strategy) a mean+-std table; and one
``hypotheses.json``. ``manifest.json`` indexes every cell with a content
hash so an interrupted grid can resume.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from . import metrics, stats, synth, viz
from .conformal import read_records, write_records
from .core import MultiUserDataset, repetition_seed
from .ingest import ingest
from .strategies import ClassifierSpec, StrategyKind, run_strategy

log = logging.getLogger(__name__)

DEFAULT_REPETITIONS = 20
DEFAULT_EPSILON = 0.05
MANIFEST = "manifest.json"


class ConfigError(ValueError):
    pass


@dataclass
class DatasetConfig:
    name: str
    path: list[str] | str | None = None
    format: str = "preprocessed"
    synth: dict | None = None
    window_len: int = 150
    filter_width: int = 10


@dataclass
class VizConfig:
    cells: bool = True
    boxplot: bool = True
    lolliplot: bool = True
    max_sets: int = 20


@dataclass
class ExperimentConfig:
    output: str
    datasets: list[DatasetConfig]
    classifiers: list[ClassifierSpec]
    strategies: list[StrategyKind] = field(default_factory=lambda: list(StrategyKind))
    epsilon: float = DEFAULT_EPSILON
    repetitions: int = DEFAULT_REPETITIONS
    base_seed: int = 0
    jobs: int = 1
    viz: VizConfig = field(default_factory=VizConfig)
    base_dir: Path = Path(".")

    def validate(self) -> None:
        if not 0.0 < self.epsilon < 1.0:
            raise ConfigError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if self.repetitions < 2:
            raise ConfigError("repetitions must be >= 2 to report a standard deviation")
        if not self.datasets or not self.classifiers or not self.strategies:
            raise ConfigError("datasets, classifiers and strategies must be non-empty")
        names = [d.name for d in self.datasets]
        if len(set(names)) != len(names):
            raise ConfigError("dataset names must be unique")
        labels = [c.label for c in self.classifiers]
        if len(set(labels)) != len(labels):
            raise ConfigError("classifier names must be unique")
        for d in self.datasets:
            if d.synth is None and d.path is None:
                raise ConfigError(f"dataset {d.name!r} needs a path or a synth block")


def _classifier(entry) -> ClassifierSpec:
    if isinstance(entry, str):
        return ClassifierSpec(entry)
    entry = dict(entry)
    return ClassifierSpec(entry.pop("algorithm"), entry.pop("params", {}) or {}, entry.pop("name", None))


def parse_config(raw: dict, base_dir=".", overrides: dict | None = None) -> ExperimentConfig:
    raw = {**raw, **{k: v for k, v in (overrides or {}).items() if v is not None}}
    try:
        cfg = ExperimentConfig(
            output=str(raw.get("output", "run")),
            datasets=[DatasetConfig(**d) for d in raw["datasets"]],
            classifiers=[_classifier(c) for c in raw["classifiers"]],
            strategies=[StrategyKind(s) for s in raw.get("strategies", [k.value for k in StrategyKind])],
            epsilon=float(raw.get("epsilon", DEFAULT_EPSILON)),
            repetitions=int(raw.get("repetitions", DEFAULT_REPETITIONS)),
            base_seed=int(raw.get("base_seed", 0)),
            jobs=int(raw.get("jobs", 1)),
            viz=VizConfig(**(raw.get("viz") or {})),
            base_dir=Path(base_dir),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid config: {exc}") from exc
    for spec in cfg.classifiers:
        try:
            spec.config()
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"classifier {spec.label!r}: {exc}") from exc
    cfg.validate()
    return cfg


def load_config(path, overrides: dict | None = None) -> ExperimentConfig:
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        raw = yaml.safe_load(fh) or {}
    return parse_config(raw, path.parent, overrides)


def load_dataset(d: DatasetConfig, base_dir: Path) -> MultiUserDataset:
    if d.synth is not None:
        return synth.generate(**d.synth)
    paths = d.path if isinstance(d.path, list) else [d.path]
    resolved = [p if Path(p).is_absolute() else base_dir / p for p in paths]
    for p in resolved:
        if not Path(p).exists():
            raise FileNotFoundError(f"dataset {d.name!r}: file not found: {p}")
    target = resolved[0] if d.format == "preprocessed" else resolved
    return ingest(target, d.format, d.window_len, d.filter_width)


def dataset_fingerprint(data: MultiUserDataset) -> str:
    h = hashlib.sha256()
    for arr in (data.features, data.labels, data.users):
        h.update(np.ascontiguousarray(arr).tobytes())
    h.update(json.dumps([data.class_names, data.user_names, data.feature_names]).encode())
    return h.hexdigest()


@dataclass(frozen=True)
class Cell:
    index: int
    dataset: str
    classifier: ClassifierSpec
    strategy: StrategyKind

    @property
    def prefix(self) -> str:
        return f"{self.dataset}_{self.classifier.label}_{self.strategy.value}"


def cell_key(cell: Cell, fingerprint: str, cfg: ExperimentConfig) -> str:
    payload = {
        "data": fingerprint,
        "algorithm": cell.classifier.algorithm,
        "params": cell.classifier.params,
        "strategy": cell.strategy.value,
        "epsilon": cfg.epsilon,
        "repetitions": cfg.repetitions,
        "base_seed": cfg.base_seed,
    }
    return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()


@dataclass
class CellResult:
    cell: Cell
    reps: list[metrics.MetricsReport]
    per_user: list[tuple[int, str, metrics.MetricsReport]]
    first_records: list


def run_cell(data: MultiUserDataset, cell: Cell, epsilon: float, repetitions: int, base_seed: int) -> CellResult:
    reps, per_user, first = [], [], []
    for r in range(repetitions):
        records = run_strategy(data, cell.strategy, cell.classifier, epsilon, repetition_seed(base_seed, r))
        reps.append(metrics.evaluate(records, data.n_classes))
        if cell.strategy is not StrategyKind.MM:
            for u, rep in metrics.per_user(records, data.n_classes).items():
                per_user.append((r, data.user_names[u], rep))
        if r == 0:
            first = records
    return CellResult(cell, reps, per_user, first)


def _run_cell_job(args):
    return run_cell(*args)


def _sha(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _write_reps(path: Path, reps) -> None:
    names = metrics.MetricsReport.names()
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["repetition", *names])
        for r, rep in enumerate(reps):
            w.writerow([r, *(repr(getattr(rep, n)) for n in names)])


def read_reps(path) -> list[metrics.MetricsReport]:
    with open(path, newline="", encoding="utf-8") as fh:
        return [
            metrics.MetricsReport(**{k: float(v) for k, v in row.items() if k != "repetition"})
            for row in csv.DictReader(fh)
        ]


def _write_per_user(path: Path, rows) -> None:
    names = metrics.MetricsReport.names()
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["repetition", "user", *names])
        for r, user, rep in rows:
            w.writerow([r, user, *(repr(getattr(rep, n)) for n in names)])


def format_cell(values, percent: bool) -> str:
    scale = 100.0 if percent else 1.0
    mean, std = stats.aggregate([v * scale for v in values])
    return f"{mean:.2f}±{std:.2f}"


def write_table(path: Path, by_classifier: dict[str, list[metrics.MetricsReport]]) -> None:
    """Rows are metrics in report order, columns classifiers, cells mean+-std."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["metric", *by_classifier])
        for label, attr in metrics.REPORT_ROWS:
            row = [label]
            for reps in by_classifier.values():
                row.append(format_cell([getattr(r, attr) for r in reps], attr in metrics.PERCENT_METRICS))
            w.writerow(row)


def _json_safe(obj):
    if isinstance(obj, float) and not np.isfinite(obj):
        return "inf" if obj > 0 else "-inf"
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    return obj


def write_json(path: Path, payload) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(_json_safe(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _load_manifest(out: Path) -> dict:
    p = out / MANIFEST
    if not p.exists():
        return {}
    with open(p, encoding="utf-8") as fh:
        return json.load(fh).get("cells", {})


def _cached(out: Path, entry: dict | None, key: str) -> bool:
    if not entry or entry.get("key") != key:
        return False
    for name, digest in entry["files"].items():
        p = out / name
        if not p.exists() or _sha(p) != digest:
            return False
    return True


def hypotheses_from_coverage(coverage: dict) -> dict:
    return stats.hypothesis_report(coverage)


def run_experiment(cfg: ExperimentConfig, resume: bool = True) -> dict:
    """Run the whole grid and write the run directory. Returns the manifest."""
    out = Path(cfg.output)
    if not out.is_absolute():
        out = cfg.base_dir / out
    out.mkdir(parents=True, exist_ok=True)
    previous = _load_manifest(out) if resume else {}

    datasets = {d.name: load_dataset(d, cfg.base_dir) for d in cfg.datasets}
    prints = {name: dataset_fingerprint(data) for name, data in datasets.items()}
    cells, idx = [], 0
    for d in cfg.datasets:
        for spec in cfg.classifiers:
            for strat in cfg.strategies:
                cells.append(Cell(idx, d.name, spec, strat))
                idx += 1

    keys = {c.index: cell_key(c, prints[c.dataset], cfg) for c in cells}
    todo = [c for c in cells if not _cached(out, previous.get(c.prefix), keys[c.index])]
    skipped = len(cells) - len(todo)
    if skipped:
        log.info("resuming: %d of %d cells already complete", skipped, len(cells))

    jobs = [(datasets[c.dataset], c, cfg.epsilon, cfg.repetitions, cfg.base_seed) for c in todo]
    if cfg.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            results = list(pool.map(_run_cell_job, jobs))
    else:
        results = []
        for job in jobs:
            log.info("cell %s", job[1].prefix)
            results.append(_run_cell_job(job))

    manifest = {}
    for c in cells:
        if c.prefix in previous and c not in todo:
            manifest[c.prefix] = previous[c.prefix]
    # writes happen here, in cell order, whatever the pool scheduling was
    for res in sorted(results, key=lambda r: r.cell.index):
        c = res.cell
        data = datasets[c.dataset]
        files = [out / f"{c.prefix}_reps.csv", out / f"{c.prefix}_records.csv"]
        _write_reps(files[0], res.reps)
        write_records(files[1], res.first_records, data.class_names, data.user_names)
        if c.strategy is not StrategyKind.MM:
            files.append(out / f"{c.prefix}_peruser.csv")
            _write_per_user(files[-1], res.per_user)
        if cfg.viz.cells:
            files.extend(viz.write_cell_charts(out, c.prefix, res.first_records, data.class_names, cfg.viz.max_sets))
        manifest[c.prefix] = {
            "key": keys[c.index],
            "index": c.index,
            "dataset": c.dataset,
            "classifier": c.classifier.label,
            "strategy": c.strategy.value,
            "files": {p.name: _sha(p) for p in sorted(set(files))},
        }

    summarize(out, cfg, cells)
    write_json(out / MANIFEST, {"cells": {c.prefix: manifest[c.prefix] for c in cells}})
    return manifest


def _grid(out: Path, cells) -> dict:
    """dataset -> classifier -> strategy -> list of per-repetition reports."""
    grid: dict = {}
    for c in cells:
        reps = read_reps(out / f"{c.prefix}_reps.csv")
        grid.setdefault(c.dataset, {}).setdefault(c.classifier.label, {})[c.strategy.value] = reps
    return grid


def summarize(out: Path, cfg: ExperimentConfig, cells) -> None:
    grid = _grid(out, cells)
    coverage = {
        d: {clf: {s: [r.coverage for r in reps] for s, reps in by_s.items()} for clf, by_s in by_clf.items()}
        for d, by_clf in grid.items()
    }
    report = hypotheses_from_coverage(coverage)
    write_json(out / "hypotheses.json", report)
    for d, by_clf in grid.items():
        for strat in cfg.strategies:
            table = {clf: by_s[strat.value] for clf, by_s in by_clf.items() if strat.value in by_s}
            write_table(out / f"{d}_{strat.value}_table.csv", table)
        if cfg.viz.boxplot:
            for clf, by_s in by_clf.items():
                viz.write_boxplot(
                    out / f"{d}_{clf}_all_boxplot",
                    {s: [r.coverage for r in reps] for s, reps in by_s.items()},
                    report[d][clf],
                    f"{d} {clf} coverage",
                )
        if cfg.viz.lolliplot:
            lolli = {
                strat.value: {clf: float(np.mean([r.setsize for r in by_s[strat.value]])) for clf, by_s in by_clf.items()}
                for strat in cfg.strategies
            }
            viz.write_lolliplot(out / f"{d}_all_all_lolliplot", lolli, f"{d} mean set size")


def hypotheses_for_run(run_dir) -> dict:
    """Rebuild ``hypotheses.json`` from the per-repetition files of a run."""
    run_dir = Path(run_dir)
    with open(run_dir / MANIFEST, encoding="utf-8") as fh:
        cells = json.load(fh)["cells"]
    coverage: dict = {}
    for prefix, entry in cells.items():
        reps = read_reps(run_dir / f"{prefix}_reps.csv")
        coverage.setdefault(entry["dataset"], {}).setdefault(entry["classifier"], {})[entry["strategy"]] = [
            r.coverage for r in reps
        ]
    report = hypotheses_from_coverage(coverage)
    write_json(run_dir / "hypotheses.json", report)
    return report


def render_records(records_csv, chart: str, out_stem=None, max_sets: int = 20) -> list[Path]:
    """Charts for a PredictionRecord log; ``chart`` is one of cooc,
    coocgraph, zdcm, cm, multiset or ``all``."""
    records, class_names, _ = read_records(records_csv)
    if not records:
        raise ValueError(f"{records_csv}: no records")
    src = Path(records_csv)
    stem = Path(out_stem) if out_stem else src.with_name(src.stem.removesuffix("_records"))
    n = len(class_names)
    if chart == "all":
        return viz.write_cell_charts(stem.parent, stem.name, records, class_names, max_sets)
    target = stem.parent / f"{stem.name}_{chart}"
    if chart == "cooc":
        viz.write_heatmap(target, viz.cooccurrence_matrix(records, n), class_names, "co-occurrence")
    elif chart == "coocgraph":
        viz.write_graph(target, viz.cooccurrence_graph(records, n), class_names, "co-occurrence graph")
    elif chart == "zdcm":
        viz.write_heatmap(target, viz.zdcm(records, n), class_names, "zero-diagonal confusion")
    elif chart == "cm":
        viz.write_heatmap(target, metrics.confusion_matrix(records, n), class_names, "confusion", integer=True)
    elif chart == "multiset":
        viz.write_multiset(target, records, class_names, max_sets, "prediction sets")
    else:
        raise ValueError(f"unknown chart {chart!r}")
    return sorted(stem.parent.glob(f"{target.name}.*"))
