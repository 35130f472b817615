"""Prequential evaluation, metrics, median ranks and report files.

Headline accuracy is cumulative: correct predictions / scored predictions.
The time-average of the running-accuracy curve is reported alongside it.
Kappa is computed from the cumulative confusion matrix; a windowed variant
(mean kappa over consecutive windows) is available for sensitivity checks.
"""
from __future__ import annotations

import csv
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Optional

import numpy as np
from scipy.stats import rankdata

from .adaptation import AdaptiveModel, technique_config
from .core import derive_seed
from .datasets import load_dataset
from .detectors import EventLog
from .errors import DriftlabError, InputError, IntegrityError, UndefinedMetricError

HEADLINE_ACCURACY = "cumulative (correct / scored)"


class MetricTrace:
    """Per-step record of scored predictions for one run."""

    def __init__(self, n_classes: int):
        self.n_classes = n_classes
        self._y = []
        self._pred = []
        self.confusion = np.zeros((n_classes, n_classes), dtype=np.int64)

    def add(self, y: int, pred: int):
        self._y.append(int(y))
        self._pred.append(int(pred))
        self.confusion[y, pred] += 1

    @property
    def n(self) -> int:
        return len(self._y)

    def __len__(self):
        return self.n

    @property
    def y(self) -> np.ndarray:
        return np.array(self._y, dtype=np.int64)

    @property
    def predictions(self) -> np.ndarray:
        return np.array(self._pred, dtype=np.int64)

    @property
    def correct(self) -> np.ndarray:
        return (self.y == self.predictions).astype(np.int8)


def prequential_run(model: AdaptiveModel, stream) -> MetricTrace:
    """Test-then-train over ``stream``; unscored (warm-start) steps are skipped."""
    trace = MetricTrace(model.schema.n_classes)
    for inst in stream:
        res = model.step(inst)
        if res.prediction is not None:
            trace.add(inst.y, res.prediction)
    return trace


def mean_accuracy(trace: MetricTrace) -> float:
    if trace.n == 0:
        raise UndefinedMetricError("mean accuracy of an empty trace")
    return float(trace.correct.sum()) / trace.n


def running_mean_accuracy(trace: MetricTrace) -> float:
    """Time-average of the running accuracy curve."""
    if trace.n == 0:
        raise UndefinedMetricError("running accuracy of an empty trace")
    c = np.cumsum(trace.correct) / np.arange(1, trace.n + 1)
    return float(c.mean())


def cohen_kappa(confusion) -> float:
    m = np.asarray(confusion, dtype=float)
    total = m.sum()
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InputError("confusion matrix must be square")
    if total <= 0:
        raise UndefinedMetricError("kappa of an empty confusion matrix")
    p_o = np.trace(m) / total
    p_e = float((m.sum(axis=1) * m.sum(axis=0)).sum()) / (total * total)
    if p_e == 1.0:
        return 0.0
    return float((p_o - p_e) / (1.0 - p_e))


def confusion_from(y, pred, n_classes: int) -> np.ndarray:
    m = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(m, (np.asarray(y), np.asarray(pred)), 1)
    return m


def windowed_kappa(trace: MetricTrace, window: int = 1000) -> float:
    """Mean kappa over consecutive windows; a trailing partial window counts only if alone."""
    if trace.n == 0:
        raise UndefinedMetricError("kappa of an empty trace")
    if window < 1:
        raise InputError("window must be >= 1")
    y, p = trace.y, trace.predictions
    starts = range(0, trace.n, window)
    chunks = [(s, min(s + window, trace.n)) for s in starts]
    if len(chunks) > 1 and chunks[-1][1] - chunks[-1][0] < window:
        chunks.pop()
    return float(np.mean([cohen_kappa(confusion_from(y[a:b], p[a:b], trace.n_classes))
                          for a, b in chunks]))


# -- results -----------------------------------------------------------------

@dataclass
class CellResult:
    technique: str
    dataset: str
    seed: int = 0
    start_mode: str = "-"
    n_instances: int = 0
    n_scored: int = 0
    accuracy: Optional[float] = None
    running_accuracy: Optional[float] = None
    kappa: Optional[float] = None
    windowed_kappa: Optional[float] = None
    resets: int = 0
    retrains: int = 0
    warnings: int = 0
    drifts: int = 0
    runtime: float = 0.0


CELL_COLUMNS = tuple(f.name for f in fields(CellResult) if f.name != "runtime")


class ResultsMatrix:
    """Mapping ``(technique, dataset) -> CellResult``."""

    def __init__(self, cells=()):
        self.cells = {}
        for c in cells:
            self.add(c)

    def add(self, cell: CellResult):
        self.cells[(cell.technique, cell.dataset)] = cell

    def get(self, technique, dataset) -> CellResult:
        cell = self.cells.get((technique, dataset))
        if cell is None:
            raise IntegrityError(f"missing cell ({technique}, {dataset})")
        return cell

    def __len__(self):
        return len(self.cells)

    def __eq__(self, other):
        return isinstance(other, ResultsMatrix) and self.cells == other.cells

    @property
    def techniques(self):
        return list(dict.fromkeys(t for t, _ in self.cells))

    @property
    def datasets(self):
        return list(dict.fromkeys(d for _, d in self.cells))

    @classmethod
    def from_accuracy_table(cls, table: dict) -> "ResultsMatrix":
        """Build from ``{technique: {dataset: accuracy}}``."""
        return cls(CellResult(t, d, accuracy=a) for t, row in table.items() for d, a in row.items())


def median_rank(results: ResultsMatrix, techniques, datasets, metric: str = "accuracy") -> dict:
    """Median across datasets of each technique's descending-accuracy rank (ties averaged)."""
    techniques, datasets = list(techniques), list(datasets)
    if not techniques or not datasets:
        raise InputError("median_rank needs at least one technique and one dataset")
    table = np.empty((len(techniques), len(datasets)))
    for i, t in enumerate(techniques):
        for j, d in enumerate(datasets):
            v = getattr(results.get(t, d), metric)
            if v is None:
                raise IntegrityError(f"cell ({t}, {d}) has no {metric}")
            table[i, j] = v
    ranks = np.column_stack([rankdata(-table[:, j], method="average") for j in range(len(datasets))])
    return {t: float(statistics.median(ranks[i])) for i, t in enumerate(techniques)}


# -- cell execution ------------------------------------------------------------

@dataclass(frozen=True)
class CellTask:
    technique: str
    dataset: str
    master_seed: int = 42
    start_mode: str = "cold"
    kappa_window: int = 1000
    data_root: Optional[str] = None
    manifest: Optional[tuple] = None


@dataclass
class CellFailure:
    technique: str
    dataset: str
    message: str


_DATA_CACHE = {}


def _dataset(task: CellTask):
    key = (task.dataset, task.master_seed, task.data_root, task.manifest)
    if key not in _DATA_CACHE:
        _DATA_CACHE.clear()
        seed = derive_seed(task.master_seed, "stream", task.dataset)
        _DATA_CACHE[key] = load_dataset(task.dataset, seed, task.data_root,
                                        list(task.manifest) if task.manifest else None)
    return _DATA_CACHE[key]


def run_cell(task: CellTask, stream=None, schema=None):
    """Run one cell; returns ``(CellResult, EventLog)``."""
    if stream is None:
        stream, schema = _dataset(task)
    cfg = technique_config(task.technique, task.dataset, task.start_mode)
    seed = derive_seed(task.master_seed, task.technique, task.dataset)
    model = AdaptiveModel(cfg, schema, seed)
    t0 = time.perf_counter()
    trace = prequential_run(model, stream)
    runtime = time.perf_counter() - t0
    ev = model.events
    cell = CellResult(
        task.technique, task.dataset, seed,
        cfg.start if cfg.start else "-",
        len(stream), trace.n,
        mean_accuracy(trace) if trace.n else None,
        running_mean_accuracy(trace) if trace.n else None,
        cohen_kappa(trace.confusion) if trace.n else None,
        windowed_kappa(trace, task.kappa_window) if trace.n else None,
        ev.count("reset"), ev.count("retrain"), ev.count("warning"), ev.count("drift"),
        runtime,
    )
    return cell, ev


def _run_safe(task: CellTask):
    try:
        cell, ev = run_cell(task)
        return cell, ev.rows, None
    except (DriftlabError, OSError, ValueError) as exc:
        return None, [], CellFailure(task.technique, task.dataset, f"{type(exc).__name__}: {exc}")


def run_matrix(tasks, workers: int = 1):
    """Run cells serially or on a process pool; output order follows ``tasks``.

    Returns ``(ResultsMatrix, {(technique, dataset): event rows}, [CellFailure])``.
    """
    tasks = list(tasks)
    # group by dataset so each worker reloads a stream as rarely as possible
    order = sorted(range(len(tasks)), key=lambda i: (tasks[i].dataset, i))
    ordered = [tasks[i] for i in order]
    if workers <= 1:
        outs = [_run_safe(t) for t in ordered]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outs = list(pool.map(_run_safe, ordered, chunksize=1))
    by_index = dict(zip(order, outs))
    results, events, failures = ResultsMatrix(), {}, []
    for i, task in enumerate(tasks):
        cell, rows, fail = by_index[i]
        if fail:
            failures.append(fail)
        else:
            results.add(cell)
            events[(task.technique, task.dataset)] = rows
    return results, events, failures


# -- rendering -----------------------------------------------------------------

def format_number(value: float, decimal: str = ",", digits: int = 1) -> str:
    s = f"{value:.{digits}f}"
    return s.replace(".", decimal) if decimal != "." else s


def format_rank(rank: float, decimal: str = ",") -> str:
    return str(int(rank)) if float(rank).is_integer() else format_number(rank, decimal)


def render_table(results: ResultsMatrix, techniques, datasets, metric: str = "accuracy",
                 decimal: str = ",", title: str = "") -> str:
    """Plain-text table of ``metric`` x100 with a MedRank column when the matrix is complete."""
    techniques, datasets = list(techniques), list(datasets)
    try:
        ranks = median_rank(results, techniques, datasets, metric)
    except (IntegrityError, InputError):
        ranks = None
    header = ["Technique"] + datasets + (["MedRank"] if ranks else [])
    rows = []
    for t in techniques:
        row = [t]
        for d in datasets:
            cell = results.cells.get((t, d))
            v = getattr(cell, metric) if cell else None
            row.append("-" if v is None else format_number(100 * v, decimal))
        if ranks:
            row.append(format_rank(ranks[t], decimal))
        rows.append(row)
    widths = [max(len(r[i]) for r in [header] + rows) for i in range(len(header))]
    fmt = lambda r: "  ".join(c.ljust(w) if i == 0 else c.rjust(w)
                              for i, (c, w) in enumerate(zip(r, widths)))
    lines = ([title] if title else []) + [fmt(header), "-" * len(fmt(header))]
    lines += [fmt(r) for r in rows]
    return "\n".join(lines) + "\n"


def parse_rendered_ranks(text: str, section: str = "Accuracy") -> dict:
    """Read the MedRank column of a rendered table back as ``{technique: str}``."""
    lines = text.splitlines()
    start = next(i for i, l in enumerate(lines) if l.startswith(section))
    header = lines[start + 1].split()
    col = header.index("MedRank")
    out = {}
    for line in lines[start + 3:]:
        if not line.strip():
            break
        parts = line.split()
        out[parts[0]] = parts[col]
    return out


def _fmt_csv(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def emit_report(results: ResultsMatrix, out_dir, techniques=None, datasets=None,
                decimal: str = ",", events: Optional[dict] = None,
                config_echo: Optional[str] = None) -> dict:
    """Write ``cells.csv``, ``tables.txt``, ``timings.csv`` and optionally
    ``events.csv`` and ``config-echo`` into ``out_dir``; returns the paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    techniques = list(techniques or results.techniques)
    datasets = list(datasets or results.datasets)
    paths = {}

    paths["cells"] = out / "cells.csv"
    with open(paths["cells"], "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CELL_COLUMNS)
        for t in techniques:
            for d in datasets:
                cell = results.cells.get((t, d))
                if cell is not None:
                    row = asdict(cell)
                    w.writerow([_fmt_csv(row[c]) for c in CELL_COLUMNS])

    # wall-clock times vary run to run, so they stay out of cells.csv
    paths["timings"] = out / "timings.csv"
    with open(paths["timings"], "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("technique", "dataset", "runtime_s"))
        for (t, d), cell in results.cells.items():
            w.writerow((t, d, f"{cell.runtime:.3f}"))

    parts = [render_table(results, techniques, datasets, "accuracy", decimal,
                          f"Accuracy x100, headline accuracy: {HEADLINE_ACCURACY}")]
    if any(c.kappa is not None for c in results.cells.values()):
        parts.append(render_table(results, techniques, datasets, "kappa", decimal,
                                  "Kappa x100, cumulative confusion matrix"))
    if any(c.running_accuracy is not None for c in results.cells.values()):
        parts.append(render_table(results, techniques, datasets, "running_accuracy", decimal,
                                  "Running-accuracy time average x100"))
    paths["tables"] = out / "tables.txt"
    paths["tables"].write_text("\n".join(parts))

    if events is not None:
        paths["events"] = out / "events.csv"
        first = True
        for t in techniques:
            for d in datasets:
                log = EventLog()
                log.rows = list(events.get((t, d), []))
                log.write(paths["events"], cell=f"{t}/{d}", append=not first)
                first = False
        if first:
            EventLog().write(paths["events"])
    if config_echo is not None:
        paths["config"] = out / "config-echo"
        paths["config"].write_text(config_echo)
    return paths
