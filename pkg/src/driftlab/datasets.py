"""Benchmark stream descriptors, file loading, and seeded synthetic streams."""
from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .core import Instance, RngHandle, StreamSchema
from .errors import ConfigError, IntegrityError, ParseError

DATA_ENV = "DRIFTLAB_DATA"


@dataclass(frozen=True)
class DatasetDescriptor:
    id: str
    name: str
    n_classes: int
    n_features: int
    n_samples: int
    reset_n: int
    retrain_n: int
    source: str


def _d(id, name, c, f, n, reset, retrain, source):
    return DatasetDescriptor(id, name, c, f, n, reset, retrain, source)


DESCRIPTORS = {
    d.id: d
    for d in [
        _d("EL", "Electricity", 2, 8, 45312, 60, 50, "elec.csv"),
        _d("FC", "Forest Covertype", 8, 54, 581012, 60, 5000, "covtype.csv"),
        _d("IA", "INSECTS-Abrupt (balanced)", 6, 33, 52848, 60, 500, "insects_abrupt_balanced.csv"),
        _d("II", "INSECTS-Incremental (balanced)", 6, 33, 57018, 60, 500, "insects_incremental_balanced.csv"),
        _d("KS", "Keystroke", 4, 10, 1600, 60, 50, "keystroke.csv"),
        _d("LX", "Luxembourg", 2, 30, 1901, 32, 50, "luxembourg.csv"),
        _d("MR", "MIRS", 2, 3600, 4260, 60, 50, "mirs.csv"),
        _d("NW", "NOAA Weather", 2, 8, 18159, 120, 50, "noaa_weather.csv"),
        _d("OZ", "Ozone", 2, 72, 2534, 84, 50, "ozone.csv"),
        _d("RT", "Rialto", 10, 27, 82250, 60, 50, "rialto.csv"),
        _d("YG", "Yoga", 2, 426, 3300, 60, 50, "yoga.csv"),
    ]
}

# FC is ~0.6M rows; default runs skip it.
DEFAULT_DATASETS = tuple(k for k in DESCRIPTORS if k != "FC")

_MISSING = {"", "?", "na", "nan", "null"}


def data_root() -> Path:
    return Path(os.environ.get(DATA_ENV, "data"))


# -- loading -----------------------------------------------------------------

def _split(line: str, delimiter: str):
    return [field.strip().strip("'\"") for field in line.split(delimiter)]


def _sniff_delimiter(line: str) -> str:
    return ";" if line.count(";") > line.count(",") else ","


def _parse_float(token: str, row: int, col: int) -> float:
    if token.lower() in _MISSING:
        raise ParseError(f"missing value in column {col}", row)
    try:
        # float() ignores locale, so "3,5" is rejected rather than misread.
        return float(token)
    except ValueError:
        raise ParseError(f"non-numeric value {token!r} in column {col}", row) from None


def _is_number(token: str) -> bool:
    try:
        float(token)
    except ValueError:
        return False
    return True


def _read_arff(lines):
    """Return attribute ``(name, nominal_values)`` pairs and numbered data lines."""
    attrs = []
    data_start = None
    for num, raw in enumerate(lines, 1):
        line = raw.strip()
        if not line or line.startswith("%"):
            continue
        low = line.lower()
        if low.startswith("@attribute"):
            rest = line[len("@attribute"):].strip()
            if rest.startswith(("'", '"')):
                q = rest[0]
                end = rest.index(q, 1)
                name, kind = rest[1:end], rest[end + 1:].strip()
            else:
                name, _, kind = rest.partition(" ")
                kind = kind.strip()
            nominal = None
            if kind.startswith("{"):
                nominal = [v.strip().strip("'\"") for v in kind.strip("{}").split(",")]
            attrs.append((name, nominal))
        elif low.startswith("@data"):
            data_start = num
            break
    if data_start is None:
        raise ParseError("ARFF file has no @data section")
    body = [(n, l) for n, l in enumerate(lines[data_start:], data_start + 1)]
    return attrs, body


def load_stream(path, descriptor: Optional[DatasetDescriptor] = None, label_column: int = -1,
                delimiter: Optional[str] = None):
    """Read a delimited-text (or ARFF) stream file.

    Returns ``(instances, schema)``.  Labels are interned to ids in order of first
    appearance unless the file declares the order, either through a nominal ARFF
    class attribute or a ``# classes: a,b,c`` comment line before the data.
    Timesteps are the 0-based row ordinals.
    """
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()

    declared = None
    header = None
    first_data = next((l for l in lines if l.strip() and not l.lstrip().startswith(("#", "%"))), None)
    if first_data is None:
        raise ParseError("file contains no data rows")

    if path.suffix.lower() == ".arff" or first_data.lower().startswith("@relation"):
        attrs, body = _read_arff(lines)
        delimiter = delimiter or ","
        header = [a[0] for a in attrs]
        try:
            declared = attrs[label_column][1]
        except IndexError:
            raise ConfigError(f"label column {label_column} not among {len(attrs)} attributes") from None
    else:
        body = []
        for num, raw in enumerate(lines, 1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, _, value = line.lstrip("#").partition(":")
                if key.strip().lower() == "classes":
                    declared = [v.strip() for v in value.split(",") if v.strip()]
                continue
            body.append((num, line))
        delimiter = delimiter or _sniff_delimiter(body[0][1])
        first = _split(body[0][1], delimiter)
        try:
            lab = range(len(first))[label_column]
        except IndexError:
            raise ConfigError(f"label column {label_column} not among {len(first)} columns") from None
        if any(not _is_number(tok) for c, tok in enumerate(first) if c != lab):
            header = first
            body = body[1:]

    rows = []
    width = None
    for num, line in body:
        line = line.strip()
        if not line or line.startswith(("%", "#")):
            continue
        fields = _split(line, delimiter)
        if width is None:
            width = len(header) if header is not None else len(fields)
            try:
                lab = range(width)[label_column]
            except IndexError:
                raise ConfigError(f"label column {label_column} not among {width} columns") from None
        if len(fields) != width:
            raise ParseError(f"expected {width} fields, found {len(fields)}", num)
        rows.append((num, fields))
    if not rows:
        raise ParseError("file contains no data rows")

    labels = list(declared) if declared else []
    index = {lab_: i for i, lab_ in enumerate(labels)}
    feats = [c for c in range(width) if c != lab]
    X = np.empty((len(rows), len(feats)))
    y = np.empty(len(rows), dtype=int)
    for r, (num, fields) in enumerate(rows):
        token = fields[lab]
        if token.lower() in _MISSING:
            raise ParseError("missing class label", num)
        if token not in index:
            if declared:
                raise ParseError(f"label {token!r} not in declared classes", num)
            index[token] = len(labels)
            labels.append(token)
        y[r] = index[token]
        vals = [fields[c] for c in feats]
        try:
            X[r] = np.array(vals, dtype=float)
        except ValueError:
            X[r] = [_parse_float(v, num, c) for v, c in zip(vals, feats)]
        if np.isnan(X[r]).any():
            col = feats[int(np.flatnonzero(np.isnan(X[r]))[0])]
            raise ParseError(f"missing value in column {col}", num)

    names = [header[c] for c in feats] if header is not None else [f"x{i}" for i in range(len(feats))]
    schema = StreamSchema(len(feats), tuple(names), tuple(labels))
    if descriptor is not None:
        _check_counts(descriptor, len(rows), schema)
    instances = [Instance(t, X[t], int(y[t])) for t in range(len(rows))]
    return instances, schema


def _check_counts(desc: DatasetDescriptor, n_rows: int, schema: StreamSchema):
    problems = []
    if n_rows != desc.n_samples:
        problems.append(f"samples expected {desc.n_samples} vs actual {n_rows}")
    if schema.n_features != desc.n_features:
        problems.append(f"features expected {desc.n_features} vs actual {schema.n_features}")
    if schema.n_classes != desc.n_classes:
        problems.append(f"classes expected {desc.n_classes} vs actual {schema.n_classes}")
    if problems:
        raise IntegrityError(f"{desc.id}: " + "; ".join(problems))


# -- manifest ----------------------------------------------------------------

@dataclass(frozen=True)
class ManifestEntry:
    id: str
    file: str
    label_column: int
    sha256: Optional[str]
    url: Optional[str]


def parse_manifest(path) -> list:
    """Parse a whitespace-separated manifest.

    One entry per line: ``ID FILE LABEL_COLUMN SHA256 URL``; ``-`` marks an
    unknown hash or URL, ``#`` starts a comment.
    """
    entries = []
    with open(path, encoding="utf-8") as fh:
        for num, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 5:
                raise ParseError(f"manifest lines need 5 fields, found {len(parts)}", num)
            id_, file, col, sha, url = parts
            try:
                col = int(col)
            except ValueError:
                raise ParseError(f"label column {col!r} is not an integer", num) from None
            entries.append(ManifestEntry(id_, file, col, None if sha == "-" else sha.lower(),
                                         None if url == "-" else url))
    return entries


def file_sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def resolve_dataset(dataset_id: str, root=None, manifest=None):
    """Locate and load a benchmark dataset by id, verifying counts (and hash if known)."""
    desc = DESCRIPTORS.get(dataset_id)
    if desc is None:
        raise ConfigError(f"unknown dataset id {dataset_id!r}")
    root = Path(root) if root is not None else data_root()
    entry = None
    if manifest:
        entry = next((e for e in manifest if e.id == dataset_id), None)
    file = entry.file if entry else desc.source
    path = root / file
    if not path.exists():
        hint = f" (manifest: file={entry.file} url={entry.url or '-'})" if entry else ""
        raise FileNotFoundError(f"dataset {dataset_id} not found at {path}{hint}")
    if entry and entry.sha256 and file_sha256(path) != entry.sha256:
        raise IntegrityError(f"{dataset_id}: sha256 mismatch for {path}")
    return load_stream(path, desc, label_column=entry.label_column if entry else -1)


# -- synthetic streams -------------------------------------------------------

DRIFT_KINDS = ("incremental_gaussian", "abrupt_class_swap", "stationary")


@dataclass
class SyntheticDriftConfig:
    n_steps: int
    sigma: float = 1.0
    step_period: int = 10
    drift_kind: str = "incremental_gaussian"
    rng: Optional[RngHandle] = None
    mu_schedule: str = "step"

    def __post_init__(self):
        if self.n_steps < 1:
            raise ConfigError("n_steps must be >= 1")
        if self.step_period < 1:
            raise ConfigError("step_period must be >= 1")
        if not self.sigma > 0:
            raise ConfigError("sigma must be > 0")
        if self.drift_kind not in DRIFT_KINDS:
            raise ConfigError(f"drift_kind must be one of {DRIFT_KINDS}")
        if self.mu_schedule not in ("step", "ramp"):
            raise ConfigError("mu_schedule must be 'step' or 'ramp'")
        if self.rng is None:
            self.rng = RngHandle(0)


def gaussian_mean(t, step_period: int = 10, schedule: str = "step"):
    """Mean of the incremental Gaussian stream at timestep(s) ``t``.

    ``step`` holds mu constant between updates: floor(t / p) * (p / 10).
    ``ramp`` moves continuously: t / 10.
    """
    t = np.asarray(t, dtype=float)
    if schedule == "ramp":
        return t / 10.0
    return np.floor(t / step_period) * (step_period / 10.0)


def gaussian_drift_stream(cfg: SyntheticDriftConfig) -> list:
    """Unlabeled one-feature stream with X_t ~ N(mu_t, sigma^2)."""
    if cfg.drift_kind == "abrupt_class_swap":
        raise ConfigError("use abrupt_class_stream for class-swap drift")
    t = np.arange(cfg.n_steps)
    if cfg.drift_kind == "stationary":
        mu = np.zeros(cfg.n_steps)
    else:
        mu = gaussian_mean(t, cfg.step_period, cfg.mu_schedule)
    x = cfg.rng.gen.normal(mu, cfg.sigma)
    return [Instance(int(i), (float(v),)) for i, v in zip(t, x)]


def gaussian_concept_schedule(cfg: SyntheticDriftConfig, samples_per_step: int = 1) -> list:
    """``(concept_id, start, end, samples)`` for each constant-mean segment; end is exclusive."""
    if cfg.drift_kind == "stationary" or cfg.mu_schedule == "ramp":
        # ramp: every timestep is its own concept
        period = cfg.n_steps if cfg.drift_kind == "stationary" else 1
    else:
        period = cfg.step_period
    out = []
    for cid, start in enumerate(range(0, cfg.n_steps, period)):
        end = min(start + period, cfg.n_steps)
        out.append((cid, start, end, (end - start) * samples_per_step))
    return out


def abrupt_class_stream(n_steps: int, switch_t: int, rng: RngHandle) -> list:
    """Two-class, two-feature stream whose class-conditional means swap at ``switch_t``.

    Labels alternate 0, 1, 0, ...  Class 0 is centred at (0, 0) and class 1 at
    (3, 3) with unit variance until ``switch_t``; from then on the centres swap.
    """
    if not 0 < switch_t < n_steps:
        raise ConfigError("need 0 < switch_t < n_steps")
    y = np.arange(n_steps) % 2
    centre = np.where((y == 1) ^ (np.arange(n_steps) >= switch_t), 3.0, 0.0)
    X = rng.gen.normal(0.0, 1.0, size=(n_steps, 2)) + centre[:, None]
    return [Instance(t, X[t], int(y[t])) for t in range(n_steps)]


def blocked_class_stream(n_blocks: int, n_classes: int, n_features: int, rng: RngHandle,
                         separation: float = 3.0, drift_every: int = 50) -> list:
    """Stream delivered in blocks holding one instance of every class in a fixed order.

    Mimics Keystroke-style data: labels cycle 0..C-1, so label autocorrelation is
    nil and a majority-class stand-in scores about 1/C.  Every ``drift_every``
    blocks each class centre takes a random step of size ``separation / 2``.
    """
    centres = rng.gen.normal(0.0, separation, size=(n_classes, n_features))
    out = []
    t = 0
    for b in range(n_blocks):
        if b and b % drift_every == 0:
            step = rng.gen.normal(size=(n_classes, n_features))
            step *= (separation / 2) / np.linalg.norm(step, axis=1, keepdims=True)
            centres = centres + step
        noise = rng.gen.normal(size=(n_classes, n_features))
        for c in range(n_classes):
            out.append(Instance(t, centres[c] + noise[c], c))
            t += 1
    return out


def stationary_gaussian_stream(n_steps: int, n_features: int, rng: RngHandle,
                               means=None, labels=None) -> list:
    """Multivariate N(means, I) stream, optionally labeled."""
    means = np.zeros(n_features) if means is None else np.asarray(means, dtype=float)
    X = rng.gen.normal(size=(n_steps, n_features)) + means
    return [Instance(t, X[t], None if labels is None else int(labels[t])) for t in range(n_steps)]


def synthetic_dataset(dataset_id: str, seed: int):
    """Built-in synthetic benchmark streams usable wherever a dataset id is accepted.

    ``SYN-ABRUPT``: 3,000 instances, class swap at 1,500.
    ``SYN-BLOCKED``: 250 blocks of 4 classes, 10 features.
    ``SYN-GAUSS``: two 5-feature Gaussian classes whose means drift by one unit every 500.
    """
    rng = RngHandle(seed)
    if dataset_id == "SYN-ABRUPT":
        return abrupt_class_stream(3000, 1500, rng), StreamSchema.anonymous(2, 2)
    if dataset_id == "SYN-BLOCKED":
        return blocked_class_stream(250, 4, 10, rng), StreamSchema.anonymous(10, 4)
    if dataset_id == "SYN-GAUSS":
        n = 3000
        y = rng.gen.integers(0, 2, size=n)
        shift = np.floor(np.arange(n) / 500)[:, None]
        X = rng.gen.normal(size=(n, 5)) + np.where(y[:, None] == 1, 1.5, -1.5) + shift
        return [Instance(t, X[t], int(y[t])) for t in range(n)], StreamSchema.anonymous(5, 2)
    raise ConfigError(f"unknown synthetic dataset {dataset_id!r}")


SYNTHETIC_DATASETS = ("SYN-ABRUPT", "SYN-BLOCKED", "SYN-GAUSS")


def schedule_for(dataset_id: str):
    """``(reset_n, retrain_n)`` for a dataset id; synthetic streams use the common 60/50."""
    desc = DESCRIPTORS.get(dataset_id)
    return (desc.reset_n, desc.retrain_n) if desc else (60, 50)


def load_dataset(dataset_id: str, seed: int = 0, root=None, manifest=None):
    """``(instances, schema)`` for a benchmark or synthetic dataset id.

    Synthetic streams are generated from ``seed``; real ones are read from disk.
    """
    if dataset_id in SYNTHETIC_DATASETS:
        return synthetic_dataset(dataset_id, seed)
    return resolve_dataset(dataset_id, root, manifest)
