"""Window Dilemma simulator and ground-truth detectability statistics.

A window W(i, j) over a drifting stream is split at k into a left part
(t in [i, k]) and a right part (t in (k, j]).  Each part is summarised by a
histogram and the two are compared with total variation.  The true
dissimilarity S(D_i, D_j) is estimated the same way from large samples of the
generating distributions at i and j, so the sweep shows how far the windowed
picture is from the truth for each k.
"""
from __future__ import annotations

import csv
import warnings
from dataclasses import astuple, dataclass, fields
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .core import Instance, RngHandle, SampleWindow, WindowSpec
from .datasets import SyntheticDriftConfig, gaussian_drift_stream, gaussian_mean
from .errors import InputError, ScheduleError

TRUE_SAMPLES = 10_000
BIN_WIDTH = 0.25
SAMPLES_PER_STEP = 30


@dataclass(frozen=True)
class Histogram:
    edges: np.ndarray
    masses: np.ndarray

    def __post_init__(self):
        edges = np.asarray(self.edges, dtype=float)
        masses = np.asarray(self.masses, dtype=float)
        if edges.ndim != 1 or len(edges) < 2 or not np.all(np.diff(edges) > 0):
            raise InputError("histogram edges must be strictly increasing")
        if masses.shape != (len(edges) - 1,):
            raise InputError("need one mass per bin")
        if masses.min() < 0 or abs(masses.sum() - 1.0) > 1e-9:
            raise InputError("histogram masses must be non-negative and sum to 1")
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "masses", masses)


def uniform_edges(lo: float, hi: float, width: float = BIN_WIDTH) -> np.ndarray:
    if not hi > lo or not width > 0:
        raise InputError("need hi > lo and width > 0")
    n = int(round((hi - lo) / width))
    return lo + width * np.arange(n + 1)


def histogram(values, edges) -> Histogram:
    """Normalised histogram over ``edges``; values outside the range are dropped."""
    counts, _ = np.histogram(np.asarray(values, dtype=float).ravel(), bins=edges)
    total = counts.sum()
    if total == 0:
        raise InputError("no values fall inside the histogram range")
    return Histogram(edges, counts / total)


def dissimilarity(a: Histogram, b: Histogram) -> float:
    """Total variation distance 0.5 * sum |a_m - b_m| over shared bins."""
    if a.edges.shape != b.edges.shape or not np.array_equal(a.edges, b.edges):
        raise InputError("histograms must share identical bin edges")
    return float(0.5 * np.abs(a.masses - b.masses).sum())


def partition(window: SampleWindow, k: int):
    """Split into left ``t in [i, k]`` and right ``t in (k, j]``."""
    i, j = window.spec.i, window.spec.j
    if not i < k < j:
        raise InputError(f"partition requires {i} < k < {j}, got k={k}")
    left = [inst for inst in window.items if inst.t <= k]
    right = [inst for inst in window.items if inst.t > k]
    return SampleWindow(WindowSpec(i, k), left), SampleWindow(WindowSpec(k, j), right)


@dataclass
class DilemmaRecord:
    k: int
    left_mean: float
    left_std: float
    right_mean: float
    right_std: float
    n_left: int
    n_right: int
    s_emp: float
    s_true: float

    def __post_init__(self):
        if self.k < 1:
            raise InputError("k must be >= 1")


def pooled_window(streams: Sequence[Sequence[Instance]], i: int, j: int) -> SampleWindow:
    """Window W(i, j) over several replicate streams (several samples per timestep)."""
    items = [inst for s in streams for inst in s if i <= inst.t <= j]
    items.sort(key=lambda inst: inst.t)
    return SampleWindow(WindowSpec(i, j), items)


def dilemma_sweep(streams, i: int = 0, j: int = 100, ks: Optional[Sequence[int]] = None,
                  sigma: float = 1.0, mu_i: Optional[float] = None, mu_j: Optional[float] = None,
                  step_period: int = 10, mu_schedule: str = "step",
                  bin_width: float = BIN_WIDTH, true_samples: int = TRUE_SAMPLES,
                  rng: Optional[RngHandle] = None) -> list:
    """DilemmaRecords for each k; ``streams`` are replicate draws of the same drift."""
    ks = list(range(i + 1, j)) if ks is None else list(ks)
    for k in ks:
        if not i < k < j:
            raise InputError(f"k={k} outside ({i}, {j})")
    mu_i = float(gaussian_mean(i, step_period, mu_schedule)) if mu_i is None else mu_i
    mu_j = float(gaussian_mean(j, step_period, mu_schedule)) if mu_j is None else mu_j
    edges = uniform_edges(min(mu_i, mu_j) - 5 * sigma, max(mu_i, mu_j) + 5 * sigma, bin_width)
    rng = rng or RngHandle(0)
    s_true = dissimilarity(histogram(rng.gen.normal(mu_i, sigma, true_samples), edges),
                           histogram(rng.gen.normal(mu_j, sigma, true_samples), edges))
    window = pooled_window(streams, i, j)
    records = []
    for k in ks:
        left, right = partition(window, k)
        if len(left) < 2 or len(right) < 2:
            warnings.warn(f"k={k}: sub-window with fewer than 2 samples, record skipped")
            continue
        a, b = left.values().ravel(), right.values().ravel()
        s_emp = dissimilarity(histogram(a, edges), histogram(b, edges))
        records.append(DilemmaRecord(k, float(a.mean()), float(a.std(ddof=1)),
                                     float(b.mean()), float(b.std(ddof=1)),
                                     len(a), len(b), s_emp, s_true))
    return records


def replicate_streams(seed: int, samples_per_step: int = SAMPLES_PER_STEP, n_steps: int = 101,
                      mu_schedule: str = "step", sigma: float = 1.0) -> list:
    """``samples_per_step`` independent incremental-Gaussian streams from one seed."""
    if samples_per_step < 1:
        raise InputError("samples_per_step must be >= 1")
    root = RngHandle(seed)
    return [gaussian_drift_stream(SyntheticDriftConfig(n_steps, sigma, rng=root.child(),
                                                       mu_schedule=mu_schedule))
            for _ in range(samples_per_step)]


def run_dilemma(seed: int = 0, samples_per_step: int = SAMPLES_PER_STEP, ks=None,
                mu_schedule: str = "step", i: int = 0, j: int = 100) -> list:
    """Default experiment: sweep k over W(0, 100) of the incremental Gaussian stream."""
    streams = replicate_streams(seed, samples_per_step, j + 1, mu_schedule)
    return dilemma_sweep(streams, i, j, ks, mu_schedule=mu_schedule,
                         rng=RngHandle(seed).child().child())


def write_dilemma_csv(records, path, samples_per_step: Optional[int] = None):
    names = [f.name for f in fields(DilemmaRecord)]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names + (["samples_per_step"] if samples_per_step else []))
        for r in records:
            row = [repr(v) if isinstance(v, float) else v for v in astuple(r)]
            w.writerow(row + ([samples_per_step] if samples_per_step else []))


def figure_panels(streams, i: int = 0, j: int = 100, sigma: float = 1.0,
                  step_period: int = 10, mu_schedule: str = "step",
                  bin_width: float = BIN_WIDTH, true_samples: int = TRUE_SAMPLES,
                  rng: Optional[RngHandle] = None) -> dict:
    """Left/right histograms for the truth and for k = i+1, the midpoint and j-1."""
    mu_i = float(gaussian_mean(i, step_period, mu_schedule))
    mu_j = float(gaussian_mean(j, step_period, mu_schedule))
    edges = uniform_edges(min(mu_i, mu_j) - 5 * sigma, max(mu_i, mu_j) + 5 * sigma, bin_width)
    rng = rng or RngHandle(0)
    panels = {"true": (histogram(rng.gen.normal(mu_i, sigma, true_samples), edges),
                       histogram(rng.gen.normal(mu_j, sigma, true_samples), edges))}
    window = pooled_window(streams, i, j)
    for name, k in (("k_near_i", i + 1), ("k_mid", (i + j) // 2), ("k_near_j", j - 1)):
        left, right = partition(window, k)
        panels[name] = (histogram(left.values(), edges), histogram(right.values(), edges))
    return panels


def write_histograms(panels: dict, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("panel", "bin_left", "bin_right", "left_mass", "right_mass"))
        for name, (a, b) in panels.items():
            for m in range(len(a.masses)):
                w.writerow((name, repr(float(a.edges[m])), repr(float(a.edges[m + 1])),
                            repr(float(a.masses[m])), repr(float(b.masses[m]))))


# -- ground-truth detectability ------------------------------------------------

@dataclass(frozen=True)
class GroundTruthDriftStats:
    concept_id: int
    start: int
    end: int
    persistence: int
    sample_size: int
    sample_rate: float
    blip: bool


def ground_truth_stats(schedule, floor: int = 5) -> list:
    """Persistence, sample size and rate per concept; concepts below ``floor`` samples are blips.

    ``schedule`` rows are ``(concept_id, start, end, samples)`` with ``end`` exclusive.
    """
    rows = sorted(schedule, key=lambda r: r[1])
    out, prev_end = [], None
    for cid, start, end, samples in rows:
        if end <= start:
            raise ScheduleError(f"concept {cid}: end {end} must exceed start {start}")
        if prev_end is not None and start < prev_end:
            raise ScheduleError(f"concept {cid} starts at {start} before the previous one ends")
        prev_end = end
        persistence = end - start
        out.append(GroundTruthDriftStats(cid, start, end, persistence, int(samples),
                                         samples / persistence, samples < floor))
    return out
