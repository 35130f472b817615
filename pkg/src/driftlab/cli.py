"""Command-line entry point.

Subcommands::

    driftlab bench              run the technique x dataset matrix
    driftlab dilemma            run the Window Dilemma sweep
    driftlab validate-datasets  check dataset files against the manifest

Every option may also come from a sectioned key/value file (``--config``, one
section per subcommand, keys spelled like the flags with underscores).  Flags
override the file.  The resolved configuration is echoed into the results
directory and can be fed back with ``--config`` to repeat the run.

Exit codes: 0 success, 1 failed cells or datasets, 2 usage/config errors.
"""
from __future__ import annotations

import argparse
import configparser
import io
import os
import sys
import warnings
from pathlib import Path

from .adaptation import TECHNIQUES
from .datasets import (DATA_ENV, DEFAULT_DATASETS, DESCRIPTORS, SYNTHETIC_DATASETS, data_root,
                       file_sha256, load_stream, parse_manifest)
from .dilemma import (SAMPLES_PER_STEP, figure_panels, replicate_streams, dilemma_sweep,
                      write_dilemma_csv, write_histograms)
from .core import RngHandle
from .errors import ConfigError, DriftlabError
from .evaluation import CellTask, emit_report, run_matrix

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
DEFAULT_MANIFEST = "data/manifest.txt"


def _csv_list(text):
    return [p.strip() for p in str(text).split(",") if p.strip()]


def _bool(text):
    if isinstance(text, bool):
        return text
    v = str(text).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


# key -> (converter, default); defaults of None are resolved later
BENCH_KEYS = {
    "techniques": (_csv_list, list(TECHNIQUES)),
    "datasets": (_csv_list, None),
    "seed": (int, 42),
    "workers": (int, 1),
    "start_mode": (str, "cold"),
    "out": (str, "results"),
    "run_id": (str, None),
    "full": (_bool, False),
    "kappa_window": (int, 1000),
    "decimal": (str, ","),
    "data_root": (str, None),
    "manifest": (str, None),
}

DILEMMA_KEYS = {
    "samples_per_step": (int, SAMPLES_PER_STEP),
    "k": (str, "1-99"),
    "i": (int, 0),
    "j": (int, 100),
    "seed": (int, 0),
    "mu_schedule": (str, "step"),
    "out": (str, "results/dilemma"),
    "emit_histograms": (_bool, False),
}


def _resolve(section, keys, args):
    """Merge built-in defaults, the config file section and explicit flags."""
    values = {k: default for k, (_, default) in keys.items()}
    if getattr(args, "config", None):
        cp = configparser.ConfigParser()
        if not cp.read(args.config):
            raise ConfigError(f"cannot read config file {args.config}")
        if cp.has_section(section):
            for key, raw in cp.items(section):
                key = key.replace("-", "_")
                if key not in keys:
                    raise ConfigError(f"unknown key {key!r} in [{section}]")
                try:
                    values[key] = keys[key][0](raw) if raw != "" else None
                except ValueError as exc:
                    raise ConfigError(f"[{section}] {key}: {exc}") from None
    for key, (conv, _) in keys.items():
        v = getattr(args, key, None)
        if v is not None:
            values[key] = conv(v) if conv in (_csv_list,) else v
    return values


def _echo(section, values):
    cp = configparser.ConfigParser()
    cp[section] = {k: ",".join(v) if isinstance(v, list) else ("" if v is None else str(v))
                   for k, v in values.items()}
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()


# -- bench -----------------------------------------------------------------------

def _load_manifest(path, explicit):
    if path is None:
        return None
    if not Path(path).exists():
        if explicit:
            raise ConfigError(f"manifest {path} not found")
        return None
    return tuple(parse_manifest(path))


def cmd_bench(args) -> int:
    cfg = _resolve("bench", BENCH_KEYS, args)
    unknown = [t for t in cfg["techniques"] if t not in TECHNIQUES]
    if unknown:
        raise ConfigError(f"unknown technique ids: {','.join(unknown)}")
    if cfg["datasets"] is None:
        cfg["datasets"] = list(DEFAULT_DATASETS) + (["FC"] if cfg["full"] else [])
    unknown = [d for d in cfg["datasets"] if d not in DESCRIPTORS and d not in SYNTHETIC_DATASETS]
    if unknown:
        raise ConfigError(f"unknown dataset ids: {','.join(unknown)}")
    if cfg["start_mode"] not in ("warm", "cold"):
        raise ConfigError("start_mode must be warm or cold")
    if cfg["workers"] < 1:
        raise ConfigError("workers must be >= 1")
    if cfg["kappa_window"] < 1:
        raise ConfigError("kappa_window must be >= 1")
    if cfg["decimal"] not in (",", "."):
        raise ConfigError("decimal must be ',' or '.'")
    if cfg["run_id"] is None:
        cfg["run_id"] = f"seed{cfg['seed']}"
    explicit_manifest = cfg["manifest"] is not None
    if cfg["data_root"] is None:
        cfg["data_root"] = str(data_root())
    if cfg["manifest"] is None:
        cfg["manifest"] = DEFAULT_MANIFEST
    manifest = _load_manifest(cfg["manifest"], explicit_manifest)

    tasks = [CellTask(t, d, cfg["seed"], cfg["start_mode"], cfg["kappa_window"],
                      cfg["data_root"], manifest)
             for t in cfg["techniques"] for d in cfg["datasets"]]
    results, events, failures = run_matrix(tasks, cfg["workers"])
    out = Path(cfg["out"]) / cfg["run_id"]
    paths = emit_report(results, out, cfg["techniques"], cfg["datasets"], cfg["decimal"],
                        events, _echo("bench", cfg))
    print(f"{len(results)}/{len(tasks)} cells written to {paths['cells']}")
    if failures:
        print(f"{len(failures)} cell(s) failed:", file=sys.stderr)
        for f in failures:
            print(f"  {f.technique}/{f.dataset}: {f.message}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


# -- dilemma ---------------------------------------------------------------------

def parse_k_grid(text: str, i: int, j: int) -> list:
    """``"50"``, ``"10,20,30"`` or an inclusive range ``"1-99"`` / ``"1:99"``."""
    ks = []
    try:
        for part in _csv_list(text):
            sep = "-" if "-" in part[1:] else (":" if ":" in part else None)
            if sep:
                a, b = part.split(sep, 1)
                ks.extend(range(int(a), int(b) + 1))
            else:
                ks.append(int(part))
    except ValueError:
        raise ConfigError(f"invalid k grid {text!r}") from None
    if not ks:
        raise ConfigError("empty k grid")
    bad = [k for k in ks if not i < k < j]
    if bad:
        raise ConfigError(f"k values must lie strictly between {i} and {j}: {bad[:5]}")
    return sorted(set(ks))


def cmd_dilemma(args) -> int:
    cfg = _resolve("dilemma", DILEMMA_KEYS, args)
    if cfg["mu_schedule"] not in ("step", "ramp"):
        raise ConfigError("mu_schedule must be step or ramp")
    if cfg["samples_per_step"] < 1:
        raise ConfigError("samples_per_step must be >= 1")
    if not 0 <= cfg["i"] < cfg["j"]:
        raise ConfigError("need 0 <= i < j")
    ks = parse_k_grid(cfg["k"], cfg["i"], cfg["j"])
    streams = replicate_streams(cfg["seed"], cfg["samples_per_step"], cfg["j"] + 1,
                                cfg["mu_schedule"])
    rng = RngHandle(cfg["seed"]).child().child()
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        records = dilemma_sweep(streams, cfg["i"], cfg["j"], ks,
                                mu_schedule=cfg["mu_schedule"], rng=rng)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    write_dilemma_csv(records, out / "dilemma.csv", cfg["samples_per_step"])
    if cfg["emit_histograms"]:
        panels = figure_panels(streams, cfg["i"], cfg["j"], mu_schedule=cfg["mu_schedule"],
                               rng=RngHandle(cfg["seed"]).child().child())
        write_histograms(panels, out / "histograms.csv")
    (out / "config-echo").write_text(_echo("dilemma", cfg))
    print(f"{len(records)} records written to {out / 'dilemma.csv'}")
    return EXIT_OK


# -- validate-datasets -------------------------------------------------------------

def cmd_validate(args) -> int:
    entries = parse_manifest(args.manifest)
    if not entries:
        raise ConfigError(f"manifest {args.manifest} lists no datasets")
    root = Path(args.data_root) if args.data_root else data_root()
    rows, failed = [], 0
    for e in entries:
        desc = DESCRIPTORS.get(e.id)
        path = root / e.file
        if desc is None:
            status, note = "FAIL", "unknown dataset id"
        elif not path.exists():
            status, note = "FAIL", f"missing {path} (url: {e.url or '-'})"
        elif e.sha256 and file_sha256(path) != e.sha256:
            status, note = "FAIL", "sha256 mismatch"
        else:
            try:
                load_stream(path, desc, e.label_column)
                status, note = "PASS", f"{desc.n_samples} samples"
            except DriftlabError as exc:
                status, note = "FAIL", str(exc)
        failed += status == "FAIL"
        rows.append((e.id, status, note))
    width = max(len(r[0]) for r in rows)
    for id_, status, note in rows:
        print(f"{id_.ljust(width)}  {status}  {note}")
    return EXIT_FAIL if failed else EXIT_OK


# -- parser ------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="driftlab", description=__doc__.split("\n\n")[0])
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bench", help="run the benchmark matrix")
    b.add_argument("--config", help="sectioned key/value config file")
    b.add_argument("--techniques", help="comma-separated technique ids")
    b.add_argument("--datasets", help="comma-separated dataset ids (SYN-* allowed)")
    b.add_argument("--seed", type=int, help="master seed (default 42)")
    b.add_argument("--workers", type=int, help="worker processes (default 1)")
    b.add_argument("--start-mode", dest="start_mode", choices=("warm", "cold"))
    b.add_argument("--out", help="results root (default results)")
    b.add_argument("--run-id", dest="run_id", help="results subdirectory (default seed<N>)")
    b.add_argument("--full", action="store_const", const=True, help="include FC")
    b.add_argument("--kappa-window", dest="kappa_window", type=int)
    b.add_argument("--decimal", choices=(",", "."), help="decimal mark in tables.txt")
    b.add_argument("--data-root", dest="data_root", help=f"dataset directory (env {DATA_ENV})")
    b.add_argument("--manifest", help=f"dataset manifest (default {DEFAULT_MANIFEST})")
    b.set_defaults(func=cmd_bench)

    d = sub.add_parser("dilemma", help="run the Window Dilemma sweep")
    d.add_argument("--config", help="sectioned key/value config file")
    d.add_argument("--samples-per-step", dest="samples_per_step", type=int)
    d.add_argument("--k", help="k grid: 50, 10,20,30 or 1-99")
    d.add_argument("--i", type=int, help="window start (default 0)")
    d.add_argument("--j", type=int, help="window end (default 100)")
    d.add_argument("--seed", type=int)
    d.add_argument("--mu-schedule", dest="mu_schedule", choices=("step", "ramp"))
    d.add_argument("--out", help="output directory (default results/dilemma)")
    d.add_argument("--emit-histograms", dest="emit_histograms", action="store_const", const=True)
    d.set_defaults(func=cmd_dilemma)

    v = sub.add_parser("validate-datasets", help="check dataset files against the manifest")
    v.add_argument("--manifest", default=DEFAULT_MANIFEST)
    v.add_argument("--data-root", dest="data_root", default=os.environ.get(DATA_ENV))
    v.set_defaults(func=cmd_validate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"driftlab {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DriftlabError, OSError) as exc:
        print(f"driftlab {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
