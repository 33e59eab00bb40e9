"""Report emission: plot-ready CSV/JSON files derived from a result store."""
from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Iterable

import numpy as np

from .bench import Task, aggregate, best_fraction
from .corpus import CorpusManifest
from .detect import Method
from .diagnose import classify_fit, k_size_trend, method_similarity
from .pipeline import ResultStore

__all__ = ["REPORT_KINDS", "ReportError", "emit_report"]

REPORT_KINDS = ("curves", "similarity", "ktrend", "bestfrac", "diagnosis", "domains")


class ReportError(RuntimeError):
    """A report's prerequisite records are missing from the store."""


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _write_csv(path: Path, header: list[str], rows: Iterable[Iterable]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(x) for x in row])


def _require_tasks(store: ResultStore):
    results = store.task_results()
    if not results:
        raise ReportError("no task records in the store; run the `bench` "
                          "subcommand first")
    return results


def _require_detects(store: ResultStore) -> list[dict]:
    records = [r for r in store.detect_records() if r.get("ok", True)]
    if not records:
        raise ReportError("no detect records in the store; run the `detect` "
                          "subcommand first")
    return records


def emit_report(store: ResultStore, kinds: Iterable[str], out_dir: Path,
                manifest: CorpusManifest | None = None,
                tol: float = 0.05) -> dict[str, list[str]]:
    """Write the requested report files and an index of everything emitted.

    Returns {kind: [relative file paths]}.  ``domains`` needs the corpus
    manifest for the network -> domain map.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    emitted: dict[str, list[str]] = {}
    for kind in kinds:
        if kind not in REPORT_KINDS:
            raise ValueError(f"unknown report kind {kind!r}; expected one of "
                             f"{', '.join(REPORT_KINDS)}")
        fn = globals()[f"_emit_{kind}"]
        if kind == "domains":
            files = fn(store, out_dir, manifest)
        elif kind == "bestfrac":
            files = fn(store, out_dir, tol)
        else:
            files = fn(store, out_dir)
        emitted[kind] = files
    index_path = out_dir / "manifest.json"
    index = {kind: sorted(files) for kind, files in sorted(emitted.items())}
    index_path.write_text(json.dumps(index, indent=2, sort_keys=True) + "\n",
                          encoding="utf-8")
    for kind in emitted:
        emitted[kind] = sorted(emitted[kind])
    return emitted


def _emit_curves(store: ResultStore, out_dir: Path) -> list[str]:
    results = _require_tasks(store)
    curves = aggregate(results, "method")
    rows = []
    for (method, task, mode), curve in curves.items():
        for alpha, mean, stderr, n in curve.points:
            rows.append([method.value, task.value, mode.value, alpha, mean,
                         stderr, n])
    _write_csv(out_dir / "curves.csv",
               ["method", "task", "mode", "alpha", "mean_auc", "stderr", "n"], rows)
    return ["curves.csv"]


def _emit_domains(store: ResultStore, out_dir: Path,
                  manifest: CorpusManifest | None) -> list[str]:
    if manifest is None:
        raise ReportError("the domains report needs the corpus manifest")
    results = _require_tasks(store)
    curves = aggregate(results, "method_domain", domains=manifest.domains())
    rows = []
    for (method, task, mode, domain), curve in curves.items():
        for alpha, mean, stderr, n in curve.points:
            rows.append([domain, method.value, task.value, mode.value, alpha,
                         mean, stderr, n])
    _write_csv(out_dir / "curves_by_domain.csv",
               ["domain", "method", "task", "mode", "alpha", "mean_auc",
                "stderr", "n"], rows)
    return ["curves_by_domain.csv"]


def _emit_ktrend(store: ResultStore, out_dir: Path) -> list[str]:
    records = _require_detects(store)
    rows = []
    for axis, field in (("N", "n_nodes"), ("M", "m_edges")):
        entries = [(Method(r["method"]), int(r["k"]), float(r[field]))
                   for r in records]
        for b in k_size_trend(entries):
            rows.append([axis, b.method.value, b.lo, b.hi, b.center, b.mean_k,
                         b.max_k, b.reference, b.count])
    _write_csv(out_dir / "ktrend.csv",
               ["axis", "method", "bin_lo", "bin_hi", "bin_center", "mean_k",
                "max_k", "reference", "n"], rows)
    return ["ktrend.csv"]


def _pick_mode(results):
    """Reports that compare methods head-to-head use one score mode; prefer
    the model-specific records when a store holds both."""
    from .score import ScoreMode

    modes = {r.mode for r in results}
    mode = ScoreMode.MODEL_SPECIFIC if ScoreMode.MODEL_SPECIFIC in modes \
        else sorted(modes, key=lambda m: m.value)[0]
    return [r for r in results if r.mode is mode]


def _emit_bestfrac(store: ResultStore, out_dir: Path, tol: float) -> list[str]:
    results = _pick_mode(_require_tasks(store))
    frac = best_fraction(results, Task.PREDICTION, tol=tol)
    rows = []
    for method, by_alpha in frac.items():
        for alpha, value in by_alpha.items():
            rows.append([method.value, alpha, value])
    _write_csv(out_dir / "bestfrac.csv", ["method", "alpha", "fraction"], rows)
    return ["bestfrac.csv"]


def _emit_similarity(store: ResultStore, out_dir: Path) -> list[str]:
    records = _require_detects(store)
    partitions: dict[Method, dict] = {}
    for rec in records:
        if "labels_path" not in rec:
            continue
        method = Method(rec["method"])
        partitions.setdefault(method, {})[rec["network"]] = \
            store.read_labels(rec["labels_path"])
    if len(partitions) < 2:
        raise ReportError("similarity needs detect records for at least two "
                          "methods; run the `detect` subcommand first")
    sim = method_similarity(partitions)
    names = [m.value for m in sim.methods]
    for fname, mat in (("similarity_ami.csv", sim.ami),
                       ("similarity_kernel.csv", sim.kernel)):
        rows = [[names[i]] + [mat[i, j] for j in range(len(names))]
                for i in range(len(names))]
        _write_csv(out_dir / fname, ["method"] + names, rows)
    tree = {
        "methods": names,
        "leaf_order": list(sim.leaf_order),
        "merges": [{"children": [int(row[0]), int(row[1])],
                    "height": float(row[2]), "size": int(row[3])}
                   for row in sim.merges],
    }
    (out_dir / "similarity_tree.json").write_text(
        json.dumps(tree, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return ["similarity_ami.csv", "similarity_kernel.csv", "similarity_tree.json"]


def _emit_diagnosis(store: ResultStore, out_dir: Path) -> list[str]:
    results = _pick_mode(_require_tasks(store))
    curves = aggregate(results, "method")
    lp = {m: c for (m, task, mode), c in curves.items() if task is Task.PREDICTION}
    ld = {m: c for (m, task, mode), c in curves.items() if task is Task.DESCRIPTION}
    if len(lp) < 3 or set(lp) != set(ld):
        raise ReportError("diagnosis needs prediction and description records "
                          "for at least three methods; run `bench` first")
    diag = classify_fit(lp, ld)
    (out_dir / "diagnosis.json").write_text(
        json.dumps(diag.to_record(), indent=2, sort_keys=True) + "\n",
        encoding="utf-8")
    return ["diagnosis.json"]
