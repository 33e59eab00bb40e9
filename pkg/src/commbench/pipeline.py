"""Benchmark orchestration: run configuration, content-addressed caching,
append-only record store, and the concurrent task runner.

Every unit of work derives its RNG stream from the master seed and its task
coordinates, so results are schedule-independent and a rerun with the same
configuration is byte-identical.  Completed units are cached under a key that
hashes the graph's canonical serialization together with the method, seeds,
and the relevant configuration slice; corrupted cache entries (checksum
mismatch) are recomputed.
"""
from __future__ import annotations

import hashlib
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .bench import (DEFAULT_ALPHA_GRID, DEFAULT_MC_SAMPLES, Task, TaskResult,
                    derive_seed, run_task_pair)
from .corpus import CorpusManifest
from .detect import DetectError, DetectorResult, Method, detect
from .graph import Graph
from .partition import Partition, canonicalize, write_partition
from .score import ScoreMode

__all__ = ["RunConfig", "ResultStore", "Cache", "run_pipeline", "CACHE_DIR_ENV"]

CACHE_DIR_ENV = "COMMBENCH_CACHE_DIR"


@dataclass(frozen=True)
class RunConfig:
    methods: tuple[Method, ...] = tuple(Method)
    alpha_grid: tuple[float, ...] = DEFAULT_ALPHA_GRID
    replicates: int = 3
    mc_samples: int = DEFAULT_MC_SAMPLES
    mode: ScoreMode = ScoreMode.MODEL_SPECIFIC
    seed: int = 0
    cache_dir: Path | None = None
    out_dir: Path = Path("commbench-out")
    workers: int = 1
    tol: float = 0.05

    def __post_init__(self):
        if not self.methods:
            raise ValueError("no methods configured")
        if not all(0.0 < a < 1.0 for a in self.alpha_grid):
            raise ValueError("alpha grid values must lie in (0, 1)")
        if list(self.alpha_grid) != sorted(set(self.alpha_grid)):
            raise ValueError("alpha grid must be strictly increasing")
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        if self.mc_samples < 1:
            raise ValueError("mc_samples must be >= 1")

    @classmethod
    def from_options(cls, methods: Sequence[str] | None = None,
                     alphas: Sequence[float] | None = None, **kw) -> "RunConfig":
        fields = dict(kw)
        if methods:
            fields["methods"] = tuple(Method.parse(m) for m in methods)
        if alphas:
            fields["alpha_grid"] = tuple(float(a) for a in alphas)
        if "mode" in fields and isinstance(fields["mode"], str):
            fields["mode"] = ScoreMode.parse(fields["mode"])
        env_cache = os.environ.get(CACHE_DIR_ENV)
        if fields.get("cache_dir") is None and env_cache:
            fields["cache_dir"] = Path(env_cache)
        for key in ("cache_dir", "out_dir"):
            if fields.get(key) is not None:
                fields[key] = Path(fields[key])
        if fields.get("out_dir") is None:
            fields.pop("out_dir", None)
        return cls(**fields)

    def config_slice(self) -> dict:
        """The fields that affect task results, for cache keying."""
        return {"mc_samples": self.mc_samples, "mode": self.mode.value,
                "seed": self.seed}


# ---------------------------------------------------------------------------
# Content-addressed cache with checksums
# ---------------------------------------------------------------------------

class Cache:
    """One JSON file per entry; payloads carry a sha256 and are dropped on
    mismatch so corruption triggers recomputation instead of wrong results."""

    def __init__(self, root: Path | None):
        self.root = Path(root) if root is not None else None
        if self.root is not None:
            self.root.mkdir(parents=True, exist_ok=True)
        self.hits = 0
        self.misses = 0

    @staticmethod
    def key(*parts) -> str:
        text = "|".join(str(p) for p in parts)
        return hashlib.sha256(text.encode("utf-8")).hexdigest()

    def _path(self, key: str) -> Path:
        sub = self.root / key[:2]
        return sub / f"{key}.json"

    def get(self, key: str) -> dict | None:
        if self.root is None:
            return None
        path = self._path(key)
        if not path.is_file():
            self.misses += 1
            return None
        try:
            wrapper = json.loads(path.read_text(encoding="utf-8"))
            payload = wrapper["payload"]
            blob = json.dumps(payload, sort_keys=True).encode("utf-8")
            if hashlib.sha256(blob).hexdigest() != wrapper["sha256"]:
                self.misses += 1
                return None
        except (json.JSONDecodeError, KeyError, TypeError):
            self.misses += 1
            return None
        self.hits += 1
        return payload

    def put(self, key: str, payload: dict) -> None:
        if self.root is None:
            return
        path = self._path(key)
        path.parent.mkdir(parents=True, exist_ok=True)
        blob = json.dumps(payload, sort_keys=True).encode("utf-8")
        wrapper = {"sha256": hashlib.sha256(blob).hexdigest(), "payload": payload}
        tmp = path.with_suffix(".tmp")
        tmp.write_text(json.dumps(wrapper, sort_keys=True), encoding="utf-8")
        tmp.replace(path)


def graph_digest(graph: Graph) -> str:
    payload = f"{graph.n}\n" + graph.canonical_edge_text()
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


# ---------------------------------------------------------------------------
# Append-only newline-delimited JSON store
# ---------------------------------------------------------------------------

class ResultStore:
    """Append-only ndjson records plus partition label files.

    Rerunning a configuration appends nothing (records are keyed); a superset
    configuration only adds records.
    """

    def __init__(self, root: Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        (self.root / "partitions").mkdir(exist_ok=True)
        self.detect_path = self.root / "detect.ndjson"
        self.tasks_path = self.root / "tasks.ndjson"

    # -- detect records -----------------------------------------------------

    def detect_records(self) -> list[dict]:
        return _read_ndjson(self.detect_path)

    def task_records(self) -> list[dict]:
        return _read_ndjson(self.tasks_path)

    def task_results(self) -> list[TaskResult]:
        return [TaskResult.from_record(r) for r in self.task_records()]

    @staticmethod
    def detect_key(rec: dict) -> tuple:
        return (rec["network"], rec["method"], rec["seed"])

    @staticmethod
    def task_key(rec: dict) -> tuple:
        return (rec["network"], rec["method"], rec["task"], rec["mode"],
                rec["alpha"], rec["replicate"])

    def append_detect(self, records: Iterable[dict]) -> int:
        existing = {self.detect_key(r) for r in self.detect_records()}
        return _append_ndjson(self.detect_path, records, self.detect_key, existing)

    def append_tasks(self, records: Iterable[dict]) -> int:
        existing = {self.task_key(r) for r in self.task_records()}
        return _append_ndjson(self.tasks_path, records, self.task_key, existing)

    def write_labels(self, network: str, method: Method, partition: Partition,
                     names: Sequence[str] | None) -> str:
        rel = f"partitions/{network}__{method.value}.labels"
        write_partition(self.root / rel, partition, names)
        return rel

    def read_labels(self, rel_path: str) -> Partition:
        from .partition import read_partition
        return read_partition(self.root / rel_path)


def _read_ndjson(path: Path) -> list[dict]:
    if not path.is_file():
        return []
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(json.loads(line))
    return out


def _append_ndjson(path: Path, records: Iterable[dict], key_fn, existing: set) -> int:
    added = 0
    with open(path, "a", encoding="utf-8") as fh:
        for rec in records:
            k = key_fn(rec)
            if k in existing:
                continue
            existing.add(k)
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
            added += 1
    return added


# ---------------------------------------------------------------------------
# Work units (module-level so ProcessPoolExecutor can pickle them)
# ---------------------------------------------------------------------------

def _detect_unit(args) -> tuple[str, str, dict, list[int]]:
    network, method_value, graph, seed = args
    method = Method(method_value)
    try:
        result = detect(method, graph, seed)
        rec = result.to_record()
        rec["network"] = network
        rec["n_nodes"] = graph.n
        rec["m_edges"] = graph.m
        rec["ok"] = True
        return network, method_value, rec, list(result.partition.labels)
    except DetectError as exc:
        rec = {"network": network, "method": method_value, "k": 0,
               "objective": float("nan"), "seed": seed, "ms": 0.0,
               "n_nodes": graph.n, "m_edges": graph.m, "ok": False,
               "error": str(exc)}
        return network, method_value, rec, []


def _task_unit(args) -> list[dict]:
    network, method_value, graph, alpha, replicate, seed, mode_value, mc_samples = args
    pred, desc = run_task_pair(graph, Method(method_value), alpha, seed,
                               ScoreMode(mode_value), mc_samples,
                               network=network, replicate=replicate)
    return [pred.to_record(), desc.to_record()]


def _run_units(units: list, fn, workers: int) -> list:
    if workers <= 1 or len(units) <= 1:
        return [fn(u) for u in units]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, units, chunksize=max(1, len(units) // (8 * workers))))


# ---------------------------------------------------------------------------
# Pipeline
# ---------------------------------------------------------------------------

def run_pipeline(manifest: CorpusManifest, config: RunConfig,
                 detect_only: bool = False, bench_only: bool = False,
                 ) -> tuple[ResultStore, int]:
    """Run full-graph detection and the two-task benchmark over a corpus.

    Cached units are skipped; per-task failures are recorded, never raised.
    Returns the store and the number of failed units.
    """
    store = ResultStore(config.out_dir / "store")
    cache = Cache(config.cache_dir)
    graphs = {e.name: e.load(largest_component=True) for e in manifest}
    failures = 0
    if not bench_only:
        failures += _run_detect_stage(manifest, config, store, cache, graphs)
    if not detect_only:
        failures += _run_bench_stage(manifest, config, store, cache, graphs)
    return store, failures


def _run_detect_stage(manifest, config, store, cache, graphs) -> int:
    todo = []
    cached_records = []
    for entry in manifest:
        graph = graphs[entry.name]
        seed = derive_seed(config.seed, entry.name, "detect")
        for method in config.methods:
            key = Cache.key("detect", graph_digest(graph), method.value, seed)
            payload = cache.get(key)
            if payload is not None:
                cached_records.append((entry.name, method.value, payload["record"],
                                       payload["labels"], key))
            else:
                todo.append(((entry.name, method.value, graph, seed), key))
    results = _run_units([u for u, _ in todo], _detect_unit, config.workers)
    records = []
    failures = 0
    for (unit, key), (network, method_value, rec, labels) in zip(todo, results):
        cache.put(key, {"record": rec, "labels": labels})
        records.append((network, method_value, rec, labels))
    for network, method_value, rec, labels, _ in cached_records:
        records.append((network, method_value, rec, labels))
    records.sort(key=lambda r: (r[0], r[1]))
    final = []
    for network, method_value, rec, labels in records:
        if rec.get("ok", True) and labels:
            partition = canonicalize(labels)
            rel = store.write_labels(network, Method(method_value), partition,
                                     graphs[network].names)
            rec = dict(rec)
            rec["labels_path"] = rel
        else:
            failures += 1
        final.append(rec)
    store.append_detect(final)
    return failures


def _run_bench_stage(manifest, config, store, cache, graphs) -> int:
    todo = []
    cached_records = []
    for entry in manifest:
        graph = graphs[entry.name]
        gd = graph_digest(graph)
        for method in config.methods:
            for a_idx, alpha in enumerate(config.alpha_grid):
                for rep in range(config.replicates):
                    seed = derive_seed(config.seed, entry.name, method.value,
                                       a_idx, rep)
                    key = Cache.key("task", gd, method.value, alpha, rep, seed,
                                    json.dumps(config.config_slice(), sort_keys=True))
                    payload = cache.get(key)
                    if payload is not None:
                        cached_records.append(payload["records"])
                    else:
                        todo.append(((entry.name, method.value, graph, alpha, rep,
                                      seed, config.mode.value, config.mc_samples),
                                     key))
    results = _run_units([u for u, _ in todo], _task_unit, config.workers)
    all_records = []
    for (unit, key), recs in zip(todo, results):
        cache.put(key, {"records": recs})
        all_records.extend(recs)
    for recs in cached_records:
        all_records.extend(recs)
    all_records.sort(key=lambda r: (r["network"], r["method"], r["mode"],
                                    r["alpha"], r["replicate"], r["task"]))
    store.append_tasks(all_records)
    return sum(1 for r in all_records if not r.get("ok", True))
