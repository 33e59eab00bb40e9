"""Command-line interface: corpus generation, detection, benchmarking, reports.

Exit codes: 0 on success, 1 on configuration errors, 2 when some tasks failed
(reports are still emitted from the successful ones).
"""
from __future__ import annotations

import csv
import json
import sys
from pathlib import Path

import click

from .bench import DEFAULT_ALPHA_GRID, DEFAULT_MC_SAMPLES
from .corpus import DOMAINS, load_manifest, mini_corpus_path
from .detect import Method
from .graph import PlantedPartitionParams, generate_planted_partition
from .pipeline import RunConfig, ResultStore, run_pipeline
from .reports import REPORT_KINDS, ReportError, emit_report

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_PARTIAL = 2


def _parse_methods(ctx, param, value):
    if not value:
        return tuple(m.value for m in Method)
    try:
        return tuple(Method.parse(v).value for v in value.split(","))
    except ValueError as exc:
        raise click.BadParameter(str(exc))


def _parse_alphas(ctx, param, value):
    if not value:
        return DEFAULT_ALPHA_GRID
    try:
        alphas = tuple(float(x) for x in value.split(","))
    except ValueError:
        raise click.BadParameter(f"cannot parse alpha grid {value!r}")
    return alphas


def _manifest_arg(path: str):
    if path == "mini":
        return load_manifest(mini_corpus_path())
    return load_manifest(path)


run_options = [
    click.option("--methods", callback=_parse_methods, default="",
                 help="Comma-separated method ids (default: all seven)."),
    click.option("--alphas", callback=_parse_alphas, default="",
                 help="Comma-separated observed-edge fractions in (0, 1)."),
    click.option("--replicates", type=int, default=3, show_default=True),
    click.option("--mc-samples", type=int, default=DEFAULT_MC_SAMPLES,
                 show_default=True, help="Monte Carlo AUC sample count."),
    click.option("--score-mode", type=click.Choice(["model", "sbm"]),
                 default="model", show_default=True),
    click.option("--seed", type=int, default=0, show_default=True),
    click.option("--cache-dir", type=click.Path(path_type=Path), default=None,
                 help="Result cache (also via $COMMBENCH_CACHE_DIR)."),
    click.option("--out", "out_dir", type=click.Path(path_type=Path),
                 default=Path("commbench-out"), show_default=True),
    click.option("--workers", type=int, default=1, show_default=True),
]


def _with_options(options):
    def wrap(fn):
        for opt in reversed(options):
            fn = opt(fn)
        return fn
    return wrap


def _build_config(methods, alphas, replicates, mc_samples, score_mode, seed,
                  cache_dir, out_dir, workers) -> RunConfig:
    try:
        return RunConfig.from_options(
            methods=methods, alphas=alphas, replicates=replicates,
            mc_samples=mc_samples, mode=score_mode, seed=seed,
            cache_dir=cache_dir, out_dir=out_dir, workers=workers)
    except ValueError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)


@click.group()
def main():
    """Community-detection benchmark: fit methods to graph corpora and score
    them on link prediction and link description."""


@main.command()
@click.argument("manifest_path", metavar="MANIFEST")
@_with_options(run_options)
def detect(manifest_path, **kw):
    """Run every configured method on every corpus network (full graphs)."""
    manifest = _load_or_die(manifest_path)
    config = _build_config(**kw)
    store, failures = run_pipeline(manifest, config, detect_only=True)
    click.echo(f"detect: {len(store.detect_records())} records in {store.root}")
    sys.exit(EXIT_PARTIAL if failures else EXIT_OK)


@main.command()
@click.argument("manifest_path", metavar="MANIFEST")
@_with_options(run_options)
def bench(manifest_path, **kw):
    """Run the link prediction/description benchmark over a corpus."""
    manifest = _load_or_die(manifest_path)
    config = _build_config(**kw)
    store, failures = run_pipeline(manifest, config)
    click.echo(f"bench: {len(store.task_records())} task records in {store.root}")
    sys.exit(EXIT_PARTIAL if failures else EXIT_OK)


@main.command()
@click.argument("manifest_path", metavar="MANIFEST")
@click.option("--kind", "kinds", multiple=True,
              type=click.Choice(REPORT_KINDS + ("all",)), default=("all",),
              show_default=True)
@click.option("--tol", type=float, default=0.05, show_default=True,
              help="Best-fraction tolerance below the per-network maximum AUC.")
@click.option("--out", "out_dir", type=click.Path(path_type=Path),
              default=Path("commbench-out"), show_default=True)
def report(manifest_path, kinds, tol, out_dir):
    """Emit report files (curves, similarity, ktrend, bestfrac, diagnosis,
    domains) from a completed run."""
    manifest = _load_or_die(manifest_path)
    if "all" in kinds:
        kinds = REPORT_KINDS
    store = ResultStore(Path(out_dir) / "store")
    try:
        emitted = emit_report(store, kinds, Path(out_dir) / "reports",
                              manifest=manifest, tol=tol)
    except ReportError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    for kind, files in sorted(emitted.items()):
        click.echo(f"{kind}: {', '.join(files)}")
    sys.exit(EXIT_OK)


@main.command()
@click.argument("manifest_path", metavar="MANIFEST")
@click.option("--out", "out_dir", type=click.Path(path_type=Path),
              default=Path("commbench-out"), show_default=True)
def similarity(manifest_path, out_dir):
    """Emit the method-similarity clustering (AMI matrix, kernel, tree)."""
    _report_single(manifest_path, out_dir, "similarity")


@main.command()
@click.argument("manifest_path", metavar="MANIFEST")
@click.option("--out", "out_dir", type=click.Path(path_type=Path),
              default=Path("commbench-out"), show_default=True)
def diagnose(manifest_path, out_dir):
    """Emit the per-method over/under-fit diagnosis."""
    _report_single(manifest_path, out_dir, "diagnosis")


def _report_single(manifest_path, out_dir, kind):
    manifest = _load_or_die(manifest_path)
    store = ResultStore(Path(out_dir) / "store")
    try:
        emitted = emit_report(store, [kind], Path(out_dir) / "reports",
                              manifest=manifest)
    except ReportError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    click.echo(", ".join(emitted[kind]))
    sys.exit(EXIT_OK)


@main.command()
@click.option("--out", "out_dir", type=click.Path(path_type=Path), required=True)
@click.option("--graphs", type=int, default=16, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--min-nodes", type=int, default=40, show_default=True)
@click.option("--max-nodes", type=int, default=90, show_default=True)
def gen(out_dir, graphs, seed, min_nodes, max_nodes):
    """Generate a synthetic planted-partition corpus with a manifest."""
    import numpy as np

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    rows = []
    params_log = []
    for idx in range(graphs):
        n = int(rng.integers(min_nodes, max_nodes + 1))
        k = int(rng.integers(2, 6))
        p_in = float(rng.uniform(0.25, 0.5))
        p_out = float(rng.uniform(0.01, 0.08))
        g_seed = int(rng.integers(0, 2**31))
        params = PlantedPartitionParams.uniform(k=k, n=n, p_in=p_in, p_out=p_out,
                                                seed=g_seed)
        graph, _ = generate_planted_partition(params, largest_component_only=True)
        name = f"planted_{idx:02d}"
        fname = f"{name}.txt"
        graph.write_edge_list(out_dir / fname)
        rows.append({"name": name, "path": fname, "domain": "synthetic"})
        params_log.append({"name": name, "n": n, "k": k, "p_in": p_in,
                           "p_out": p_out, "seed": g_seed})
    with open(out_dir / "manifest.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=["name", "path", "domain"],
                                lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    (out_dir / "gen_params.json").write_text(
        json.dumps(params_log, indent=2) + "\n", encoding="utf-8")
    click.echo(f"wrote {graphs} graphs and manifest.csv to {out_dir}")
    sys.exit(EXIT_OK)


def _load_or_die(manifest_path):
    try:
        return _manifest_arg(manifest_path)
    except (ValueError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)


if __name__ == "__main__":
    main()
