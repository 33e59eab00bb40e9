"""Regenerate the bundled mini corpus under src/commbench/data/mini/.

Four classic small public networks (via networkx) plus sixteen synthetic
planted partitions with recorded parameters and seeds.  Deterministic; rerun
only when the corpus recipe changes.
"""
from __future__ import annotations

import csv
import json
from pathlib import Path

import networkx as nx
import numpy as np

from commbench.graph import Graph, PlantedPartitionParams, generate_planted_partition

OUT = Path(__file__).resolve().parents[1] / "src" / "commbench" / "data" / "mini"

CLASSICS = [
    ("karate", "social", nx.karate_club_graph),
    ("les_miserables", "social", nx.les_miserables_graph),
    ("florentine_families", "social", nx.florentine_families_graph),
    ("krackhardt_kite", "social", nx.krackhardt_kite_graph),
]

SYNTH_SPECS = [
    # (n, k, p_in, p_out, seed) - strong to noisy planted structure
    (30, 2, 0.50, 0.05, 101),
    (40, 2, 0.40, 0.04, 102),
    (45, 3, 0.45, 0.03, 103),
    (50, 2, 0.30, 0.06, 104),
    (55, 3, 0.40, 0.05, 105),
    (60, 4, 0.45, 0.03, 106),
    (60, 2, 0.25, 0.08, 107),
    (65, 3, 0.35, 0.04, 108),
    (70, 4, 0.40, 0.03, 109),
    (70, 2, 0.20, 0.07, 110),
    (75, 5, 0.45, 0.02, 111),
    (80, 3, 0.30, 0.05, 112),
    (80, 4, 0.35, 0.04, 113),
    (85, 5, 0.40, 0.02, 114),
    (90, 3, 0.25, 0.05, 115),
    (90, 4, 0.30, 0.03, 116),
]


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    rows = []
    log = []
    for name, domain, builder in CLASSICS:
        nxg = builder()
        relabel = {v: i for i, v in enumerate(sorted(nxg.nodes(), key=str))}
        edges = sorted((min(relabel[u], relabel[v]), max(relabel[u], relabel[v]))
                       for u, v in nxg.edges())
        graph = Graph.from_edges(len(relabel), edges)
        fname = f"{name}.txt"
        graph.write_edge_list(OUT / fname)
        rows.append({"name": name, "path": fname, "domain": domain})
        log.append({"name": name, "source": f"networkx.{builder.__name__}",
                    "n": graph.n, "m": graph.m})
    for idx, (n, k, p_in, p_out, seed) in enumerate(SYNTH_SPECS):
        params = PlantedPartitionParams.uniform(k=k, n=n, p_in=p_in,
                                                p_out=p_out, seed=seed)
        graph, _ = generate_planted_partition(params, largest_component_only=True)
        name = f"planted_{idx:02d}"
        fname = f"{name}.txt"
        graph.write_edge_list(OUT / fname)
        rows.append({"name": name, "path": fname, "domain": "synthetic"})
        log.append({"name": name, "n": n, "k": k, "p_in": p_in, "p_out": p_out,
                    "seed": seed, "n_kept": graph.n, "m": graph.m})
    with open(OUT / "manifest.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=["name", "path", "domain"],
                                lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    (OUT / "gen_params.json").write_text(json.dumps(log, indent=2) + "\n",
                                         encoding="utf-8")
    print(f"wrote {len(rows)} networks to {OUT}")


if __name__ == "__main__":
    main()
