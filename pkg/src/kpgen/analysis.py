"""Dynamic-graph analyses: per-phrase edge-class weight trends.

Consumes the per-phrase weight snapshots written by `decode --snapshots`
and the annotated gold file; emits one CSV row per (phrase index, edge
class).  Both the per-edge mean (all class edges pooled across documents)
and the per-document mean (documents averaged with equal weight) are
reported since either reading of "average weight" is defensible.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .deptrees import read_annotated
from .errors import DataError
from .graph import EDGE_CLASSES, SyntacticGraph, classify_edges
from .metrics import present_gold
from .stemming import stem_tokens


@dataclass
class SnapshotRecord:
    doc_id: str
    n: int
    edges: list[tuple[int, int, int]]
    weights_per_phrase: list[np.ndarray]


def write_snapshots(path: str | Path, records: list[SnapshotRecord]) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for rec in records:
            f.write(json.dumps({
                "id": rec.doc_id,
                "n": rec.n,
                "edges": [list(e) for e in rec.edges],
                "weights_per_phrase": [w.tolist() for w in rec.weights_per_phrase],
            }) + "\n")


def read_snapshots(path: str | Path) -> list[SnapshotRecord]:
    if not Path(path).exists():
        raise DataError(f"snapshot file {path} does not exist; "
                        "run decode with --snapshots")
    records = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        obj = json.loads(line)
        records.append(SnapshotRecord(
            doc_id=obj["id"], n=obj["n"],
            edges=[tuple(e) for e in obj["edges"]],
            weights_per_phrase=[np.array(w) for w in obj["weights_per_phrase"]]))
    if not records:
        raise DataError(f"snapshot file {path} is empty")
    return records


def weight_trend_analysis(snapshots: list[SnapshotRecord], gold_path: str | Path,
                          max_phrases: int = 7) -> list[dict]:
    """Mean edge weight per (phrase index, class) across all documents."""
    docs = {d.id: d for d in read_annotated(gold_path)}
    # accumulators: per (p, class) pooled edge weights and per-document means
    pooled: dict[tuple[int, str], list[np.ndarray]] = {}
    per_doc_means: dict[tuple[int, str], list[float]] = {}
    for rec in snapshots:
        doc = docs.get(rec.doc_id)
        if doc is None:
            raise DataError(f"snapshot for unknown document {rec.doc_id!r}")
        graph = SyntacticGraph(n=rec.n, edges=list(rec.edges))
        gold = [stem_tokens(p) for p in present_gold(doc)]
        for p, weights in enumerate(rec.weights_per_phrase[:max_phrases], start=1):
            graph.weights = weights
            classes = classify_edges(graph, doc.stems, gold)
            for name in EDGE_CLASSES:
                idx = classes[name]["edges"]
                if not idx:
                    continue
                pooled.setdefault((p, name), []).append(weights[idx])
                per_doc_means.setdefault((p, name), []).append(
                    float(np.mean(weights[idx])))
    rows = []
    for (p, name) in sorted(pooled):
        all_w = np.concatenate(pooled[(p, name)])
        rows.append({
            "phrase_index": p,
            "class": name,
            "edge_count": int(all_w.size),
            "mean_weight": float(np.mean(all_w)),
            "mean_weight_per_doc": float(np.mean(per_doc_means[(p, name)])),
        })
    return rows


def trend_csv(rows: list[dict]) -> str:
    header = "phrase_index,class,edge_count,mean_weight,mean_weight_per_doc"
    lines = [header]
    for r in rows:
        lines.append(f"{r['phrase_index']},{r['class']},{r['edge_count']},"
                     f"{r['mean_weight']:.10g},{r['mean_weight_per_doc']:.10g}")
    return "\n".join(lines) + "\n"
