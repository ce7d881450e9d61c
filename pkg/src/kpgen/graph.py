"""Weighted document graph over dependency edges.

Edge weights are sigmoid scores of [e_i; e_j; type embedding; decoded-phrase
embedding]; the edge set is fixed at construction and only the weights move
when the graph is re-scored between decoded phrases.  Pairs without a
dependency link keep weight exactly 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .deptrees import AnnotatedDocument, DepTypeInventory, edge_list

EDGE_IN_IN = "in_in"
EDGE_IN_OUT = "in_out"
EDGE_OTHERS = "others"
EDGE_CLASSES = (EDGE_IN_IN, EDGE_IN_OUT, EDGE_OTHERS)


@dataclass
class SyntacticGraph:
    """Sparse symmetric adjacency over document tokens with typed edges."""

    n: int
    edges: list[tuple[int, int, int]]  # (dependent, head, dep-type index)
    weights: np.ndarray | None = None  # per-edge, populated by score_edges
    degree: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self) -> None:
        if self.degree.size != self.n:
            deg = np.ones(self.n)  # self-loop
            for i, j, _ in self.edges:
                deg[i] += 1
                deg[j] += 1
            self.degree = deg

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def support(self) -> set[tuple[int, int]]:
        """Symmetric off-diagonal support of the adjacency."""
        pairs: set[tuple[int, int]] = set()
        for i, j, _ in self.edges:
            pairs.add((i, j))
            pairs.add((j, i))
        return pairs


def build_graph(doc: AnnotatedDocument, types: DepTypeInventory) -> SyntacticGraph:
    edges = [(i, j, types.index(rel)) for i, j, rel in edge_list(doc)]
    return SyntacticGraph(n=len(doc.tokens), edges=edges)


class EdgeScorer:
    """Learned scoring of dependency edges (shared across phrase decodes)."""

    def __init__(self, weight: Tensor, type_emb: Tensor, token_dim: int, word_dim: int) -> None:
        self.weight = weight        # (2*token_dim + type_dim + word_dim, 1)
        self.type_emb = type_emb    # (n_types, type_dim)
        expected = 2 * token_dim + type_emb.shape[1] + word_dim
        if weight.shape != (expected, 1):
            raise ad.ShapeError("edge scorer weight", weight.shape, (expected, 1))

    def score(self, graph: SyntacticGraph, token_embs: Tensor, phrase_emb: Tensor) -> Tensor:
        """Sigmoid edge scores, shape (E, 1); also caches them on the graph.

        With a zero `phrase_emb` this is the static construction score; any
        later call re-weights the same edge set and never touches zeros.
        """
        if token_embs.shape[0] != graph.n:
            raise ad.ShapeError("edge scoring", token_embs.shape, (graph.n, "*"))
        left = np.array([i for i, _, _ in graph.edges], dtype=np.intp)
        right = np.array([j for _, j, _ in graph.edges], dtype=np.intp)
        types = np.array([t for _, _, t in graph.edges], dtype=np.intp)
        feats = ad.concat([
            ad.gather_rows(token_embs, left),
            ad.gather_rows(token_embs, right),
            ad.gather_rows(self.type_emb, types),
            ad.broadcast_to(phrase_emb, (len(graph.edges), phrase_emb.shape[1])),
        ], axis=1)
        scores = ad.sigmoid(ad.matmul(feats, self.weight))
        graph.weights = scores.data.reshape(-1).copy()
        return scores


def adjacency(graph: SyntacticGraph, scores: Tensor) -> Tensor:
    """Dense (n, n) adjacency: symmetric scored edges plus unit self-loops."""
    rows = [i for i, _, _ in graph.edges] + [j for _, j, _ in graph.edges]
    cols = [j for _, j, _ in graph.edges] + [i for i, _, _ in graph.edges]
    flat = ad.reshape(scores, (len(graph.edges),))
    both = ad.concat([flat, flat], axis=0)
    return ad.scatter_matrix(both, rows, cols, (graph.n, graph.n),
                             base=np.eye(graph.n))


def phrase_embedding(decoded_indices: Sequence[int], word_emb: Tensor,
                     static_size: int, word_dim: int) -> Tensor:
    """Mean word embedding of every token decoded so far; zero when empty.

    Extended-vocabulary indices (copied document-only words) fall back to
    the UNK row since they have no static embedding.
    """
    if not decoded_indices:
        return ad.zeros((1, word_dim))
    from .corpus import UNK
    rows = np.array([idx if idx < static_size else UNK for idx in decoded_indices],
                    dtype=np.intp)
    picked = ad.gather_rows(word_emb, rows)
    return ad.reshape(ad.reduce_mean(picked, axis=0), (1, word_dim))


@dataclass
class MergeMap:
    """Surjection token index -> merged index, grouping equal stems."""

    merged_of: list[int]          # length l
    groups: list[list[int]]       # length l', first-occurrence order

    @property
    def merged_count(self) -> int:
        return len(self.groups)

    def matrix(self) -> np.ndarray:
        """(l', l) averaging matrix: row g holds 1/|group g| on its members."""
        m = np.zeros((len(self.groups), len(self.merged_of)))
        for g, members in enumerate(self.groups):
            m[g, members] = 1.0 / len(members)
        return m

    def representative(self, g: int) -> int:
        """First token index of merged group g."""
        return self.groups[g][0]


def build_merge_map(stems: Sequence[str]) -> MergeMap:
    merged_of: list[int] = []
    groups: list[list[int]] = []
    index_of: dict[str, int] = {}
    for i, s in enumerate(stems):
        g = index_of.get(s)
        if g is None:
            g = len(groups)
            index_of[s] = g
            groups.append([])
        groups[g].append(i)
        merged_of.append(g)
    return MergeMap(merged_of, groups)


def classify_edges(graph: SyntacticGraph, doc_stems: Sequence[str],
                   gold_phrases_stemmed: Sequence[Sequence[str]]) -> dict[str, dict]:
    """Partition edges by ground-truth membership of their endpoints.

    An endpoint is "in" when its stem belongs to any target phrase.  Returns
    per-class edge index lists, counts and mean weights (NaN mean when a
    class is empty).
    """
    target_stems = {s for phrase in gold_phrases_stemmed for s in phrase}
    classes: dict[str, list[int]] = {c: [] for c in EDGE_CLASSES}
    for e, (i, j, _) in enumerate(graph.edges):
        a = doc_stems[i] in target_stems
        b = doc_stems[j] in target_stems
        if a and b:
            classes[EDGE_IN_IN].append(e)
        elif a or b:
            classes[EDGE_IN_OUT].append(e)
        else:
            classes[EDGE_OTHERS].append(e)
    out: dict[str, dict] = {}
    for name, idx in classes.items():
        if graph.weights is not None and idx:
            mean_w = float(np.mean(graph.weights[idx]))
        else:
            mean_w = float("nan")
        out[name] = {"edges": idx, "count": len(idx), "mean_weight": mean_w}
    return out
