"""Document encoding: embeddings -> BiGRU -> GCN stack -> stem merge -> GLU.

Re-encoding for a later phrase reuses the cached embeddings and BiGRU
outputs; only the edge re-scoring and everything downstream of the
adjacency recompute.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .deptrees import AnnotatedDocument
from .graph import SyntacticGraph, adjacency, build_graph, build_merge_map, MergeMap
from .model import KeyphraseModel
from .nn import linear, sinusoid_positions


@dataclass
class EncoderState:
    e_tokens: Tensor   # (l, token_dim)
    h0: Tensor         # (l, hidden) projected BiGRU outputs
    h_gcn: Tensor      # (l, hidden) after the GCN stack
    h_merged: Tensor   # (l', hidden)
    h_glu: Tensor      # (l', hidden)
    c: Tensor          # (1, hidden) context vector


@dataclass
class DocumentCache:
    """Per-document state shared by every phrase decode of one forward pass."""

    doc: AnnotatedDocument
    graph: SyntacticGraph
    merge: MergeMap
    merge_mat: Tensor            # constant (l', l) averaging matrix
    dinv: Tensor                 # constant (n, 1) inverse degrees
    word_idx: np.ndarray
    pos_idx: np.ndarray
    e_tokens: Tensor | None = None
    h0: Tensor | None = None


def build_cache(model: KeyphraseModel, doc: AnnotatedDocument,
                graph: SyntacticGraph | None = None) -> DocumentCache:
    graph = graph if graph is not None else build_graph(doc, model.type_inv)
    merge = build_merge_map(doc.stems)
    word_idx = np.array([model.vocab.index(t.form) for t in doc.tokens], dtype=np.intp)
    pos_idx = np.array([model.pos_inv.index(t.upos) for t in doc.tokens], dtype=np.intp)
    return DocumentCache(
        doc=doc, graph=graph, merge=merge,
        merge_mat=ad.constant(merge.matrix()),
        dinv=ad.constant((1.0 / graph.degree).reshape(-1, 1)),
        word_idx=word_idx, pos_idx=pos_idx,
    )


def embed(model: KeyphraseModel, cache: DocumentCache) -> Tensor:
    """e_i = [word; POS; sinusoidal position], one row per document token."""
    n = len(cache.doc.tokens)
    parts = [
        ad.gather_rows(model.emb_word, cache.word_idx),
        ad.gather_rows(model.emb_pos, cache.pos_idx),
        ad.constant(sinusoid_positions(n, model.cfg.position_dim)),
    ]
    return ad.concat(parts, axis=1)


def bigru(model: KeyphraseModel, e_tokens: Tensor) -> Tensor:
    """Concatenated forward/backward GRU states, (l, 2 * gru_hidden)."""
    n = e_tokens.shape[0]
    rows = [ad.gather_rows(e_tokens, np.array([i])) for i in range(n)]
    fwd = model.gru_fwd.run(rows)
    bwd = list(reversed(model.gru_bwd.run(list(reversed(rows)))))
    return ad.concat([ad.concat(fwd, axis=0), ad.concat(bwd, axis=0)], axis=1)


def gcn_layer(h: Tensor, a_norm: Tensor, w: Tensor, b: Tensor) -> Tensor:
    """ReLU of degree-normalized neighborhood aggregation of (W h + b)."""
    return ad.relu(ad.matmul(a_norm, linear(h, w, b)))


def merge_rows(h: Tensor, merge_mat: Tensor) -> Tensor:
    return ad.matmul(merge_mat, h)


def glu_context(h: Tensor, wk: Tensor, wl: Tensor) -> tuple[Tensor, Tensor]:
    """Residual gated linear unit, then the rowwise mean as context vector."""
    gated = ad.add(h, ad.mul(ad.matmul(h, wk), ad.sigmoid(ad.matmul(h, wl))))
    c = ad.reshape(ad.reduce_mean(gated, axis=0), (1, h.shape[1]))
    return gated, c


def encode(model: KeyphraseModel, cache: DocumentCache, phrase_emb: Tensor,
           training: bool = False, rng: np.random.Generator | None = None) -> EncoderState:
    """Full pipeline; embeddings and BiGRU outputs are cached across phrases."""
    drop = model.cfg.dropout
    if cache.e_tokens is None:
        e = embed(model, cache)
        cache.e_tokens = ad.dropout(e, drop, training, rng)
    if cache.h0 is None:
        cache.h0 = linear(bigru(model, cache.e_tokens), model.proj_w, model.proj_b)

    scores = model.scorer.score(cache.graph, cache.e_tokens, phrase_emb)
    a = adjacency(cache.graph, scores)
    a_norm = ad.mul(a, ad.broadcast_to(cache.dinv, a.shape))

    h = cache.h0
    for w, b in model.gcn_layers:
        h = gcn_layer(h, a_norm, w, b)
        h = ad.dropout(h, drop, training, rng)
    h_gcn = h
    h_merged = merge_rows(h_gcn, cache.merge_mat)
    h_glu, c = glu_context(h_merged, model.glu_wk, model.glu_wl)
    return EncoderState(e_tokens=cache.e_tokens, h0=cache.h0, h_gcn=h_gcn,
                        h_merged=h_merged, h_glu=h_glu, c=c)
