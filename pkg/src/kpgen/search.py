"""Diversified phrase-level beam search with dynamic graph re-encoding.

Each keyphrase is decoded by its own beam; between phrases the document
graph is re-scored with the mean embedding of everything decoded so far and
the document re-encoded.  Candidates are ranked by

    theta_hat = theta + lambda1 * DP - lambda2 * SP

where theta is the length-penalized log-probability sum, DP rewards low
n-gram overlap with already-decoded phrases, and SP accumulates each
token's log-probability rank among its siblings (rank history is kept per
hypothesis, so a larger lambda2 strictly penalizes any hypothesis that ever
took a non-top token).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import autodiff as ad
from .corpus import EOS, SEP
from .decoder import (DecoderState, DynamicVocabulary, attendable,
                      build_dynamic_vocab, decode_step, init_state)
from .deptrees import AnnotatedDocument
from .encoder import DocumentCache, build_cache, encode
from .errors import DataError
from .graph import phrase_embedding
from .model import KeyphraseModel
from .stemming import stem

TERMINATORS = (SEP, EOS)
LOG_FLOOR = -50.0


@dataclass(frozen=True)
class BeamHypothesis:
    tokens: tuple[int, ...]        # includes the terminator once finished
    logprob_sum: float
    ranks: tuple[int, ...]         # per-token sibling rank at emission time
    sp_sum: float                  # accumulated sibling penalty
    theta_hat: float               # final for frozen hypotheses
    finished: bool
    state: DecoderState | None     # None once frozen

    @property
    def content(self) -> tuple[int, ...]:
        return tuple(t for t in self.tokens if t not in TERMINATORS)

    def sort_key(self):
        return (-self.theta_hat, self.tokens)


def length_penalty(length: int, alpha: float) -> float:
    return ((5.0 + length) / 6.0) ** alpha


def theta(logprob_sum: float, length: int, alpha: float) -> float:
    """Length-penalized sequence score."""
    return logprob_sum / length_penalty(length, alpha)


def _ngrams(tokens: Sequence[int], n: int) -> set[tuple[int, ...]]:
    return {tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1)}


def dp_penalty(candidate: Sequence[int], previous_phrases: Sequence[Sequence[int]],
               w1: float = 0.5, w2: float = 0.5) -> float:
    """Dissimilarity bonus in [0, 1] from uni-/bi-gram overlap ratios.

    An empty candidate earns no bonus once phrases exist: rewarding zero
    content would otherwise make a bare terminator the argmax under a large
    diversity factor.
    """
    if not previous_phrases:
        return 1.0
    if not candidate:
        return 0.0
    prev_uni: set = set()
    prev_bi: set = set()
    for phrase in previous_phrases:
        prev_uni.update(phrase)
        prev_bi.update(_ngrams(phrase, 2))
    cand_uni = set(candidate)
    ov1 = len(cand_uni & prev_uni) / max(1, len(cand_uni))
    cand_bi = _ngrams(candidate, 2)
    ov2 = len(cand_bi & prev_bi) / max(1, len(cand_bi))
    return 1.0 - (w1 * ov1 + w2 * ov2)


def sp_penalty(rank: int, log_rank: bool = False) -> float:
    """Sibling penalty of a token from its 0-based log-probability rank."""
    return math.log(rank + 1.0) if log_rank else float(rank)


def token_ranks(logprobs: np.ndarray) -> np.ndarray:
    """0-based descending-logprob ranks; ties go to the lower index."""
    order = np.argsort(-logprobs, kind="stable")
    ranks = np.empty_like(order)
    ranks[order] = np.arange(order.size)
    return ranks


def _clamped_log(probs: np.ndarray) -> np.ndarray:
    return np.log(np.maximum(probs, math.exp(LOG_FLOOR)))


def _dp_vector(hyp: BeamHypothesis, vd_size: int,
               prev_uni_mask: np.ndarray, prev_bi: set,
               cfg) -> np.ndarray:
    """DP of (hyp.content + [v]) for every candidate token v, vectorized.

    Terminator continuations keep the prefix's own DP since they add no
    content token.
    """
    if prev_uni_mask is None:
        return np.ones(vd_size)
    prefix = hyp.content
    prefix_uni = set(prefix)
    prefix_bi = _ngrams(prefix, 2)
    n1 = len(prefix_uni)
    inter1 = sum(1 for t in prefix_uni if prev_uni_mask[t])
    n2 = len(prefix_bi)
    inter2 = len(prefix_bi & prev_bi)

    in_prefix = np.zeros(vd_size, dtype=bool)
    if prefix_uni:
        in_prefix[list(prefix_uni)] = True
    new_uni = ~in_prefix
    cand_n1 = n1 + new_uni
    cand_inter1 = inter1 + (prev_uni_mask & new_uni)
    ov1 = cand_inter1 / np.maximum(1, cand_n1)

    if prefix:
        last = prefix[-1]
        bi_new = np.ones(vd_size, dtype=bool)
        bi_prev = np.zeros(vd_size, dtype=bool)
        for a, b in prefix_bi:
            if a == last:
                bi_new[b] = False
        for a, b in prev_bi:
            if a == last:
                bi_prev[b] = True
        cand_n2 = n2 + bi_new
        cand_inter2 = inter2 + (bi_prev & bi_new)
    else:
        cand_n2 = np.full(vd_size, n2)
        cand_inter2 = np.full(vd_size, inter2)
    ov2 = cand_inter2 / np.maximum(1, cand_n2)

    dp = 1.0 - (cfg.dp_unigram_weight * ov1 + cfg.dp_bigram_weight * ov2)
    # SEP / EOS add no content; they inherit the prefix DP (zero for an
    # empty prefix, matching dp_penalty)
    if prefix:
        prefix_ov1 = inter1 / max(1, n1)
        prefix_ov2 = inter2 / max(1, n2)
        dp_prefix = 1.0 - (cfg.dp_unigram_weight * prefix_ov1
                           + cfg.dp_bigram_weight * prefix_ov2)
    else:
        dp_prefix = 0.0
    dp[list(TERMINATORS)] = dp_prefix
    return dp


def beam_step(model: KeyphraseModel, beam: list[BeamHypothesis],
              h_attend, dyn: DynamicVocabulary,
              previous_phrases: Sequence[Sequence[int]], cfg) -> list[BeamHypothesis]:
    """Expand every live hypothesis over the dynamic vocabulary, keep top B.

    Frozen hypotheses stay in the pool with their final theta_hat.  Ties are
    broken by the lexicographically smaller token sequence.
    """
    if not beam:
        raise DataError("beam step on an empty beam")
    vd = dyn.size
    if previous_phrases:
        prev_uni_mask = np.zeros(vd, dtype=bool)
        prev_bi: set = set()
        for phrase in previous_phrases:
            prev_uni_mask[list(phrase)] = True
            prev_bi.update(_ngrams(phrase, 2))
    else:
        prev_uni_mask, prev_bi = None, set()

    pool: list[BeamHypothesis] = []
    keep = cfg.beam_width
    for hyp in beam:
        if hyp.finished:
            pool.append(hyp)
            continue
        probs, _, next_state = decode_step(model, hyp.state, h_attend, dyn)
        logp = _clamped_log(probs.data.reshape(-1))
        ranks = token_ranks(logp)
        sp = np.log(ranks + 1.0) if cfg.sp_log_rank else ranks.astype(float)
        new_len = len(hyp.tokens) + 1
        base = (hyp.logprob_sum + logp) / length_penalty(new_len, cfg.length_alpha)
        dp = _dp_vector(hyp, vd, prev_uni_mask, prev_bi, cfg)
        scores = base + cfg.lambda1 * dp - cfg.lambda2 * (hyp.sp_sum + sp)

        order = np.lexsort((np.arange(vd), -scores))[:keep]
        for v in order:
            v = int(v)
            finished = v in TERMINATORS
            pool.append(BeamHypothesis(
                tokens=hyp.tokens + (v,),
                logprob_sum=hyp.logprob_sum + float(logp[v]),
                ranks=hyp.ranks + (int(ranks[v]),),
                sp_sum=hyp.sp_sum + float(sp[v]),
                theta_hat=float(scores[v]),
                finished=finished,
                state=None if finished else DecoderState(
                    hidden=next_state.hidden,
                    coverage=next_state.coverage,
                    prev_token=v),
            ))
    pool.sort(key=BeamHypothesis.sort_key)
    return pool[:keep]


def beam_search_phrase(model: KeyphraseModel, h_attend, c, dyn: DynamicVocabulary,
                       previous_phrases: Sequence[Sequence[int]], cfg
                       ) -> list[BeamHypothesis]:
    """Decode one keyphrase; returns the final beam sorted by theta_hat."""
    start = BeamHypothesis(tokens=(), logprob_sum=0.0, ranks=(), sp_sum=0.0,
                           theta_hat=0.0, finished=False,
                           state=init_state(model, c, h_attend.shape[0]))
    beam = [start]
    for _ in range(cfg.max_phrase_len):
        if all(h.finished for h in beam):
            break
        beam = beam_step(model, beam, h_attend, dyn, previous_phrases, cfg)
    return sorted(beam, key=BeamHypothesis.sort_key)


@dataclass
class GenerationResult:
    phrases: list[list[str]]       # surface tokens, deduplicated
    scores: list[float]            # theta_hat of each kept phrase
    snapshots: list[np.ndarray]    # per-phrase edge weights when requested
    raw_phrases: list[list[int]]   # every decoded phrase before deduplication


def generate(model: KeyphraseModel, doc: AnnotatedDocument, cfg,
             collect_snapshots: bool = False,
             cache: DocumentCache | None = None) -> GenerationResult:
    """Phrase-by-phrase decoding with dynamic graph re-scoring between phrases."""
    with ad.no_grad():
        cache = cache if cache is not None else build_cache(model, doc)
        dyn = build_dynamic_vocab(doc.forms, model.vocab, cache.merge,
                                  copy_only=model.cfg.copy_only)
        decoded_flat: list[int] = []
        previous: list[list[int]] = []
        kept: list[tuple[list[int], float]] = []
        snapshots: list[np.ndarray] = []

        for _ in range(cfg.max_phrases):
            phr_emb = phrase_embedding(decoded_flat, model.emb_word,
                                       len(model.vocab), model.cfg.word_dim)
            state = encode(model, cache, phr_emb)
            if collect_snapshots:
                snapshots.append(cache.graph.weights.copy())
            h_att = attendable(model, state.h_glu)
            beam = beam_search_phrase(model, h_att, state.c, dyn, previous, cfg)
            best = beam[0]
            content = list(best.content)
            terminator = best.tokens[-1] if best.tokens and \
                best.tokens[-1] in TERMINATORS else None
            if content:
                kept.append((content, best.theta_hat))
                previous.append(content)
                decoded_flat.extend(content)
            if terminator == EOS or not content:
                break

    phrases: list[list[str]] = []
    scores: list[float] = []
    seen: set[tuple[str, ...]] = set()
    for content, score in kept:
        surface = [dyn.token(t) for t in content]
        key = tuple(stem(tok) for tok in surface)
        if key in seen:
            continue
        seen.add(key)
        phrases.append(surface)
        scores.append(score)
    return GenerationResult(phrases=phrases, scores=scores, snapshots=snapshots,
                            raw_phrases=[c for c, _ in kept])
