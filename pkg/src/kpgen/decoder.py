"""One-step decoding: attention over merged positions, copy distribution,
coverage bookkeeping.

The output distribution covers the document's dynamic vocabulary: the static
inventory plus an extension slot for every unique document-only token.
Generation and copy branches are mixed by a learned gate; under
``copy_only`` the gate is pinned to 0 and SEP / EOS become two synthetic
attendable positions so a pure-copy decoder can still terminate phrases.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .corpus import EOS, SEP, UNK, Vocabulary
from .graph import MergeMap
from .model import KeyphraseModel
from .nn import linear


@dataclass
class DynamicVocabulary:
    """Static vocabulary extended with this document's out-of-vocabulary tokens."""

    base: Vocabulary
    extension: list[str]                 # first-occurrence order
    copy_targets: np.ndarray             # merged position -> dynamic index

    @property
    def size(self) -> int:
        return len(self.base) + len(self.extension)

    def index(self, token: str) -> int:
        idx = self.base.stoi.get(token)
        if idx is not None:
            return idx
        try:
            return len(self.base) + self.extension.index(token)
        except ValueError:
            return UNK

    def token(self, idx: int) -> str:
        if idx < len(self.base):
            return self.base.token(idx)
        return self.extension[idx - len(self.base)]


def build_dynamic_vocab(doc_forms: Sequence[str], vocab: Vocabulary,
                        merge: MergeMap, copy_only: bool = False) -> DynamicVocabulary:
    """Extension entries for unique document-only tokens, in first-occurrence
    order; each merged position copies to its group representative's index."""
    extension: list[str] = []
    ext_index: dict[str, int] = {}
    for form in doc_forms:
        if form not in vocab and form not in ext_index:
            ext_index[form] = len(vocab) + len(extension)
            extension.append(form)
    targets = []
    for group in merge.groups:
        rep = doc_forms[group[0]]
        targets.append(vocab.stoi.get(rep, ext_index.get(rep, UNK)))
    if copy_only:
        targets.extend([SEP, EOS])
    return DynamicVocabulary(vocab, extension, np.array(targets, dtype=np.intp))


@dataclass
class DecoderState:
    hidden: list[Tensor]      # one (1, hidden) row per layer
    coverage: Tensor          # (1, n_attend) accumulated attention
    prev_token: int           # dynamic index of the previously emitted token


def init_state(model: KeyphraseModel, c: Tensor, n_attend: int) -> DecoderState:
    """Phrase-initial state: every layer starts from the context vector,
    the previous token is the phrase separator."""
    return DecoderState(hidden=[c for _ in model.dec_cells],
                        coverage=ad.zeros((1, n_attend)),
                        prev_token=SEP)


def attendable(model: KeyphraseModel, h_glu: Tensor) -> Tensor:
    """Rows the decoder may attend to; copy_only appends the SEP/EOS rows."""
    if model.cfg.copy_only:
        return ad.concat([h_glu, model.sep_row, model.eos_row], axis=0)
    return h_glu


def _input_embedding(model: KeyphraseModel, token: int) -> Tensor:
    idx = token if token < len(model.vocab) else UNK
    return ad.gather_rows(model.emb_word, np.array([idx]))


def decode_step(model: KeyphraseModel, state: DecoderState, h_attend: Tensor,
                dyn: DynamicVocabulary) -> tuple[Tensor, Tensor, DecoderState]:
    """One decoder step.

    Returns (probabilities over the dynamic vocabulary (1, |Vd|), attention
    over attendable positions (1, n), next state).  Coverage in the next
    state is the old coverage plus this step's attention.
    """
    x = _input_embedding(model, state.prev_token)
    hs: list[Tensor] = []
    inp = x
    for cell, h in zip(model.dec_cells, state.hidden):
        h_new = cell.step(inp, h)
        hs.append(h_new)
        inp = h_new
    s_top = hs[-1]

    scores = ad.matmul(ad.matmul(s_top, model.attn_w), ad.transpose(h_attend))
    attn = ad.softmax(scores, axis=1)
    ctx = ad.matmul(attn, h_attend)

    copy_flat = ad.scatter_add(ad.reshape(attn, (attn.shape[1],)),
                               dyn.copy_targets, dyn.size)
    p_copy = ad.reshape(copy_flat, (1, dyn.size))

    if model.cfg.copy_only:
        probs = p_copy
    else:
        feats = ad.concat([s_top, ctx], axis=1)
        p_gen = ad.softmax(linear(feats, model.gen_w, model.gen_b), axis=1)
        if len(dyn.extension) > 0:
            p_gen = ad.concat([p_gen, ad.zeros((1, len(dyn.extension)))], axis=1)
        gate = ad.sigmoid(linear(ad.concat([s_top, ctx, x], axis=1),
                                 model.gate_w, model.gate_b))
        g = ad.broadcast_to(gate, (1, dyn.size))
        probs = ad.add(ad.mul(g, p_gen), ad.mul(ad.sub(1.0, g), p_copy))

    new_state = DecoderState(hidden=hs,
                             coverage=ad.add(state.coverage, attn),
                             prev_token=state.prev_token)
    return probs, attn, new_state


def coverage_penalty(attention: Tensor, coverage: Tensor) -> Tensor:
    """Sum of elementwise min(attention, coverage); 0 on the first step."""
    if attention.shape != coverage.shape:
        raise ad.ShapeError("coverage_penalty", attention.shape, coverage.shape)
    return ad.reduce_sum(ad.minimum(attention, coverage))
