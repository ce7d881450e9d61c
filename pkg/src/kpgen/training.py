"""Teacher-forced training: loss, Adam with global-norm clipping, validation
perplexity schedule and early stopping."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .config import RunConfig
from .corpus import EOS, SEP, build_target, normalize, split_present_absent
from .decoder import attendable, build_dynamic_vocab, coverage_penalty, decode_step, init_state
from .deptrees import AnnotatedDocument
from .encoder import build_cache, encode
from .errors import DataError
from .graph import phrase_embedding
from .model import KeyphraseModel


@dataclass
class DocBundle:
    """Per-document training material: targets over the dynamic vocabulary."""

    doc: AnnotatedDocument
    dyn: object
    phrase_indices: list[list[int]]   # content tokens per phrase, target order
    n_tokens: int                     # content + separators + EOS

    @property
    def length(self) -> int:
        return len(self.doc.tokens)


def prepare_document(model: KeyphraseModel, doc: AnnotatedDocument) -> DocBundle | None:
    """Build targets for one document; None when it has no present phrase."""
    phrases = [normalize(" ".join(p)) for p in doc.keyphrases]
    present, _ = split_present_absent(doc.forms, phrases)
    if not present:
        return None
    from .graph import build_merge_map
    merge = build_merge_map(doc.stems)
    dyn = build_dynamic_vocab(doc.forms, model.vocab, merge,
                              copy_only=model.cfg.copy_only)
    target = build_target(present, dyn, doc.forms)
    phrase_indices = [target.indices[a:b] for a, b in target.phrase_spans]
    return DocBundle(doc=doc, dyn=dyn, phrase_indices=phrase_indices,
                     n_tokens=len(target.indices))


def _pick_probability(probs: Tensor, token: int) -> Tensor:
    col = ad.reshape(probs, (probs.shape[1], 1))
    return ad.gather_rows(col, np.array([token]))


def document_loss(model: KeyphraseModel, bundle: DocBundle, clamp_log: float,
                  training: bool, rng: np.random.Generator | None
                  ) -> tuple[Tensor, Tensor, int, int]:
    """Teacher-forced NLL and coverage sums for one document.

    The dynamic graph update runs at every ground-truth SEP boundary using
    the phrases decoded so far; decoder state and coverage restart from the
    re-encoded context.  Returns (nll_sum, coverage_sum, token_count,
    clamped_count).
    """
    cache = build_cache(model, bundle.doc)
    floor = math.exp(clamp_log)
    decoded_flat: list[int] = []
    nll_sum: Tensor | None = None
    cov_sum: Tensor | None = None
    clamped = 0
    n_phrases = len(bundle.phrase_indices)

    phr_emb = phrase_embedding(decoded_flat, model.emb_word,
                               len(model.vocab), model.cfg.word_dim)
    enc_state = encode(model, cache, phr_emb, training=training, rng=rng)
    h_att = attendable(model, enc_state.h_glu)
    state = init_state(model, enc_state.c, h_att.shape[0])

    for p, phrase in enumerate(bundle.phrase_indices):
        terminator = SEP if p + 1 < n_phrases else EOS
        for tok in list(phrase) + [terminator]:
            probs, attn, next_state = decode_step(model, state, h_att, bundle.dyn)
            if float(probs.data[0, tok]) < floor:
                clamped += 1
            cov = coverage_penalty(attn, state.coverage)
            cov_sum = cov if cov_sum is None else ad.add(cov_sum, cov)
            nll = ad.mul(ad.log(ad.maximum(_pick_probability(probs, tok), floor)), -1.0)
            nll_sum = nll if nll_sum is None else ad.add(nll_sum, nll)
            next_state.prev_token = tok
            state = next_state
        if p + 1 < n_phrases:
            decoded_flat.extend(phrase)
            phr_emb = phrase_embedding(decoded_flat, model.emb_word,
                                       len(model.vocab), model.cfg.word_dim)
            enc_state = encode(model, cache, phr_emb, training=training, rng=rng)
            h_att = attendable(model, enc_state.h_glu)
            state = init_state(model, enc_state.c, h_att.shape[0])
    assert nll_sum is not None and cov_sum is not None
    return nll_sum, cov_sum, bundle.n_tokens, clamped


def batch_loss(model: KeyphraseModel, bundles: list[DocBundle], coverage_weight: float,
               clamp_log: float = -50.0, training: bool = False,
               rng: np.random.Generator | None = None) -> tuple[Tensor, dict]:
    """Mean per-token NLL over the batch plus the weighted coverage term."""
    if not bundles:
        raise DataError("empty batch")
    nll_total: Tensor | None = None
    cov_total: Tensor | None = None
    tokens = 0
    clamped = 0
    for bundle in bundles:
        nll, cov, n, c = document_loss(model, bundle, clamp_log, training, rng)
        nll_total = nll if nll_total is None else ad.add(nll_total, nll)
        cov_total = cov if cov_total is None else ad.add(cov_total, cov)
        tokens += n
        clamped += c
    inv = 1.0 / tokens
    loss = ad.mul(ad.add(nll_total, ad.mul(cov_total, coverage_weight)), inv)
    loss = ad.reshape(loss, ())
    stats = {
        "tokens": tokens,
        "clamped": clamped,
        "nll_per_token": float(nll_total.data.reshape(())) / tokens,
        "coverage_per_token": float(cov_total.data.reshape(())) / tokens,
    }
    return loss, stats


def validation_perplexity(model: KeyphraseModel, bundles: list[DocBundle],
                          clamp_log: float = -50.0) -> float:
    """exp(mean per-token NLL); the coverage term is excluded."""
    nll = 0.0
    tokens = 0
    with ad.no_grad():
        for bundle in bundles:
            n_sum, _, n, _ = document_loss(model, bundle, clamp_log,
                                           training=False, rng=None)
            nll += float(n_sum.data.reshape(()))
            tokens += n
    return math.exp(nll / tokens)


class Adam:
    """Adam with the standard bias-corrected moments."""

    def __init__(self, params: dict[str, Tensor], lr: float,
                 betas: tuple[float, float] = (0.9, 0.999), eps: float = 1e-8) -> None:
        self.params = params
        self.lr = lr
        self.beta1, self.beta2 = betas
        self.eps = eps
        self.t = 0
        self.m = {k: np.zeros_like(p.data) for k, p in params.items()}
        self.v = {k: np.zeros_like(p.data) for k, p in params.items()}

    def zero_grad(self) -> None:
        for p in self.params.values():
            p.zero_grad()

    def step(self) -> None:
        self.t += 1
        b1t = 1.0 - self.beta1 ** self.t
        b2t = 1.0 - self.beta2 ** self.t
        for k, p in self.params.items():
            g = p.grad
            if g is None:
                continue
            self.m[k] = self.beta1 * self.m[k] + (1.0 - self.beta1) * g
            self.v[k] = self.beta2 * self.v[k] + (1.0 - self.beta2) * g * g
            m_hat = self.m[k] / b1t
            v_hat = self.v[k] / b2t
            p.data = p.data - self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


def clip_gradients(params: dict[str, Tensor], max_norm: float) -> float:
    """Scale all gradients so their global norm is at most max_norm."""
    total = 0.0
    for p in params.values():
        if p.grad is not None:
            total += float(np.sum(p.grad * p.grad))
    norm = math.sqrt(total)
    if norm > max_norm and norm > 0:
        scale = max_norm / norm
        for p in params.values():
            if p.grad is not None:
                p.grad *= scale
    return norm


@dataclass
class TrainState:
    step: int = 0
    best_ppl: float = math.inf
    stagnation: int = 0
    lr: float = 1e-3
    halvings: int = 0
    stopped_early: bool = False


@dataclass
class TrainResult:
    state: TrainState
    log_rows: list[str] = field(default_factory=list)
    best_checkpoint: str | None = None


def make_batches(bundles: list[DocBundle], batch_size: int,
                 rng: np.random.Generator) -> list[list[DocBundle]]:
    """Length-bucketed batches in a seeded random order."""
    ordered = sorted(bundles, key=lambda b: (b.length, b.doc.id))
    batches = [ordered[i:i + batch_size] for i in range(0, len(ordered), batch_size)]
    perm = rng.permutation(len(batches))
    return [batches[i] for i in perm]


def train_model(model: KeyphraseModel, train_docs: list[AnnotatedDocument],
                valid_docs: list[AnnotatedDocument], cfg: RunConfig,
                out_dir: str | Path | None = None) -> TrainResult:
    rng = np.random.default_rng(cfg.seed)
    train_bundles = [b for d in train_docs if (b := prepare_document(model, d))]
    valid_bundles = [b for d in valid_docs if (b := prepare_document(model, d))]
    if not train_bundles:
        raise DataError("no training document has a present keyphrase")
    if not valid_bundles:
        valid_bundles = train_bundles

    opt = Adam(model.parameters(), lr=cfg.train.learning_rate)
    state = TrainState(lr=cfg.train.learning_rate)
    rows = ["step,train_loss,valid_ppl,lr"]
    best_dir = None
    stop = False

    for _ in range(cfg.train.max_epochs):
        if stop:
            break
        for batch in make_batches(train_bundles, cfg.train.batch_size, rng):
            ad.reset_tape()
            opt.zero_grad()
            loss, _ = batch_loss(model, batch, cfg.train.coverage_weight,
                                 cfg.train.log_clamp_threshold, training=True, rng=rng)
            loss_val = loss.item()
            if not math.isfinite(loss_val):
                raise ad.NumericError(f"non-finite training loss at step {state.step}")
            ad.backward(loss)
            clip_gradients(opt.params, cfg.train.grad_clip)
            opt.lr = state.lr
            opt.step()
            state.step += 1

            ppl_cell = ""
            if state.step % cfg.train.eval_every == 0:
                ppl = validation_perplexity(model, valid_bundles,
                                            cfg.train.log_clamp_threshold)
                ppl_cell = f"{ppl:.10g}"
                if ppl < state.best_ppl:
                    state.best_ppl = ppl
                    state.stagnation = 0
                    if out_dir is not None:
                        best_dir = Path(out_dir) / "checkpoint"
                        model.save(best_dir)
                else:
                    state.stagnation += 1
                    state.lr = state.lr / 2.0
                    state.halvings += 1
                    if state.stagnation >= cfg.train.patience:
                        state.stopped_early = True
                        stop = True
            rows.append(f"{state.step},{loss_val:.10g},{ppl_cell},{state.lr:.10g}")
            if stop or (cfg.train.max_steps and state.step >= cfg.train.max_steps):
                stop = True
                break

    if out_dir is not None:
        if best_dir is None:
            best_dir = Path(out_dir) / "checkpoint"
            model.save(best_dir)
        log_path = Path(out_dir) / "train_log.csv"
        log_path.write_text("\n".join(rows) + "\n", encoding="utf-8")
    return TrainResult(state=state, log_rows=rows,
                       best_checkpoint=str(best_dir) if best_dir else None)
