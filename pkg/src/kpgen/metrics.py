"""Evaluation: stemmed exact matching, F1 variants, NDCG, count statistics.

Matching credits each ground-truth phrase at most once, in prediction
order.  Macro averages skip documents whose present-keyphrase set is empty
and report how many were skipped.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .corpus import FILLER_TOKEN, normalize, split_present_absent
from .deptrees import read_annotated
from .errors import DataError
from .stemming import stem_tokens


@dataclass
class MatchSet:
    """Stemmed, deduplicated predictions and gold phrases for one document."""

    pred: list[tuple[str, ...]]        # decode order preserved
    gold: list[tuple[str, ...]]
    matches: list[int | None] = field(default_factory=list)  # gold index per pred

    def __post_init__(self) -> None:
        if not self.matches:
            used: set[int] = set()
            for p in self.pred:
                hit = next((j for j, g in enumerate(self.gold)
                            if j not in used and g == p), None)
                if hit is not None:
                    used.add(hit)
                self.matches.append(hit)

    @property
    def relevance(self) -> list[int]:
        return [1 if m is not None else 0 for m in self.matches]

    def correct_in_top(self, k: int | None = None) -> int:
        rel = self.relevance if k is None else self.relevance[:k]
        return sum(rel)


def _dedupe(phrases: Sequence[Sequence[str]]) -> list[tuple[str, ...]]:
    seen: set[tuple[str, ...]] = set()
    out: list[tuple[str, ...]] = []
    for p in phrases:
        key = tuple(p)
        if key and key not in seen:
            seen.add(key)
            out.append(key)
    return out


def make_matchset(predictions: Sequence[Sequence[str]],
                  gold: Sequence[Sequence[str]]) -> MatchSet:
    pred_stems = _dedupe([stem_tokens(p) for p in predictions])
    gold_stems = _dedupe([stem_tokens(g) for g in gold])
    return MatchSet(pred=pred_stems, gold=gold_stems)


def _f1(correct: int, n_pred: int, n_gold: int) -> float:
    if n_pred == 0 or n_gold == 0:
        return 0.0
    p = correct / n_pred
    r = correct / n_gold
    return 0.0 if p + r == 0 else 2 * p * r / (p + r)


def f1_at_m(ms: MatchSet) -> float:
    """F1 over all (deduplicated) predictions."""
    return _f1(ms.correct_in_top(), len(ms.pred), len(ms.gold))


def f1_at_5_filled(ms: MatchSet) -> float:
    """F1 over exactly five predictions; short lists are padded with
    guaranteed-non-matching sentinel phrases, long ones truncated."""
    correct = ms.correct_in_top(5)
    return _f1(correct, 5, len(ms.gold))


def filler_phrase(i: int) -> list[str]:
    """Sentinel phrase used when padding; the filler token never matches."""
    return [FILLER_TOKEN, str(i)]


def f1_at_k_unfilled(ms: MatchSet, k: int) -> float:
    """F1 over the top min(k, |pred|) predictions, no padding."""
    n = min(k, len(ms.pred))
    return _f1(ms.correct_in_top(k), n, len(ms.gold))


def ndcg_at_10(ms: MatchSet) -> float:
    rel = ms.relevance[:10]
    dcg = sum(r / math.log2(i + 2) for i, r in enumerate(rel))
    ideal = min(10, len(ms.gold))
    idcg = sum(1.0 / math.log2(i + 2) for i in range(ideal))
    return 0.0 if idcg == 0 else dcg / idcg


@dataclass
class EvalReport:
    f1_m: float
    f1_5_filled: float
    f1_5_unfilled: float
    f1_10_unfilled: float
    ndcg_10: float
    avg_num: float
    corr_num: float
    n_docs: int
    n_skipped_empty_gold: int
    per_doc: list[dict] = field(default_factory=list)

    def to_json(self) -> str:
        payload = {k: getattr(self, k) for k in
                   ("f1_m", "f1_5_filled", "f1_5_unfilled", "f1_10_unfilled",
                    "ndcg_10", "avg_num", "corr_num", "n_docs",
                    "n_skipped_empty_gold")}
        return json.dumps(payload, indent=2, sort_keys=True)

    def per_doc_csv(self) -> str:
        header = ("id,f1_m,f1_5_filled,f1_5_unfilled,f1_10_unfilled,"
                  "ndcg_10,num_pred,num_correct,num_gold")
        rows = [header]
        for row in self.per_doc:
            rows.append(",".join(str(row[c]) for c in header.split(",")))
        return "\n".join(rows) + "\n"


def evaluate(per_doc: Sequence[tuple[str, Sequence[Sequence[str]], Sequence[Sequence[str]]]]
             ) -> EvalReport:
    """Macro-averaged metrics over (doc_id, predictions, gold) triples."""
    sums = {k: 0.0 for k in ("f1_m", "f1_5_filled", "f1_5_unfilled",
                             "f1_10_unfilled", "ndcg_10", "avg_num", "corr_num")}
    rows: list[dict] = []
    n_eval = 0
    n_skipped = 0
    for doc_id, preds, gold in per_doc:
        ms = make_matchset(preds, gold)
        if not ms.gold:
            n_skipped += 1
            continue
        n_eval += 1
        vals = {
            "f1_m": f1_at_m(ms),
            "f1_5_filled": f1_at_5_filled(ms),
            "f1_5_unfilled": f1_at_k_unfilled(ms, 5),
            "f1_10_unfilled": f1_at_k_unfilled(ms, 10),
            "ndcg_10": ndcg_at_10(ms),
            "avg_num": float(len(ms.pred)),
            "corr_num": float(ms.correct_in_top()),
        }
        for k, v in vals.items():
            sums[k] += v
        rows.append({"id": doc_id, "f1_m": vals["f1_m"],
                     "f1_5_filled": vals["f1_5_filled"],
                     "f1_5_unfilled": vals["f1_5_unfilled"],
                     "f1_10_unfilled": vals["f1_10_unfilled"],
                     "ndcg_10": vals["ndcg_10"],
                     "num_pred": len(ms.pred),
                     "num_correct": ms.correct_in_top(),
                     "num_gold": len(ms.gold)})
    if n_eval == 0:
        raise DataError("every document had an empty present-keyphrase set")
    macro = {k: v / n_eval for k, v in sums.items()}
    return EvalReport(n_docs=n_eval, n_skipped_empty_gold=n_skipped,
                      per_doc=rows, **macro)


def load_predictions(path: str | Path) -> dict[str, list[list[str]]]:
    preds: dict[str, list[list[str]]] = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as e:
            raise DataError(f"malformed prediction JSON: {e.msg}", line=lineno) from None
        if "id" not in obj or "phrases" not in obj:
            raise DataError("prediction rows need 'id' and 'phrases'", line=lineno)
        preds[obj["id"]] = [list(p) for p in obj["phrases"]]
    return preds


def present_gold(doc) -> list[list[str]]:
    phrases = [normalize(" ".join(p)) for p in doc.keyphrases]
    present, _ = split_present_absent(doc.forms, phrases)
    return present


def evaluate_files(pred_path: str | Path, gold_path: str | Path) -> EvalReport:
    """Prediction JSONL against annotated gold; missing docs count as empty."""
    preds = load_predictions(pred_path)
    docs = read_annotated(gold_path)
    triples = [(doc.id, preds.get(doc.id, []), present_gold(doc)) for doc in docs]
    return evaluate(triples)
