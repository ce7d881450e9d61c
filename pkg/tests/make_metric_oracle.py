"""Independent recount of every evaluation metric on the eval fixture.

This script shares only the data contract with the package (tokenizer and
stemmer); matching and metric arithmetic are re-derived here from scratch
so the committed oracle file cross-checks kpgen.metrics rather than
mirroring it.  Run from the repo root:

    python3 tests/make_metric_oracle.py

writes tests/fixtures/metric_oracle.json.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

from kpgen.corpus import normalize
from kpgen.stemming import stem

FIXTURES = Path(__file__).parent / "fixtures"


def stems(tokens):
    return tuple(stem(t) for t in tokens)


def dedupe(seqs):
    out, seen = [], set()
    for s in seqs:
        if s and s not in seen:
            seen.add(s)
            out.append(s)
    return out


def contiguous(hay, needle):
    n, k = len(hay), len(needle)
    return any(tuple(hay[i:i + k]) == tuple(needle) for i in range(n - k + 1)) if k else False


def doc_tokens(obj):
    toks = []
    for sent in obj["sentences"]:
        toks.extend(t["form"] for t in sent["tokens"])
    return toks


def greedy_relevance(preds, golds):
    used = set()
    rel = []
    for p in preds:
        hit = None
        for j, g in enumerate(golds):
            if j not in used and g == p:
                hit = j
                break
        if hit is not None:
            used.add(hit)
        rel.append(1 if hit is not None else 0)
    return rel


def f1(c, np_, ng):
    if np_ == 0 or ng == 0:
        return 0.0
    p, r = c / np_, c / ng
    return 0.0 if p + r == 0 else 2 * p * r / (p + r)


def main() -> None:
    gold_rows = [json.loads(l) for l in
                 (FIXTURES / "eval_gold.jsonl").read_text().splitlines() if l.strip()]
    pred_rows = {o["id"]: o["phrases"] for o in
                 (json.loads(l) for l in
                  (FIXTURES / "eval_preds.jsonl").read_text().splitlines() if l.strip())}

    per_doc = {}
    sums = dict(f1_m=0.0, f1_5_filled=0.0, f1_5_unfilled=0.0, f1_10_unfilled=0.0,
                ndcg_10=0.0, avg_num=0.0, corr_num=0.0)
    n_eval = 0
    n_skipped = 0
    for obj in gold_rows:
        toks = doc_tokens(obj)
        hay = stems(toks)
        golds = dedupe([stems(normalize(k)) for k in obj["keyphrases"]
                        if contiguous(hay, stems(normalize(k)))])
        preds = dedupe([stems(p) for p in pred_rows.get(obj["id"], [])])
        if not golds:
            n_skipped += 1
            continue
        n_eval += 1
        rel = greedy_relevance(preds, golds)
        c_all = sum(rel)
        c5 = sum(rel[:5])
        c10 = sum(rel[:10])
        dcg = sum(r / math.log2(i + 2) for i, r in enumerate(rel[:10]))
        idcg = sum(1.0 / math.log2(i + 2) for i in range(min(10, len(golds))))
        vals = dict(
            f1_m=f1(c_all, len(preds), len(golds)),
            f1_5_filled=f1(c5, 5, len(golds)),
            f1_5_unfilled=f1(c5, min(5, len(preds)), len(golds)),
            f1_10_unfilled=f1(c10, min(10, len(preds)), len(golds)),
            ndcg_10=dcg / idcg if idcg else 0.0,
            avg_num=float(len(preds)),
            corr_num=float(c_all),
        )
        per_doc[obj["id"]] = vals
        for k, v in vals.items():
            sums[k] += v

    oracle = {
        "macro": {k: v / n_eval for k, v in sums.items()},
        "per_doc": per_doc,
        "n_docs": n_eval,
        "n_skipped_empty_gold": n_skipped,
    }
    out = FIXTURES / "metric_oracle.json"
    out.write_text(json.dumps(oracle, indent=2, sort_keys=True) + "\n")
    print(f"wrote {out} ({n_eval} evaluated, {n_skipped} skipped)")


if __name__ == "__main__":
    main()
