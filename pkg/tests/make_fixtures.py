"""Regenerate the committed test fixtures (deterministic).

Run from the repo root:  python3 tests/make_fixtures.py
Outputs land in tests/fixtures/.  The annotated files are synthetic:
token forms/stems come from the package's own normalize/stem, trees are
simple forward-attachment structures that satisfy every tree invariant.
"""

from __future__ import annotations

import json
from pathlib import Path

from kpgen.corpus import normalize
from kpgen.stemming import stem

FIXTURES = Path(__file__).parent / "fixtures"

_FUNCTION_POS = {
    "a": "DET", "an": "DET", "the": "DET", "this": "DET", "these": "DET",
    "we": "PRON", "it": "PRON", "of": "ADP", "for": "ADP", "on": "ADP",
    "in": "ADP", "with": "ADP", "from": "ADP", "and": "CCONJ",
    "or": "CCONJ", "is": "AUX", "are": "AUX", "be": "AUX", "to": "PART",
}

_DEPRELS = ["compound", "amod", "nsubj", "obj", "nmod", "case", "det", "conj"]


def pos_of(tok: str) -> str:
    if tok in _FUNCTION_POS:
        return _FUNCTION_POS[tok]
    if tok == "<digit>":
        return "NUM"
    if tok.endswith(("ing", "ed", "ize", "ys")):
        return "VERB"
    if tok.endswith(("al", "ive", "ous", "ic")):
        return "ADJ"
    return "NOUN"


def sentence_tokens(sentence: str) -> list[dict]:
    """Annotate one sentence: deterministic forward-attachment tree."""
    forms = normalize(sentence)
    toks = []
    for i, form in enumerate(forms):
        if i == 0:
            head, rel = 0, "root"
        elif i % 3 == 0 and i >= 2:
            head, rel = i - 1, _DEPRELS[i % len(_DEPRELS)]
        else:
            head, rel = i, _DEPRELS[(i * 2 + 1) % len(_DEPRELS)]
        toks.append({"form": form, "stem": stem(form), "upos": pos_of(form),
                     "head": head, "deprel": rel})
    return toks


def annotate(doc_id: str, title: str, abstract: str, keyphrases: list[str]) -> dict:
    text_sentences = [s.strip() for s in f"{title}. {abstract}".split(".") if s.strip()]
    return {
        "id": doc_id,
        "sentences": [{"tokens": sentence_tokens(s)} for s in text_sentences],
        "keyphrases": keyphrases,
    }


TINY_DOCS = [
    ("abs1",
     "Dependency graphs improve phrase extraction",
     "We study syntactic dependency graphs for scientific documents. The graph structure "
     "connects related words across long distances. Extraction quality improves when the "
     "encoder observes these connections.",
     ["dependency graphs", "phrase extraction"]),
    ("abs2",
     "Copy mechanisms for rare words",
     "Sequence models struggle with rare words in technical text. A copy mechanism lets the "
     "decoder point at source positions directly. We measure the effect on recall for "
     "out of vocabulary terms.",
     ["copy mechanism", "rare words", "recall"]),
    ("abs3",
     "Beam width and output diversity",
     "Wide beams explore many candidate sequences during decoding. Without a diversity "
     "bonus the beam collapses onto near duplicates. We quantify this collapse on four "
     "benchmark collections.",
     ["beam width", "output diversity", "benchmark collections", "near duplicates"]),
]

# Small closed-world corpus for the overfit run: two present phrases per
# document, every phrase occurs verbatim in its abstract.
TOY_DOCS = [
    ("toy1",
     "graph encoders for papers",
     "graph encoders read papers. strong graph encoders find salient topics.",
     ["graph encoders", "salient topics"]),
    ("toy2",
     "copy decoders and rare tokens",
     "copy decoders select rare tokens. rare tokens need copy decoders.",
     ["copy decoders", "rare tokens"]),
    ("toy3",
     "beam search for phrases",
     "beam search ranks phrases. careful beam search finds diverse phrases.",
     ["beam search", "diverse phrases"]),
    ("toy4",
     "attention over source words",
     "attention weights source words. sharp attention reveals keyword spans.",
     ["attention", "keyword spans"]),
    ("toy5",
     "training tiny models quickly",
     "training tiny models converges quickly. tiny models memorize the corpus.",
     ["tiny models", "memorize"]),
]


# Evaluation fixture: ten documents exercising every metric edge case.
# (id, title, abstract, gold keyphrase strings, predicted token lists)
EVAL_DOCS = [
    ("e1", "Graph networks for molecules",
     "Spectral methods and graph networks model molecular structure.",
     ["graph networks", "spectral methods"],
     [["graph", "networks"], ["spectral", "methods"]]),
    ("e2", "Adaptive filters in receivers",
     "We combine adaptive filters with noise estimation, channel models and beam tracking.",
     ["adaptive filters", "noise estimation", "channel models", "beam tracking"],
     [["adaptive", "filters"], ["noise", "estimation"], ["wrong", "phrase"]]),
    ("e3", "Routing tables and cache layers",
     "Routing tables, cache layers, load balancing, retry budgets and failure domains interact.",
     ["routing tables", "cache layers", "load balancing", "retry budgets",
      "failure domains"],
     [["routing", "tables"], ["cache", "layers"], ["load", "balancing"],
      ["made", "up"]]),
    ("e4", "Sparse solvers on lattices",
     "Sparse solvers exploit lattice structure for fast convergence.",
     ["sparse solvers", "lattice structure"],
     []),
    ("e5", "A note on notation",
     "This short note fixes notation used elsewhere.",
     ["quantum chromodynamics", "string theory"],
     [["short", "note"]]),
    ("e6", "Neural networks and deep models",
     "Neural networks power deep models in production systems.",
     ["neural networks", "deep models"],
     [["neural", "network"], ["neural", "networks"], ["deep", "models"]]),
    ("e7", "A dozen candidate phrases",
     "Energy grids need demand forecasting, storage planning and market design today.",
     ["energy grids", "market design"],
     [["energy", "grids"], ["c", "one"], ["c", "two"], ["c", "three"],
      ["c", "four"], ["c", "five"], ["c", "six"], ["c", "seven"],
      ["c", "eight"], ["c", "nine"], ["c", "ten"], ["market", "design"]]),
    ("e8", "Four answers two found",
     "Query planners, index scans, join orders and cost models shape latency.",
     ["query planners", "index scans", "join orders", "cost models"],
     [["missed", "one"], ["index", "scans"], ["missed", "two"],
      ["cost", "models"]]),
    ("e9", "Distributed computing systems at scale",
     "Distributed computing systems tolerate partial failure.",
     ["distributed computing systems"],
     [["distribute", "computed", "system"]]),
    ("e10", "Compilers and register allocation",
     "Compilers perform register allocation and instruction scheduling.",
     ["register allocation", "instruction scheduling"],
     [["register", "allocation"], ["instruction", "scheduling"],
      ["extra", "a"], ["extra", "b"], ["extra", "c"]]),
]


def write_jsonl(path: Path, rows: list[dict]) -> None:
    path.write_text("".join(json.dumps(r, ensure_ascii=False) + "\n" for r in rows),
                    encoding="utf-8")


def main() -> None:
    FIXTURES.mkdir(exist_ok=True)
    write_jsonl(FIXTURES / "annotated_tiny.jsonl",
                [annotate(*doc) for doc in TINY_DOCS])
    write_jsonl(FIXTURES / "toy_train.jsonl",
                [annotate(*doc) for doc in TOY_DOCS])
    write_jsonl(FIXTURES / "raw_sample.jsonl",
                [{"id": i, "title": t, "abstract": a, "keyphrases": k}
                 for i, t, a, k in TINY_DOCS])
    write_jsonl(FIXTURES / "eval_gold.jsonl",
                [annotate(i, t, a, k) for i, t, a, k, _ in EVAL_DOCS])
    write_jsonl(FIXTURES / "eval_preds.jsonl",
                [{"id": i, "phrases": preds, "scores": [0.0] * len(preds)}
                 for i, _, _, _, preds in EVAL_DOCS])
    # sanity: everything must pass the package's own validator
    from kpgen.deptrees import read_annotated
    for name in ("annotated_tiny.jsonl", "toy_train.jsonl"):
        docs = read_annotated(FIXTURES / name)
        print(f"{name}: {len(docs)} docs, "
              f"{sum(len(d.tokens) for d in docs)} tokens")


if __name__ == "__main__":
    main()
