"""Raw dataset loading, text normalization, vocabularies and target sequences."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .errors import DataError
from .stemming import stem_tokens

# Reserved vocabulary entries with fixed indices.  The filler sentinel is a
# guaranteed-never-matching phrase token used when padding short prediction
# lists during evaluation.
PAD_TOKEN = "<pad>"
UNK_TOKEN = "<unk>"
SEP_TOKEN = "<sep>"
EOS_TOKEN = "<eos>"
DIGIT_TOKEN = "<digit>"
FILLER_TOKEN = "<filler>"
RESERVED_TOKENS = (PAD_TOKEN, UNK_TOKEN, SEP_TOKEN, EOS_TOKEN, DIGIT_TOKEN, FILLER_TOKEN)
PAD, UNK, SEP, EOS, DIGIT, FILLER = range(len(RESERVED_TOKENS))

_PIECE_RE = re.compile(r"<digit>|[^\W_]+", re.UNICODE)
_PART_RE = re.compile(r"[0-9]+|[^\W\d_]+", re.UNICODE)


@dataclass
class RawDocument:
    id: str
    title: str
    abstract: str
    keyphrases: list[str]

    @property
    def text(self) -> str:
        return f"{self.title} {self.abstract}".strip()


def load_raw_jsonl(path: str | Path) -> list[RawDocument]:
    docs: list[RawDocument] = []
    seen: set[str] = set()
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as e:
            raise DataError(f"malformed JSON: {e.msg}", line=lineno) from None
        for key in ("id", "title", "abstract", "keyphrases"):
            if key not in obj:
                raise DataError(f"missing field {key!r}", line=lineno)
        if obj["id"] in seen:
            raise DataError(f"duplicate document id {obj['id']!r}", line=lineno)
        seen.add(obj["id"])
        if any(not isinstance(k, str) or not k.strip() for k in obj["keyphrases"]):
            raise DataError("keyphrases must be non-empty strings", doc_id=obj["id"], line=lineno)
        docs.append(RawDocument(obj["id"], obj["title"], obj["abstract"],
                                list(obj["keyphrases"])))
    return docs


def normalize(text: str) -> list[str]:
    """Lower-case, split on whitespace/punctuation, digit runs -> <digit>.

    The <digit> sentinel is treated atomically so normalize is idempotent
    over its own output.
    """
    out: list[str] = []
    for piece in _PIECE_RE.findall(text.lower()):
        if piece == DIGIT_TOKEN:
            out.append(DIGIT_TOKEN)
            continue
        for part in _PART_RE.findall(piece):
            out.append(DIGIT_TOKEN if part[0].isdigit() else part)
    return out


class Vocabulary:
    """Static token inventory with fixed reserved indices."""

    def __init__(self, tokens: Sequence[str]) -> None:
        if tuple(tokens[: len(RESERVED_TOKENS)]) != RESERVED_TOKENS:
            raise DataError("vocabulary must start with the reserved tokens")
        self.itos: list[str] = list(tokens)
        self.stoi: dict[str, int] = {t: i for i, t in enumerate(self.itos)}
        if len(self.stoi) != len(self.itos):
            raise DataError("vocabulary contains duplicate tokens")

    def __len__(self) -> int:
        return len(self.itos)

    def __contains__(self, token: str) -> bool:
        return token in self.stoi

    def index(self, token: str) -> int:
        return self.stoi.get(token, UNK)

    def token(self, idx: int) -> str:
        return self.itos[idx]

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as f:
            f.write(f"# reserved: {' '.join(RESERVED_TOKENS)}\n")
            for tok in self.itos:
                f.write(tok + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "Vocabulary":
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        tokens = [ln for ln in lines if not ln.startswith("#")]
        return cls(tokens)


def build_vocab(token_lists: Iterable[Sequence[str]], max_size: int) -> Vocabulary:
    """Keep the most frequent tokens; ties broken by first occurrence."""
    if max_size <= len(RESERVED_TOKENS):
        raise DataError(f"max_size must exceed the {len(RESERVED_TOKENS)} reserved slots")
    counts: dict[str, int] = {}
    first_seen: dict[str, int] = {}
    pos = 0
    for tokens in token_lists:
        for tok in tokens:
            counts[tok] = counts.get(tok, 0) + 1
            if tok not in first_seen:
                first_seen[tok] = pos
            pos += 1
    if not counts:
        raise DataError("cannot build a vocabulary from an empty corpus")
    ordered = sorted(counts, key=lambda t: (-counts[t], first_seen[t]))
    budget = max_size - len(RESERVED_TOKENS)
    kept = [t for t in ordered if t not in RESERVED_TOKENS][:budget]
    return Vocabulary(list(RESERVED_TOKENS) + kept)


def split_present_absent(doc_tokens: Sequence[str],
                         keyphrases: Sequence[Sequence[str]]
                         ) -> tuple[list[list[str]], list[list[str]]]:
    """Partition phrases by stemmed contiguous occurrence in the document."""
    doc_stems = stem_tokens(doc_tokens)
    present: list[list[str]] = []
    absent: list[list[str]] = []
    for phrase in keyphrases:
        phrase = list(phrase)
        if _stemmed_match_pos(doc_stems, stem_tokens(phrase)) is not None:
            present.append(phrase)
        else:
            absent.append(phrase)
    return present, absent


def _stemmed_match_pos(doc_stems: Sequence[str], phrase_stems: Sequence[str]) -> int | None:
    n, k = len(doc_stems), len(phrase_stems)
    if k == 0 or k > n:
        return None
    for i in range(n - k + 1):
        if list(doc_stems[i:i + k]) == list(phrase_stems):
            return i
    return None


def order_by_first_occurrence(phrases: Sequence[Sequence[str]],
                              doc_tokens: Sequence[str]) -> list[list[str]]:
    """Sort present phrases by the position of their first stemmed match."""
    doc_stems = stem_tokens(doc_tokens)
    keyed = []
    for rank, phrase in enumerate(phrases):
        pos = _stemmed_match_pos(doc_stems, stem_tokens(phrase))
        keyed.append((pos if pos is not None else len(doc_stems) + rank, rank, list(phrase)))
    keyed.sort(key=lambda t: (t[0], t[1]))
    return [p for _, _, p in keyed]


@dataclass
class TargetSequence:
    """Concatenated keyphrase indices: p1 tokens, SEP, p2 tokens, ..., EOS."""

    indices: list[int]
    phrase_spans: list[tuple[int, int]] = field(default_factory=list)

    def validate(self) -> None:
        if not self.indices or self.indices[-1] != EOS:
            raise DataError("target sequence must end with EOS")
        sep_positions = [i for i, t in enumerate(self.indices) if t == SEP]
        expected = [end for _, end in self.phrase_spans[:-1]]
        if sep_positions != expected:
            raise DataError("phrase spans inconsistent with SEP positions")


def build_target(present_phrases: Sequence[Sequence[str]], dyn_vocab,
                 doc_tokens: Sequence[str]) -> TargetSequence:
    """Build the target index sequence over the document's dynamic vocabulary.

    Phrases are ordered by first occurrence in the document; each phrase is
    followed by one SEP, except the last which is followed by EOS.
    """
    if not present_phrases:
        raise DataError("cannot build a target from zero phrases")
    ordered = order_by_first_occurrence(present_phrases, doc_tokens)
    indices: list[int] = []
    spans: list[tuple[int, int]] = []
    for p, phrase in enumerate(ordered):
        if not phrase:
            raise DataError("phrase with zero tokens")
        start = len(indices)
        indices.extend(dyn_vocab.index(tok) for tok in phrase)
        spans.append((start, len(indices)))
        indices.append(SEP if p + 1 < len(ordered) else EOS)
    seq = TargetSequence(indices, spans)
    seq.validate()
    return seq


def corpus_stats(docs_present_counts: Sequence[int],
                 phrase_lengths: Sequence[int]) -> tuple[int, float, float]:
    """(samples, mean present count, mean phrase length) as reported per dataset."""
    n = len(docs_present_counts)
    avg_present = sum(docs_present_counts) / n if n else 0.0
    avg_len = sum(phrase_lengths) / len(phrase_lengths) if phrase_lengths else 0.0
    return n, avg_present, avg_len
