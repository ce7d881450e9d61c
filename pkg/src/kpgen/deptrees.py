"""Dependency-annotated document ingestion and validation.

The annotated JSONL schema is the bit-exact contract with the preprocessor:
one object per document, ``{id, sentences: [{tokens: [{form, stem, upos,
head, deprel}]}], keyphrases: [string]}``; ``head`` is 1-based within the
sentence, 0 marks the root.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .errors import DataError

UNK_DEPREL = "<unk-dep>"
UNK_POS = "<unk-pos>"


@dataclass
class Token:
    form: str
    stem: str
    upos: str
    sent: int
    offset: int  # within-sentence position, 0-based


@dataclass
class DependencyTree:
    """Per-sentence head links; head[i] is 1-based, 0 means virtual root."""

    heads: list[int]
    deprels: list[str]

    def __len__(self) -> int:
        return len(self.heads)

    def validate(self, doc_id: str, sent: int) -> None:
        n = len(self.heads)
        if n == 0:
            raise DataError(f"sentence {sent} is empty", doc_id=doc_id)
        if len(self.deprels) != n:
            raise DataError(f"sentence {sent}: {n} heads but {len(self.deprels)} deprels",
                            doc_id=doc_id)
        roots = [i for i, h in enumerate(self.heads) if h == 0]
        if len(roots) != 1:
            raise DataError(f"sentence {sent}: expected exactly one root, found {len(roots)}",
                            doc_id=doc_id)
        for i, h in enumerate(self.heads):
            if not 0 <= h <= n:
                raise DataError(f"sentence {sent}: head {h} of token {i + 1} out of range 0..{n}",
                                doc_id=doc_id)
        # A single root plus everywhere-defined heads is acyclic iff every
        # token reaches the root without revisiting a node.
        for start in range(n):
            seen = set()
            node = start
            while self.heads[node] != 0:
                if node in seen:
                    raise DataError(f"sentence {sent}: head links form a cycle through "
                                    f"token {start + 1}", doc_id=doc_id)
                seen.add(node)
                node = self.heads[node] - 1


@dataclass
class AnnotatedDocument:
    id: str
    tokens: list[Token]
    sentences: list[DependencyTree]
    keyphrases: list[list[str]] = field(default_factory=list)

    @property
    def forms(self) -> list[str]:
        return [t.form for t in self.tokens]

    @property
    def stems(self) -> list[str]:
        return [t.stem for t in self.tokens]

    def sentence_start(self, sent: int) -> int:
        start = 0
        for s in range(sent):
            start += len(self.sentences[s])
        return start

    def validate(self) -> None:
        total = sum(len(s) for s in self.sentences)
        if total != len(self.tokens):
            raise DataError(f"token count {len(self.tokens)} != sum of sentence "
                            f"lengths {total}", doc_id=self.id)
        for s, tree in enumerate(self.sentences):
            tree.validate(self.id, s)


def read_annotated(path: str | Path) -> list[AnnotatedDocument]:
    """Load annotated JSONL; every tree invariant is checked before return."""
    docs: list[AnnotatedDocument] = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as e:
            raise DataError(f"malformed JSON: {e.msg}", line=lineno) from None
        docs.append(parse_annotated(obj, lineno))
    return docs


def parse_annotated(obj: dict, lineno: int | None = None) -> AnnotatedDocument:
    doc_id = obj.get("id")
    if not doc_id:
        raise DataError("document missing id", line=lineno)
    tokens: list[Token] = []
    trees: list[DependencyTree] = []
    for s, sent in enumerate(obj.get("sentences", [])):
        heads, deprels = [], []
        for w, tok in enumerate(sent.get("tokens", [])):
            for key in ("form", "stem", "upos", "head", "deprel"):
                if key not in tok:
                    raise DataError(f"sentence {s} token {w}: missing {key!r}",
                                    doc_id=doc_id, line=lineno)
            tokens.append(Token(tok["form"], tok["stem"], tok["upos"], s, w))
            heads.append(int(tok["head"]))
            deprels.append(tok["deprel"])
        trees.append(DependencyTree(heads, deprels))
    phrases = [p.split() if isinstance(p, str) else list(p)
               for p in obj.get("keyphrases", [])]
    doc = AnnotatedDocument(doc_id, tokens, trees, phrases)
    doc.validate()
    return doc


def edge_list(doc: AnnotatedDocument) -> list[tuple[int, int, str]]:
    """One (dependent, head, deprel) entry per non-root token, document-global indices."""
    edges: list[tuple[int, int, str]] = []
    start = 0
    for tree in doc.sentences:
        for i, h in enumerate(tree.heads):
            if h != 0:
                edges.append((start + i, start + h - 1, tree.deprels[i]))
        start += len(tree)
    return edges


class DepTypeInventory:
    """Dependency-relation label -> index map with an unknown-type slot."""

    def __init__(self, labels: Sequence[str]) -> None:
        uniq = dict.fromkeys(l for l in labels if l != UNK_DEPREL)
        self.itos = [UNK_DEPREL] + list(uniq)
        self.stoi = {l: i for i, l in enumerate(self.itos)}

    def __len__(self) -> int:
        return len(self.itos)

    def index(self, label: str) -> int:
        return self.stoi.get(label, 0)

    @classmethod
    def from_documents(cls, docs: Sequence[AnnotatedDocument]) -> "DepTypeInventory":
        seen: dict[str, None] = {}
        for doc in docs:
            for tree in doc.sentences:
                for rel in tree.deprels:
                    seen.setdefault(rel, None)
        return cls(list(seen))

    def save(self, path: str | Path) -> None:
        Path(path).write_text("\n".join(self.itos) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "DepTypeInventory":
        labels = Path(path).read_text(encoding="utf-8").splitlines()
        inv = cls.__new__(cls)
        inv.itos = labels
        inv.stoi = {l: i for i, l in enumerate(labels)}
        return inv


class PosInventory:
    """POS tag -> index map with an unknown-tag slot."""

    def __init__(self, labels: Sequence[str]) -> None:
        uniq = dict.fromkeys(l for l in labels if l != UNK_POS)
        self.itos = [UNK_POS] + list(uniq)
        self.stoi = {l: i for i, l in enumerate(self.itos)}

    def __len__(self) -> int:
        return len(self.itos)

    def index(self, label: str) -> int:
        return self.stoi.get(label, 0)

    @classmethod
    def from_documents(cls, docs: Sequence[AnnotatedDocument]) -> "PosInventory":
        seen: dict[str, None] = {}
        for doc in docs:
            for tok in doc.tokens:
                seen.setdefault(tok.upos, None)
        return cls(list(seen))

    def save(self, path: str | Path) -> None:
        Path(path).write_text("\n".join(self.itos) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "PosInventory":
        labels = Path(path).read_text(encoding="utf-8").splitlines()
        inv = cls.__new__(cls)
        inv.itos = labels
        inv.stoi = {l: i for i, l in enumerate(labels)}
        return inv
