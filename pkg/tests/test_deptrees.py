import json
from pathlib import Path

import pytest

from kpgen.deptrees import (AnnotatedDocument, DependencyTree, DepTypeInventory,
                            PosInventory, Token, edge_list, parse_annotated,
                            read_annotated)
from kpgen.errors import DataError

FIXTURES = Path(__file__).parent / "fixtures"


def make_doc(head_lists, deprel_lists, doc_id="t"):
    tokens, trees = [], []
    for s, (heads, rels) in enumerate(zip(head_lists, deprel_lists)):
        for w in range(len(heads)):
            tokens.append(Token(f"w{s}{w}", f"w{s}{w}", "NOUN", s, w))
        trees.append(DependencyTree(list(heads), list(rels)))
    doc = AnnotatedDocument(doc_id, tokens, trees)
    doc.validate()
    return doc


class TestTreeValidation:
    def test_two_token_valid_tree(self):
        make_doc([[0, 1]], [["root", "amod"]])

    def test_mutual_cycle_rejected(self):
        with pytest.raises(DataError) as e:
            make_doc([[2, 1, 0]], [["a", "b", "root"]])
        assert "cycle" in str(e.value)

    def test_multi_root_rejected(self):
        with pytest.raises(DataError) as e:
            make_doc([[0, 0]], [["root", "root"]])
        assert "root" in str(e.value)

    def test_no_root_rejected(self):
        with pytest.raises(DataError):
            make_doc([[2, 1]], [["a", "b"]])

    def test_out_of_range_head_rejected(self):
        with pytest.raises(DataError) as e:
            make_doc([[0, 7]], [["root", "x"]])
        assert "out of range" in str(e.value)

    def test_error_carries_doc_id(self):
        with pytest.raises(DataError) as e:
            make_doc([[0, 0]], [["root", "root"]], doc_id="broken-doc")
        assert e.value.doc_id == "broken-doc"


class TestReader:
    def test_fixture_file(self):
        docs = read_annotated(FIXTURES / "annotated_tiny.jsonl")
        assert len(docs) == 3
        # token counts equal what the fixture file actually carries
        raw = [json.loads(l) for l in
               (FIXTURES / "annotated_tiny.jsonl").read_text().splitlines()]
        for doc, obj in zip(docs, raw):
            expected = sum(len(s["tokens"]) for s in obj["sentences"])
            assert len(doc.tokens) == expected

    def test_documents_in_file_order(self):
        docs = read_annotated(FIXTURES / "annotated_tiny.jsonl")
        assert [d.id for d in docs] == ["abs1", "abs2", "abs3"]

    def test_malformed_json_reports_line(self, tmp_path):
        p = tmp_path / "bad.jsonl"
        p.write_text('{"id": "ok", "sentences": [], "keyphrases": []}\nnot json\n')
        with pytest.raises(DataError) as e:
            read_annotated(p)
        assert e.value.line == 2

    def test_missing_token_field(self):
        obj = {"id": "x", "sentences": [{"tokens": [{"form": "a", "stem": "a",
                                                     "upos": "N", "head": 0}]}],
               "keyphrases": []}
        with pytest.raises(DataError) as e:
            parse_annotated(obj)
        assert "deprel" in str(e.value)


class TestEdgeList:
    def test_tree_has_n_minus_1_edges(self):
        doc = make_doc([[0, 1, 2, 1]], [["root", "a", "b", "c"]])
        assert len(edge_list(doc)) == 3

    def test_root_never_a_dependent(self):
        doc = make_doc([[0, 1, 1]], [["root", "a", "b"]])
        dependents = [i for i, _, _ in edge_list(doc)]
        assert 0 not in dependents  # token 0 is root here

    def test_no_edge_crosses_sentences(self):
        doc = make_doc([[0, 1], [0, 1, 2]], [["root", "a"], ["root", "b", "c"]])
        for i, j, _ in edge_list(doc):
            assert doc.tokens[i].sent == doc.tokens[j].sent

    def test_indices_are_document_global(self):
        doc = make_doc([[0, 1], [0, 1]], [["root", "a"], ["root", "b"]])
        edges = edge_list(doc)
        assert (1, 0, "a") in edges
        assert (3, 2, "b") in edges

    def test_fixture_sparsity_below_5_percent(self):
        for doc in read_annotated(FIXTURES / "annotated_tiny.jsonl"):
            n = len(doc.tokens)
            density = len(edge_list(doc)) / (n * n)
            assert density < 0.05


class TestInventories:
    def test_unknown_deprel_maps_to_unk(self):
        inv = DepTypeInventory(["amod", "nsubj"])
        assert inv.index("amod") != 0
        assert inv.index("never-seen") == 0

    def test_bijective_over_known(self):
        inv = DepTypeInventory(["a", "b", "a"])
        assert len(inv.stoi) == len(inv.itos)

    def test_pos_inventory_roundtrip(self, tmp_path):
        docs = read_annotated(FIXTURES / "annotated_tiny.jsonl")
        inv = PosInventory.from_documents(docs)
        inv.save(tmp_path / "pos.txt")
        loaded = PosInventory.load(tmp_path / "pos.txt")
        assert loaded.itos == inv.itos

    def test_deptype_from_documents(self):
        docs = read_annotated(FIXTURES / "annotated_tiny.jsonl")
        inv = DepTypeInventory.from_documents(docs)
        assert len(inv) > 1
        assert inv.index("root") > 0
