import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))  # gradcheck import for test modules

from kpgen import autodiff as ad
from kpgen.config import ModelConfig
from kpgen.corpus import build_vocab
from kpgen.deptrees import DepTypeInventory, PosInventory, read_annotated
from kpgen.model import KeyphraseModel

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def tiny_docs():
    return read_annotated(FIXTURES / "annotated_tiny.jsonl")


@pytest.fixture(scope="session")
def toy_docs():
    return read_annotated(FIXTURES / "toy_train.jsonl")


def make_model(docs, seed=0, vocab_size=200, **cfg_overrides):
    """Small-dimension model over the given documents' inventories."""
    defaults = dict(word_dim=6, pos_dim=3, position_dim=4, gru_hidden=5,
                    hidden_dim=7, gcn_layers=2, edge_type_dim=3,
                    decoder_layers=1, dropout=0.0, vocab_size=vocab_size)
    defaults.update(cfg_overrides)
    cfg = ModelConfig(**defaults)
    vocab = build_vocab([d.forms for d in docs], max_size=cfg.vocab_size)
    pos_inv = PosInventory.from_documents(docs)
    type_inv = DepTypeInventory.from_documents(docs)
    return KeyphraseModel(cfg, vocab, pos_inv, type_inv, seed=seed)


@pytest.fixture
def tiny_model(tiny_docs):
    ad.reset_tape()
    return make_model(tiny_docs)


@pytest.fixture(autouse=True)
def _fresh_tape():
    ad.reset_tape()
    yield
