"""Full model: parameter construction, checkpointing, config hashing."""

from __future__ import annotations

import dataclasses
import hashlib
import json
from pathlib import Path

import numpy as np

from . import autodiff as ad
from .config import ModelConfig
from .corpus import Vocabulary
from .deptrees import DepTypeInventory, PosInventory
from .errors import ConfigError, DataError
from .graph import EdgeScorer
from .nn import GRUCell, ParamStore

CHECKPOINT_MAGIC = "kpgen-checkpoint"
CHECKPOINT_VERSION = 1


class KeyphraseModel:
    """Syntactic-graph encoder plus copy decoder, all parameters named."""

    def __init__(self, cfg: ModelConfig, vocab: Vocabulary, pos_inv: PosInventory,
                 type_inv: DepTypeInventory, seed: int = 0) -> None:
        cfg.validate()
        self.cfg = cfg
        self.vocab = vocab
        self.pos_inv = pos_inv
        self.type_inv = type_inv
        store = ParamStore(np.random.default_rng(seed))
        self.store = store

        d = cfg
        self.emb_word = store.new("emb.word", (len(vocab), d.word_dim))
        self.emb_pos = store.new("emb.pos", (len(pos_inv), d.pos_dim))
        self.edge_type_emb = store.new("edge.type", (len(type_inv), d.edge_type_dim))
        edge_in = 2 * d.token_dim + d.edge_type_dim + d.word_dim
        self.edge_weight = store.new("edge.w", (edge_in, 1))
        self.scorer = EdgeScorer(self.edge_weight, self.edge_type_emb,
                                 d.token_dim, d.word_dim)

        self.gru_fwd = GRUCell(store, "enc.gru_f", d.token_dim, d.gru_hidden)
        self.gru_bwd = GRUCell(store, "enc.gru_b", d.token_dim, d.gru_hidden)
        self.proj_w = store.new("enc.proj.w", (2 * d.gru_hidden, d.hidden_dim))
        self.proj_b = store.new("enc.proj.b", (1, d.hidden_dim), zero=True)
        self.gcn_layers = [
            (store.new(f"enc.gcn{k}.w", (d.hidden_dim, d.hidden_dim)),
             store.new(f"enc.gcn{k}.b", (1, d.hidden_dim), zero=True))
            for k in range(d.gcn_layers)
        ]
        self.glu_wk = store.new("enc.glu.wk", (d.hidden_dim, d.hidden_dim))
        self.glu_wl = store.new("enc.glu.wl", (d.hidden_dim, d.hidden_dim))

        # decoder hidden size equals hidden_dim so s_0 = c needs no bridge
        self.dec_cells = [
            GRUCell(store, f"dec.gru{k}",
                    d.word_dim if k == 0 else d.hidden_dim, d.hidden_dim)
            for k in range(d.decoder_layers)
        ]
        self.attn_w = store.new("dec.attn.w", (d.hidden_dim, d.hidden_dim))
        self.gen_w = store.new("dec.gen.w", (2 * d.hidden_dim, len(vocab)))
        self.gen_b = store.new("dec.gen.b", (1, len(vocab)), zero=True)
        self.gate_w = store.new("dec.gate.w", (2 * d.hidden_dim + d.word_dim, 1))
        self.gate_b = store.new("dec.gate.b", (1, 1), zero=True)
        if cfg.copy_only:
            # attendable stand-ins so a pure-copy decoder can emit SEP / EOS
            self.sep_row = store.new("dec.sep_row", (1, d.hidden_dim))
            self.eos_row = store.new("dec.eos_row", (1, d.hidden_dim))

        if cfg.pretrained_embeddings:
            self.load_pretrained_embeddings(cfg.pretrained_embeddings)

    # ------------------------------------------------------------------
    def parameters(self) -> dict[str, ad.Tensor]:
        return dict(self.store.items())

    def zero_grads(self) -> None:
        self.store.zero_grads()

    def config_hash(self) -> str:
        payload = dataclasses.asdict(self.cfg)
        payload.update(vocab_len=len(self.vocab), pos_len=len(self.pos_inv),
                       type_len=len(self.type_inv))
        blob = json.dumps(payload, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def load_pretrained_embeddings(self, path: str | Path) -> int:
        """Overwrite word-embedding rows from a `word v1 .. vD` text file."""
        hits = 0
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            parts = line.rstrip().split(" ")
            if len(parts) != self.cfg.word_dim + 1:
                continue
            idx = self.vocab.stoi.get(parts[0])
            if idx is None:
                continue
            self.emb_word.data[idx] = np.array([float(v) for v in parts[1:]])
            hits += 1
        return hits

    # ------------------------------------------------------------------
    def save(self, out_dir: str | Path) -> None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        self.vocab.save(out / "vocab.txt")
        self.pos_inv.save(out / "pos.txt")
        self.type_inv.save(out / "deptypes.txt")
        (out / "model.json").write_text(
            json.dumps(dataclasses.asdict(self.cfg), indent=2, sort_keys=True))
        save_checkpoint(out / "params.bin", self.parameters(), self.config_hash())

    @classmethod
    def load(cls, in_dir: str | Path) -> "KeyphraseModel":
        src = Path(in_dir)
        cfg = ModelConfig(**json.loads((src / "model.json").read_text()))
        vocab = Vocabulary.load(src / "vocab.txt")
        pos_inv = PosInventory.load(src / "pos.txt")
        type_inv = DepTypeInventory.load(src / "deptypes.txt")
        model = cls(cfg, vocab, pos_inv, type_inv)
        arrays, meta = load_checkpoint(src / "params.bin")
        if meta["config_hash"] != model.config_hash():
            raise ConfigError(
                f"checkpoint hash {meta['config_hash']} does not match model "
                f"configuration hash {model.config_hash()}")
        for name, param in model.parameters().items():
            if name not in arrays:
                raise DataError(f"checkpoint missing parameter {name!r}")
            if arrays[name].shape != param.shape:
                raise DataError(f"checkpoint parameter {name!r} has shape "
                                f"{arrays[name].shape}, expected {param.shape}")
            param.data = arrays[name].astype(param.data.dtype)
        return model


def save_checkpoint(path: str | Path, params: dict[str, ad.Tensor],
                    config_hash: str) -> None:
    """Self-describing container: JSON header line + little-endian payload."""
    entries = []
    payload = bytearray()
    for name in sorted(params):
        arr = params[name].data
        raw = arr.astype("<f8" if arr.dtype == np.float64 else "<f4").tobytes()
        entries.append({
            "name": name,
            "shape": list(arr.shape),
            "dtype": "f8" if arr.dtype == np.float64 else "f4",
            "offset": len(payload),
            "nbytes": len(raw),
        })
        payload.extend(raw)
    header = {
        "format": CHECKPOINT_MAGIC,
        "version": CHECKPOINT_VERSION,
        "precision": "float64" if any(p.data.dtype == np.float64 for p in params.values())
        else "float32",
        "config_hash": config_hash,
        "params": entries,
    }
    with open(path, "wb") as f:
        f.write(json.dumps(header, sort_keys=True).encode("utf-8"))
        f.write(b"\n")
        f.write(bytes(payload))


def load_checkpoint(path: str | Path) -> tuple[dict[str, np.ndarray], dict]:
    blob = Path(path).read_bytes()
    nl = blob.index(b"\n")
    header = json.loads(blob[:nl].decode("utf-8"))
    if header.get("format") != CHECKPOINT_MAGIC:
        raise DataError(f"{path} is not a parameter checkpoint")
    payload = blob[nl + 1:]
    arrays: dict[str, np.ndarray] = {}
    for entry in header["params"]:
        start, n = entry["offset"], entry["nbytes"]
        arr = np.frombuffer(payload[start:start + n], dtype="<" + entry["dtype"])
        arrays[entry["name"]] = arr.reshape(entry["shape"]).copy()
    meta = {k: header[k] for k in ("version", "precision", "config_hash")}
    return arrays, meta
