"""Command-line interface: train, decode, eval, analyze, sweep.

Exit codes: 0 success, 1 usage/config error, 2 data error, 3 numeric
failure.  Set KPGEN_LOG=debug|info|warning to control verbosity.
"""

from __future__ import annotations

import argparse
import json
import logging
import multiprocessing
import os
import sys
from pathlib import Path

import numpy as np

from . import autodiff as ad
from .analysis import (SnapshotRecord, read_snapshots, trend_csv,
                       weight_trend_analysis, write_snapshots)
from .config import RunConfig, echo_config, load_config
from .corpus import build_vocab
from .deptrees import DepTypeInventory, PosInventory, read_annotated
from .errors import ConfigError, DataError
from .metrics import evaluate_files
from .model import KeyphraseModel
from .references import LAMBDA1_GRID, LAMBDA2_GRID
from .search import generate
from .training import train_model

log = logging.getLogger("kpgen")

_WORKER_STATE: dict = {}


def _setup_logging() -> None:
    level = os.environ.get("KPGEN_LOG", "warning").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def _require_file(path: str, what: str) -> Path:
    if not path:
        raise ConfigError(f"{what} is not set in the configuration")
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"{what} does not exist: {p}")
    return p


def _apply_precision(cfg: RunConfig) -> None:
    ad.set_default_dtype(np.float64 if cfg.precision == "float64" else np.float32)


def cmd_train(args) -> int:
    cfg = load_config(args.config, args.set)
    train_path = _require_file(cfg.train_file, "train_file")
    valid_path = _require_file(cfg.valid_file, "valid_file") if cfg.valid_file \
        else train_path
    _apply_precision(cfg)

    train_docs = read_annotated(train_path)
    valid_docs = read_annotated(valid_path)
    vocab = build_vocab([d.forms for d in train_docs], max_size=cfg.model.vocab_size)
    pos_inv = PosInventory.from_documents(train_docs)
    type_inv = DepTypeInventory.from_documents(train_docs)
    model = KeyphraseModel(cfg.model, vocab, pos_inv, type_inv, seed=cfg.seed)

    out = Path(cfg.output_dir)
    echo_config(cfg, out)
    log.info("training on %d documents (%d validation)", len(train_docs), len(valid_docs))
    result = train_model(model, train_docs, valid_docs, cfg, out_dir=out)
    print(f"trained {result.state.step} steps, best validation ppl "
          f"{result.state.best_ppl:.6g}, checkpoint at {result.best_checkpoint}")
    return 0


def _decode_one(doc_id: str):
    model = _WORKER_STATE["model"]
    doc = _WORKER_STATE["docs"][doc_id]
    cfg = _WORKER_STATE["cfg"]
    out = generate(model, doc, cfg.infer,
                   collect_snapshots=_WORKER_STATE["snapshots"])
    return doc_id, out


def cmd_decode(args) -> int:
    cfg = load_config(args.config, args.set)
    _apply_precision(cfg)
    in_path = _require_file(args.input or cfg.test_file, "decode input")
    ckpt = _require_file(args.checkpoint, "checkpoint directory")
    model = KeyphraseModel.load(ckpt)

    docs = read_annotated(in_path)
    out_dir = Path(args.output_dir or cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    echo_config(cfg, out_dir)

    _WORKER_STATE.update(model=model, docs={d.id: d for d in docs}, cfg=cfg,
                         snapshots=args.snapshots)
    workers = cfg.workers or os.cpu_count() or 1
    ids = [d.id for d in docs]
    if workers > 1 and len(docs) > 1:
        with multiprocessing.Pool(workers) as pool:
            results = pool.map(_decode_one, ids)
    else:
        results = [_decode_one(i) for i in ids]

    pred_path = out_dir / "predictions.jsonl"
    with open(pred_path, "w", encoding="utf-8") as f:
        for doc_id, res in results:
            f.write(json.dumps({"id": doc_id, "phrases": res.phrases,
                                "scores": res.scores}) + "\n")
    if args.snapshots:
        records = []
        for doc_id, res in results:
            doc = _WORKER_STATE["docs"][doc_id]
            from .graph import build_graph
            graph = build_graph(doc, model.type_inv)
            records.append(SnapshotRecord(doc_id=doc_id, n=graph.n,
                                          edges=graph.edges,
                                          weights_per_phrase=res.snapshots))
        write_snapshots(out_dir / "snapshots.jsonl", records)
    print(f"decoded {len(results)} documents -> {pred_path}")
    return 0


def cmd_eval(args) -> int:
    pred = _require_file(args.predictions, "predictions file")
    gold = _require_file(args.gold, "gold file")
    report = evaluate_files(pred, gold)
    out_dir = Path(args.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "report.json").write_text(report.to_json() + "\n")
    (out_dir / "per_document.csv").write_text(report.per_doc_csv())
    print(report.to_json())
    return 0


def cmd_analyze(args) -> int:
    snaps = read_snapshots(args.snapshots)
    gold = _require_file(args.gold, "gold file")
    rows = weight_trend_analysis(snaps, gold, max_phrases=args.max_phrases)
    csv = trend_csv(rows)
    Path(args.output).parent.mkdir(parents=True, exist_ok=True)
    Path(args.output).write_text(csv)
    print(csv, end="")
    return 0


def _parse_grid(text: str | None, default: list[float]) -> list[float]:
    if text is None:
        return default
    values = [float(v) for v in text.split(",") if v.strip()]
    if not values:
        raise ConfigError("empty lambda grid")
    return values


def cmd_sweep(args) -> int:
    cfg = load_config(args.config, args.set)
    _apply_precision(cfg)
    in_path = _require_file(args.input or cfg.test_file, "sweep input")
    ckpt = _require_file(args.checkpoint, "checkpoint directory")
    grid1 = _parse_grid(args.lambda1, LAMBDA1_GRID)
    grid2 = _parse_grid(args.lambda2, LAMBDA2_GRID)
    model = KeyphraseModel.load(ckpt)
    docs = read_annotated(in_path)

    out_dir = Path(args.output_dir or cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    echo_config(cfg, out_dir)
    rows = ["lambda1,lambda2,f1_m,f1_5_filled,f1_5_unfilled,f1_10_unfilled,"
            "ndcg_10,avg_num,corr_num"]
    from .metrics import evaluate, present_gold
    for l1 in grid1:
        for l2 in grid2:
            cfg.infer.lambda1 = l1
            cfg.infer.lambda2 = l2
            triples = []
            for doc in docs:
                res = generate(model, doc, cfg.infer)
                triples.append((doc.id, res.phrases, present_gold(doc)))
            rep = evaluate(triples)
            rows.append(f"{l1:g},{l2:g},{rep.f1_m:.10g},{rep.f1_5_filled:.10g},"
                        f"{rep.f1_5_unfilled:.10g},{rep.f1_10_unfilled:.10g},"
                        f"{rep.ndcg_10:.10g},{rep.avg_num:.10g},{rep.corr_num:.10g}")
            log.info("swept lambda1=%g lambda2=%g", l1, l2)
    grid_path = out_dir / "sweep.csv"
    grid_path.write_text("\n".join(rows) + "\n")
    print(f"swept {len(grid1)}x{len(grid2)} grid -> {grid_path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kpgen",
                                     description="Keyphrase generation pipeline")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a model from annotated JSONL")
    p.add_argument("--config", required=True)
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE")
    p.set_defaults(fn=cmd_train)

    p = sub.add_parser("decode", help="generate keyphrases with a checkpoint")
    p.add_argument("--config", required=True)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--input")
    p.add_argument("--output-dir")
    p.add_argument("--snapshots", action="store_true",
                   help="record per-phrase graph weights for analyze")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE")
    p.set_defaults(fn=cmd_decode)

    p = sub.add_parser("eval", help="score a prediction file against gold")
    p.add_argument("--predictions", required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--output-dir", required=True)
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("analyze", help="edge-weight trends from snapshots")
    p.add_argument("--snapshots", required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--max-phrases", type=int, default=7)
    p.set_defaults(fn=cmd_analyze)

    p = sub.add_parser("sweep", help="grid over the two inference factors")
    p.add_argument("--config", required=True)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--input")
    p.add_argument("--output-dir")
    p.add_argument("--lambda1", help="comma-separated values")
    p.add_argument("--lambda2", help="comma-separated values")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE")
    p.set_defaults(fn=cmd_sweep)
    return parser


def main(argv: list[str] | None = None) -> int:
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 1
    except DataError as e:
        print(f"data error: {e}", file=sys.stderr)
        return 2
    except ad.NumericError as e:
        print(f"numeric failure: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
