"""Pipeline command line: collect, extract, predict, rerank, eval.

Every stage reads and writes line-delimited record files whose first line
embeds the config hash and seed; wall-clock timestamps live in a sidecar
.meta.json so re-runs with identical inputs stay byte-identical.
"""

import argparse
import datetime
import glob
import hashlib
import json
import logging
import os
import sys
import time
from dataclasses import asdict, dataclass, field

from .elements import (
    CodeElementStore,
    FilterConfig,
    FilterReport,
    collect_project,
    detect_tests,
    filter_corpus,
    first_assertion_index,
    read_records,
    record_to_task,
    split_corpus,
    task_to_record,
    write_records,
)
from .execution import discover_toolchain, evaluate_task_candidates, rerank_order
from .jsource import subtokenize
from .metrics import RUNNABLE, SUBSETS, EvalRecord, evaluate
from .predictor import (
    CandidateList,
    PredictorConfig,
    UnknownTaskId,
    build_retrieval_index,
    load_external_predictions,
    predict_retrieval,
    write_predictions,
)
from .semantics import build_statement_index, extract_semantics

log = logging.getLogger(__name__)

PARTITIONS = ("train", "val", "eval")


@dataclass
class PipelineConfig:
    projects: list = field(default_factory=list)
    classpath: list = field(default_factory=list)
    filters: dict = field(default_factory=dict)
    split: dict = field(default_factory=dict)  # project -> train|val|eval
    predictor: str = "retrieval"
    external_predictions: str = None
    rerank: bool = True
    toolchain: str = None
    workers: int = 1
    seed: int = 0
    max_len: int = 512
    k: int = 10
    timeout: float = 30.0
    max_call_depth: int = 4
    subset: str = "all"

    def __post_init__(self):
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if self.subset not in SUBSETS:
            raise ValueError(f"unknown subset {self.subset!r}")
        if self.predictor not in ("retrieval", "external"):
            raise ValueError(f"unknown predictor {self.predictor!r}")

    @classmethod
    def load(cls, path=None, **overrides):
        data = {}
        if path:
            with open(path) as fh:
                data = json.load(fh)
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        data.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**data)

    def config_hash(self):
        blob = json.dumps(asdict(self), sort_keys=True).encode("utf-8")
        return hashlib.sha256(blob).hexdigest()[:16]

    def filter_config(self):
        return FilterConfig(**self.filters)

    def meta(self, stage):
        return {"stage": stage, "config_hash": self.config_hash(),
                "seed": self.seed}


def _write_sidecar(path, started, extra=None):
    doc = {
        "created": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "elapsed_s": round(time.monotonic() - started, 3),
    }
    if extra:
        doc.update(extra)
    with open(path + ".meta.json", "w") as fh:
        json.dump(doc, fh, sort_keys=True, indent=1)
        fh.write("\n")


def _load_stores(stores_dir):
    paths = sorted(glob.glob(os.path.join(stores_dir, "*.store.json")))
    stores = [CodeElementStore.load(p) for p in paths]
    return {s.project: s for s in stores}


def _read_tasks(corpus_dir, partition):
    path = os.path.join(corpus_dir, f"{partition}.jsonl")
    _meta, records = read_records(path)
    return [record_to_task(r) for r in records]


def cmd_collect(config, out_dir):
    started = time.monotonic()
    os.makedirs(out_dir, exist_ok=True)
    meta = config.meta("collect")
    names = []
    for root in config.projects:
        store = collect_project(root, config.classpath)
        store.save(os.path.join(out_dir, f"{store.project}.store.json"), meta=meta)
        names.append(store.project)
        log.info("collected %s: %d classes", store.project, len(store.classes))
    _write_sidecar(os.path.join(out_dir, "collect"), started,
                   {"projects": sorted(names)})
    return 0


def cmd_extract(config, stores_dir, out_dir):
    started = time.monotonic()
    os.makedirs(out_dir, exist_ok=True)
    stores = _load_stores(stores_dir)
    tasks, rows = [], []
    for project in sorted(stores):
        store = stores[project]
        found, report = filter_corpus(detect_tests(store), store,
                                      config.filter_config())
        index = build_statement_index(store)
        for task in found:
            task.semantics = extract_semantics(task, store, index,
                                               max_depth=config.max_call_depth)
        tasks.extend(found)
        rows.extend(report.rows)
        log.info("extracted %s: %d tasks", project, len(found))
    split_spec = config.split or {p: "eval" for p in stores}
    parts = dict(zip(PARTITIONS, split_corpus(tasks, split_spec)))
    meta = config.meta("extract")
    for name in PARTITIONS:
        write_records(os.path.join(out_dir, f"{name}.jsonl"),
                      [task_to_record(t) for t in parts[name]], meta=meta)
    FilterReport(rows=rows).write_tsv(os.path.join(out_dir, "filter_report.tsv"))
    _write_sidecar(os.path.join(out_dir, "extract"), started,
                   {"tasks": {k: len(v) for k, v in parts.items()}})
    return 0


def cmd_predict(config, corpus_dir, stores_dir, out, partition="eval"):
    started = time.monotonic()
    targets = _read_tasks(corpus_dir, partition)
    if config.predictor == "external":
        if not config.external_predictions:
            raise ValueError("predictor 'external' needs external_predictions")
        preds = load_external_predictions(config.external_predictions, targets,
                                          k=config.k)
        ordered = [(t.task_id, preds.get(t.task_id, CandidateList([])))
                   for t in targets]
    else:
        train_tasks = _read_tasks(corpus_dir, "train")
        stores = _load_stores(stores_dir)
        index = build_retrieval_index(train_tasks, stores=stores.values())
        pc = PredictorConfig(max_len=config.max_len, k=config.k)
        ordered = [(t.task_id, predict_retrieval(t, index, pc)) for t in targets]
    write_predictions(out, ordered, meta=config.meta("predict"))
    _write_sidecar(out, started)
    return 0


def cmd_rerank(config, predictions, corpus_dir, stores_dir, out,
               partition="eval"):
    started = time.monotonic()
    by_id = {t.task_id: t for t in _read_tasks(corpus_dir, partition)}
    _meta, pred_recs = read_records(predictions)
    meta = config.meta("rerank")
    if not config.rerank:
        write_records(out, pred_recs, meta=meta)
        _write_sidecar(out, started, {"reranked": False})
        return 0
    stores = _load_stores(stores_dir)
    toolchain = discover_toolchain(config.toolchain)
    log.info("toolchain: %s", toolchain.name)
    out_recs, details = [], {}
    for rec in pred_recs:
        tid = rec["task_id"]
        if tid not in by_id:
            raise UnknownTaskId(tid)
        task = by_id[tid]
        cl = CandidateList.from_record(rec)
        gold = task.gold()
        probes = CandidateList(cl.candidates + [(gold, 0.0)])
        outcomes = evaluate_task_candidates(
            task, probes, stores[task.project], toolchain=toolchain,
            timeout=config.timeout, workers=config.workers)
        cand_outs, gold_out = outcomes[:-1], outcomes[-1]
        order = rerank_order(cl, cand_outs)
        out_recs.append({
            "task_id": tid,
            "candidates": [
                {"tokens": cl.candidates[i][0], "score": cl.candidates[i][1]}
                for i in order],
            "statuses": [cand_outs[i].status for i in order],
            "runners": [cand_outs[i].runner for i in order],
            "gold_status": gold_out.status,
        })
        details[tid] = [
            {"duration": o.duration, "diagnostics": o.diagnostics}
            for o in outcomes]
        log.info("reranked %s: gold %s", tid, gold_out.status)
    write_records(out, out_recs, meta=meta)
    _write_sidecar(out, started, {"reranked": True, "details": details})
    return 0


def cmd_eval(config, predictions, corpus_dir, out, partition="eval"):
    started = time.monotonic()
    tasks = _read_tasks(corpus_dir, partition)
    by_id = {t.task_id: t for t in tasks}
    _meta, pred_recs = read_records(predictions)
    recs_by_id = {}
    for rec in pred_recs:
        if rec["task_id"] not in by_id:
            raise UnknownTaskId(rec["task_id"])
        recs_by_id[rec["task_id"]] = rec
    records = []
    for task in tasks:
        rec = recs_by_id.get(task.task_id, {"candidates": []})
        cands = rec["candidates"][:config.k]
        statuses = rec.get("statuses")
        records.append(EvalRecord(
            task_id=task.task_id,
            gold=subtokenize(task.gold(), markers=False),
            predictions=[subtokenize(c["tokens"], markers=False) for c in cands],
            statuses=statuses[:config.k] if statuses else None,
            runnable_gold=rec.get("gold_status") == RUNNABLE,
            first_assertion=first_assertion_index(task.statements) == task.stmt_index,
        ))
    report = evaluate(records, subset=config.subset, k=config.k)
    doc = report.to_record()
    doc["_meta"] = config.meta("eval")
    with open(out, "w") as fh:
        json.dump(doc, fh, sort_keys=True, indent=1)
        fh.write("\n")
    _write_sidecar(out, started)
    print(report.format_table())
    return 0


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="nextstmt",
        description="Semantics-aware next-statement completion pipeline.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="pipeline config JSON")
    common.add_argument("--workers", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--toolchain", help="JDK root with bin/javac and bin/java")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("collect", parents=[common],
                       help="parse projects into store archives")
    p.add_argument("--out", required=True)

    p = sub.add_parser("extract", parents=[common],
                       help="build the filtered, semantics-bearing corpus")
    p.add_argument("--stores", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("predict", parents=[common],
                       help="produce candidate statements per task")
    p.add_argument("--corpus", required=True)
    p.add_argument("--stores", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--partition", default="eval", choices=PARTITIONS)

    p = sub.add_parser("rerank", parents=[common],
                       help="execute candidates and rerank by outcome")
    p.add_argument("--predictions", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--stores", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--partition", default="eval", choices=PARTITIONS)
    p.add_argument("--no-rerank", action="store_true",
                   help="pass predictions through unchanged")

    p = sub.add_parser("eval", parents=[common],
                       help="score predictions against the corpus")
    p.add_argument("--predictions", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--partition", default="eval", choices=PARTITIONS)
    p.add_argument("--subset", choices=SUBSETS)
    return parser


def main(argv=None):
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    args = _build_parser().parse_args(argv)
    overrides = {
        "workers": args.workers,
        "seed": args.seed,
        "toolchain": args.toolchain,
    }
    if getattr(args, "no_rerank", False):
        overrides["rerank"] = False
    if getattr(args, "subset", None):
        overrides["subset"] = args.subset
    try:
        config = PipelineConfig.load(args.config, **overrides)
        if args.command == "collect":
            return cmd_collect(config, args.out)
        if args.command == "extract":
            return cmd_extract(config, args.stores, args.out)
        if args.command == "predict":
            return cmd_predict(config, args.corpus, args.stores, args.out,
                               partition=args.partition)
        if args.command == "rerank":
            return cmd_rerank(config, args.predictions, args.corpus, args.stores,
                              args.out, partition=args.partition)
        if args.command == "eval":
            return cmd_eval(config, args.predictions, args.corpus, args.out,
                            partition=args.partition)
        raise AssertionError(args.command)
    except Exception as exc:
        log.error("%s: %s", type(exc).__name__, exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
