"""End-to-end pipeline command tests on the GM fixture project."""

import json
import pathlib

import pytest

from nextstmt.cli import PipelineConfig, main
from nextstmt.elements import read_records


def run_pipeline(root, gm_root, config_extra=None, stages=("collect", "extract",
                                                           "predict", "rerank",
                                                           "eval")):
    """Drive the requested stages; returns a dict of output paths."""
    root.mkdir(parents=True, exist_ok=True)
    cfg = {"projects": [str(gm_root)], "split": {gm_root.name: "eval"}}
    cfg.update(config_extra or {})
    paths = {
        "config": root / "config.json",
        "stores": root / "stores",
        "corpus": root / "corpus",
        "predictions": root / "predictions.jsonl",
        "reranked": root / "reranked.jsonl",
        "report": root / "report.json",
    }
    paths["config"].write_text(json.dumps(cfg))
    argv = {
        "collect": ["collect", "--config", str(paths["config"]),
                    "--out", str(paths["stores"])],
        "extract": ["extract", "--config", str(paths["config"]),
                    "--stores", str(paths["stores"]), "--out", str(paths["corpus"])],
        "predict": ["predict", "--config", str(paths["config"]),
                    "--corpus", str(paths["corpus"]),
                    "--stores", str(paths["stores"]), "--out", str(paths["predictions"])],
        "rerank": ["rerank", "--config", str(paths["config"]),
                   "--predictions", str(paths["predictions"]),
                   "--corpus", str(paths["corpus"]),
                   "--stores", str(paths["stores"]), "--out", str(paths["reranked"])],
        "eval": ["eval", "--config", str(paths["config"]),
                 "--predictions", str(paths["reranked"]),
                 "--corpus", str(paths["corpus"]), "--out", str(paths["report"])],
    }
    for stage in stages:
        assert main(argv[stage]) == 0, stage
    return paths


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory, gm_root):
    root = tmp_path_factory.mktemp("pipeline")
    return run_pipeline(root, gm_root)


class TestConfig:
    def test_defaults_and_hash_stability(self):
        a, b = PipelineConfig(), PipelineConfig()
        assert a.workers == 1 and a.seed == 0 and a.rerank
        assert a.config_hash() == b.config_hash()
        assert a.config_hash() != PipelineConfig(seed=1).config_hash()

    def test_workers_must_be_positive(self):
        with pytest.raises(ValueError):
            PipelineConfig(workers=0)

    def test_unknown_subset_rejected(self):
        with pytest.raises(ValueError):
            PipelineConfig(subset="best")

    def test_load_rejects_unknown_keys(self, tmp_path):
        p = tmp_path / "c.json"
        p.write_text(json.dumps({"wrokers": 2}))
        with pytest.raises(ValueError, match="wrokers"):
            PipelineConfig.load(str(p))

    def test_overrides_beat_file_values(self, tmp_path):
        p = tmp_path / "c.json"
        p.write_text(json.dumps({"seed": 3, "workers": 2}))
        cfg = PipelineConfig.load(str(p), seed=9)
        assert cfg.seed == 9 and cfg.workers == 2


class TestStages:
    def test_full_pipeline_produces_report(self, pipeline):
        doc = json.loads(pipeline["report"].read_text())
        assert doc["subset"] == "all" and doc["count"] == 6
        assert set(doc["aggregates"]) >= {"XM", "BLEU", "EditSim", "ROUGE-L"}

    def test_meta_in_every_output(self, pipeline):
        cfg = PipelineConfig.load(str(pipeline["config"]))
        want = {"config_hash": cfg.config_hash(), "seed": 0}
        store_path = next(pipeline["stores"].glob("*.store.json"))
        store_doc = json.loads(store_path.read_text())
        metas = [store_doc["_meta"]]
        for name in ("train", "val", "eval"):
            meta, _ = read_records(str(pipeline["corpus"] / f"{name}.jsonl"))
            metas.append(meta)
        for path in (pipeline["predictions"], pipeline["reranked"]):
            meta, _ = read_records(str(path))
            metas.append(meta)
        metas.append(json.loads(pipeline["report"].read_text())["_meta"])
        for meta in metas:
            assert meta is not None
            assert {k: meta[k] for k in want} == want

    def test_sidecars_carry_timestamps(self, pipeline):
        side = json.loads(
            (pipeline["corpus"] / "extract.meta.json").read_text())
        assert "created" in side and side["elapsed_s"] >= 0

    def test_filter_report_written(self, pipeline):
        lines = (pipeline["corpus"] / "filter_report.tsv").read_text().splitlines()
        assert lines[0] == "test_id\tdisposition"
        assert any("\tkept" in line for line in lines[1:])

    def test_rerank_statuses_and_gold(self, pipeline):
        _, records = read_records(str(pipeline["reranked"]))
        assert len(records) == 6
        for rec in records:
            assert rec["gold_status"] == "Runnable"
            assert len(rec["statuses"]) == len(rec["candidates"])
            assert len(rec["runners"]) == len(rec["candidates"])
            assert "duration" not in json.dumps(rec)

    def test_rerank_sidecar_holds_durations(self, pipeline):
        side = json.loads(
            pathlib.Path(str(pipeline["reranked"]) + ".meta.json").read_text())
        assert side["reranked"] is True
        some = next(iter(side["details"].values()))
        assert all("duration" in entry for entry in some)


class TestDeterminism:
    def test_reruns_byte_identical(self, tmp_path, gm_root):
        a = run_pipeline(tmp_path / "a", gm_root)
        b = run_pipeline(tmp_path / "b", gm_root)
        store = next(a["stores"].glob("*.store.json")).name
        pairs = [
            (a["stores"] / store, b["stores"] / store),
            (a["corpus"] / "eval.jsonl", b["corpus"] / "eval.jsonl"),
            (a["corpus"] / "filter_report.tsv", b["corpus"] / "filter_report.tsv"),
            (a["predictions"], b["predictions"]),
            (a["reranked"], b["reranked"]),
            (a["report"], b["report"]),
        ]
        for fa, fb in pairs:
            assert fa.read_bytes() == fb.read_bytes(), fa.name

    def test_seed_changes_the_hash_not_the_corpus(self, tmp_path, gm_root):
        a = run_pipeline(tmp_path / "a", gm_root, stages=("collect", "extract"))
        b = run_pipeline(tmp_path / "b", gm_root, {"seed": 5},
                         stages=("collect", "extract"))
        meta_a, recs_a = read_records(str(a["corpus"] / "eval.jsonl"))
        meta_b, recs_b = read_records(str(b["corpus"] / "eval.jsonl"))
        assert meta_a["config_hash"] != meta_b["config_hash"]
        assert meta_b["seed"] == 5
        assert recs_a == recs_b


class TestRerankFlag:
    def test_no_rerank_preserves_ordering(self, pipeline, tmp_path):
        out = tmp_path / "passthrough.jsonl"
        rc = main(["rerank", "--config", str(pipeline["config"]),
                   "--predictions", str(pipeline["predictions"]),
                   "--corpus", str(pipeline["corpus"]),
                   "--stores", str(pipeline["stores"]),
                   "--out", str(out), "--no-rerank"])
        assert rc == 0
        _, before = read_records(str(pipeline["predictions"]))
        _, after = read_records(str(out))
        assert after == before


class TestEvalErrors:
    def test_unknown_task_id_fails(self, pipeline, tmp_path):
        bogus = tmp_path / "bogus.jsonl"
        bogus.write_text(json.dumps(
            {"task_id": "gm/Nope.test()V#0", "candidates": []}) + "\n")
        rc = main(["eval", "--config", str(pipeline["config"]),
                   "--predictions", str(bogus),
                   "--corpus", str(pipeline["corpus"]),
                   "--out", str(tmp_path / "report.json")])
        assert rc != 0

    def test_invalid_config_fails(self, pipeline, tmp_path):
        cfg = tmp_path / "bad.json"
        cfg.write_text(json.dumps({"workers": 0}))
        rc = main(["eval", "--config", str(cfg),
                   "--predictions", str(pipeline["reranked"]),
                   "--corpus", str(pipeline["corpus"]),
                   "--out", str(tmp_path / "report.json")])
        assert rc != 0

    def test_subset_flag_selects_first_assertions(self, pipeline, tmp_path):
        out = tmp_path / "oracle.json"
        rc = main(["eval", "--config", str(pipeline["config"]),
                   "--predictions", str(pipeline["reranked"]),
                   "--corpus", str(pipeline["corpus"]),
                   "--out", str(out), "--subset", "oracle"])
        assert rc == 0
        doc = json.loads(out.read_text())
        assert doc["subset"] == "oracle"
        assert 0 < doc["count"] < 6
        assert all(tid.endswith("#2") for tid in doc["task_ids"])


class TestExternalPredictor:
    def test_external_predictions_flow_through(self, pipeline, tmp_path):
        _meta, tasks = read_records(str(pipeline["corpus"] / "eval.jsonl"))
        ext = tmp_path / "external.jsonl"
        with open(ext, "w") as fh:
            for t in tasks:
                gold = t["statements"][t["stmt_index"]]
                tid = f"{t['test_id']}#{t['stmt_index']}"
                rec = {"task_id": tid,
                       "candidates": [{"tokens": gold, "score": 1.0}]}
                fh.write(json.dumps(rec) + "\n")
        cfg = tmp_path / "ext-config.json"
        base = json.loads(pipeline["config"].read_text())
        base.update({"predictor": "external", "external_predictions": str(ext)})
        cfg.write_text(json.dumps(base))
        preds = tmp_path / "preds.jsonl"
        rc = main(["predict", "--config", str(cfg),
                   "--corpus", str(pipeline["corpus"]),
                   "--stores", str(pipeline["stores"]), "--out", str(preds)])
        assert rc == 0
        report = tmp_path / "report.json"
        rc = main(["eval", "--config", str(cfg), "--predictions", str(preds),
                   "--corpus", str(pipeline["corpus"]), "--out", str(report)])
        assert rc == 0
        doc = json.loads(report.read_text())
        assert doc["aggregates"]["XM"] == 100.0
