"""Tests for input assembly and the retrieval/external predictors."""

import json
import logging

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nextstmt.elements import CompletionTask, detect_tests, filter_corpus
from nextstmt.jclass import obj
from nextstmt.predictor import (
    PIECES,
    SEP,
    CandidateList,
    MalformedRecord,
    PredictorConfig,
    UnknownTaskId,
    assemble_input,
    build_retrieval_index,
    load_external_predictions,
    predict_retrieval,
    write_predictions,
)
from nextstmt.semantics import SemanticContext, build_statement_index, extract_semantics

from oracles import bm25


def make_task(statements, stmt_index, sign=("@", "Test", "void", "probe", "(", ")"),
              semantics=None, project="p", test_id="p/T.probe()V"):
    return CompletionTask(
        project=project, test_id=test_id, mut_id="p/C.m()V",
        sign=list(sign), statements=[list(s) for s in statements],
        stmt_index=stmt_index, semantics=semantics,
    )


@pytest.fixture(scope="module")
def gm_task(gm_store):
    tasks, _ = filter_corpus(detect_tests(gm_store), gm_store)
    task = [t for t in tasks if "NewFile" in t.test_id and t.stmt_index == 2][0]
    index = build_statement_index(gm_store)
    task.semantics = extract_semantics(task, gm_store, index)
    return task


class TestAssemble:
    def test_delimiters_and_default_order(self, gm_store, gm_task):
        seq = assemble_input(gm_task, store=gm_store)
        assert seq.subtokens.count(SEP) == 8
        chunks = _split(seq.subtokens)
        assert len(chunks) == 9
        # S3 = fields_notset: lastError rendered as owner.field subtokens
        assert chunks[0] == ["gm", "operation", ".", "last", "error"]
        # S5 = last called method: addImage source
        assert chunks[1][:4] == ["public", "void", "add", "image"]
        # S1 = types_local: f File
        assert chunks[2] == ["f", "java", ".", "io", ".", "file"]
        # S2 = types_absent: empty at this point
        assert chunks[3] == []
        # S4 = setup/teardown contains the setup body
        assert "setup" in chunks[5]
        # mut, sign, prior close the sequence
        assert "add" in chunks[6] and "image" in chunks[6]
        assert chunks[7][0] == "@" and "test" in chunks[7]
        assert chunks[8][-1] == ";"

    def test_empty_semantics_still_has_delimiters(self):
        task = make_task([["m", "(", ")", ";"]], 0)
        seq = assemble_input(task)
        assert seq.subtokens.count(SEP) == 8
        assert not seq.truncated
        chunks = _split(seq.subtokens)
        assert all(c == [] for c in chunks[:7])

    def test_truncation_keeps_suffix(self):
        prior = ["tok"] * 600
        task = make_task([prior, ["next", ";"]], 1, sign=["void", "probe"])
        seq = assemble_input(task, PredictorConfig(max_len=512))
        full = assemble_input(task, PredictorConfig(max_len=100000))
        assert seq.truncated and not full.truncated
        assert len(seq.subtokens) == 512
        assert seq.original_length == len(full.subtokens)
        assert seq.subtokens == full.subtokens[-512:]

    def test_short_input_untouched(self, gm_task, gm_store):
        seq = assemble_input(gm_task, store=gm_store)
        assert not seq.truncated
        assert seq.original_length == len(seq.subtokens)

    def test_bad_ordering_rejected(self):
        with pytest.raises(ValueError):
            PredictorConfig(ordering=("sign", "prior"))

    @settings(max_examples=30, deadline=None)
    @given(order=st.permutations(PIECES))
    def test_ordering_permutes_but_preserves_tokens(self, order):
        ctx = SemanticContext(
            types_local=[("va", obj("p/Alpha"))],
            types_absent=[obj("p/Beta")],
            fields_notset=["p/C.gamma"],
            setup_teardown=["delta", ";"],
            last_called_method=["epsilon", ";"],
            similar_stmt=["zeta", ";"],
        )
        task = make_task([["eta", ";"], ["theta", ";"]], 1, sign=["void", "probe"],
                         semantics=ctx)
        base = assemble_input(task)
        permuted = assemble_input(task, PredictorConfig(ordering=tuple(order)))
        assert sorted(base.subtokens) == sorted(permuted.subtokens)


def _split(subtokens):
    chunks = [[]]
    for t in subtokens:
        if t == SEP:
            chunks.append([])
        else:
            chunks[-1].append(t)
    return chunks


class TestRetrieval:
    def corpus(self):
        # one three-statement test plus fillers so query terms keep positive idf
        stmts = [["alpha", "beta", ";"], ["gamma", "(", ")", ";"],
                 ["delta", "(", ")", ";"]]
        tasks = [make_task(stmts, k, test_id="p/T.a()V") for k in range(3)]
        for i in range(5):
            tasks.append(make_task([[f"fill{i}", ";"], [f"pad{i}", ";"]], 1,
                                   test_id=f"p/T.f{i}()V"))
        return tasks

    def test_empty_index(self):
        index = build_retrieval_index([])
        task = make_task([["x", ";"]], 0)
        assert len(predict_retrieval(task, index)) == 0

    def test_exact_context_match_ranked_first(self):
        train = self.corpus()
        index = build_retrieval_index(train)
        probe = make_task([["alpha", "beta", ";"], ["?", ";"]], 1,
                          test_id="p/T.b()V")
        got = predict_retrieval(probe, index)
        assert got.candidates
        assert got.tokens(0) == ["gamma", "(", ")", ";"]

    def test_candidates_distinct_and_sorted(self):
        train = self.corpus() + self.corpus()  # duplicated docs
        index = build_retrieval_index(train)
        probe = make_task([["alpha", "beta", ";"], ["?", ";"]], 1,
                          test_id="p/T.c()V")
        got = predict_retrieval(probe, index)
        stmts = [tuple(t) for t, _s in got.candidates]
        assert len(stmts) == len(set(stmts))
        scores = [s for _t, s in got.candidates]
        assert scores == sorted(scores, reverse=True)

    def test_agrees_with_bruteforce_topk(self):
        import random

        rng = random.Random(3)
        vocab = ["ra", "rb", "rc", "rd", "re"]
        train = []
        for i in range(20):
            stmts = [[rng.choice(vocab) for _ in range(rng.randint(1, 4))] + [";"]
                     for _ in range(2)]
            train.append(make_task(stmts, 1, test_id=f"p/T.t{i}()V"))
        index = build_retrieval_index(train)
        raw = [[t for t, c in d.terms.items() for _ in range(c)] for d in index.docs]
        probe = make_task([["ra", "rb", ";"], ["?", ";"]], 1, test_id="p/T.q()V")
        got = predict_retrieval(probe, index, PredictorConfig(k=3))
        from nextstmt.semantics import context_of

        query = context_of(probe.statements, probe.stmt_index)
        scored = sorted(
            ((bm25(query, raw[d.doc_id], raw), d.doc_id) for d in index.docs),
            key=lambda p: (-p[0], p[1]),
        )
        want = []
        seen = set()
        for s, did in scored:
            if s <= 0:
                continue
            key = tuple(index.docs[did].statement)
            if key in seen:
                continue
            seen.add(key)
            want.append((list(key), s))
            if len(want) == 3:
                break
        assert [t for t, _ in got.candidates] == [t for t, _ in want]
        for (_, a), (_, b) in zip(got.candidates, want):
            assert a == pytest.approx(b, abs=1e-9)

    def test_training_index_never_leaks_eval_statements(self):
        train = [make_task([["ta", ";"], ["tb", "(", ")", ";"]], k,
                           project="ptrain", test_id=f"ptrain/T.x{k}()V")
                 for k in range(2)]
        evals = [make_task([["ea", ";"], ["eb", "(", ")", ";"]], k,
                           project="peval", test_id=f"peval/T.y{k}()V")
                 for k in range(2)]
        index = build_retrieval_index(train)
        train_stmts = {tuple(t.gold()) for t in train}
        for task in evals:
            got = predict_retrieval(task, index)
            for tokens, _score in got.candidates:
                assert tuple(tokens) in train_stmts


class TestExternal:
    def write(self, tmp_path, rows):
        path = tmp_path / "preds.jsonl"
        with open(path, "w") as fh:
            for r in rows:
                fh.write(json.dumps(r) + "\n")
        return str(path)

    def test_accepts_sorted(self, tmp_path):
        task = make_task([["x", ";"]], 0)
        path = self.write(tmp_path, [
            {"task_id": task.task_id,
             "candidates": [{"tokens": ["a", ";"], "score": 0.9},
                            {"tokens": ["b", ";"], "score": 0.5}]},
        ])
        got = load_external_predictions(path, [task])
        assert got[task.task_id].tokens(0) == ["a", ";"]

    def test_resorts_unsorted_with_warning(self, tmp_path, caplog):
        task = make_task([["x", ";"]], 0)
        path = self.write(tmp_path, [
            {"task_id": task.task_id,
             "candidates": [{"tokens": ["a", ";"], "score": 0.1},
                            {"tokens": ["b", ";"], "score": 0.7}]},
        ])
        with caplog.at_level(logging.WARNING, logger="nextstmt.predictor"):
            got = load_external_predictions(path, [task])
        assert got[task.task_id].tokens(0) == ["b", ";"]
        assert any("re-sorting" in r.message for r in caplog.records)

    def test_unknown_task_id(self, tmp_path):
        task = make_task([["x", ";"]], 0)
        path = self.write(tmp_path, [{"task_id": "nope#0", "candidates": []}])
        with pytest.raises(UnknownTaskId):
            load_external_predictions(path, [task])

    def test_malformed_record(self, tmp_path):
        task = make_task([["x", ";"]], 0)
        path = self.write(tmp_path, [{"task_id": task.task_id}])
        with pytest.raises(MalformedRecord):
            load_external_predictions(path, [task])

    def test_roundtrip_via_writer(self, tmp_path):
        task = make_task([["x", ";"]], 0)
        cl = CandidateList([(["a", ";"], 1.0)])
        path = tmp_path / "out.jsonl"
        write_predictions(str(path), [(task.task_id, cl)], meta={"stage": "predict"})
        got = load_external_predictions(str(path), [task])
        assert got[task.task_id].candidates == cl.candidates
