"""Tests for the six semantics extractors and the BM25 statement index."""

import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nextstmt.elements import collect_project, detect_tests, filter_corpus
from nextstmt.jclass import obj
from nextstmt.minijdk import compile_sources
from nextstmt.semantics import (
    StatementIndex,
    bm25_score,
    build_statement_index,
    context_of,
    extract_fields_notset,
    extract_last_called_method,
    extract_semantics,
    extract_setup_teardown,
    extract_similar_stmt,
    extract_types_absent,
    extract_types_local,
)

from oracles import bm25


@pytest.fixture(scope="module")
def gm_tasks(gm_store):
    tasks, _ = filter_corpus(detect_tests(gm_store), gm_store)
    return {(t.test_id.split(".")[1].split("(")[0], t.stmt_index): t for t in tasks}


def task_at(gm_tasks, name, k):
    return gm_tasks[(name, k)]


class TestTypesLocal:
    def test_stmt_zero_empty(self, gm_store, gm_tasks):
        t = task_at(gm_tasks, "addImage_NewFile_CountsIt", 0)
        assert extract_types_local(t, gm_store) == []

    def test_declared_local_visible(self, gm_store, gm_tasks):
        t = task_at(gm_tasks, "addImage_NewFile_CountsIt", 1)
        got = extract_types_local(t, gm_store)
        assert got == [("f", obj("java/io/File"))]

    def test_receiver_slot_excluded(self, gm_store, gm_tasks):
        t = task_at(gm_tasks, "reset_AfterAdd_Clears", 1)
        names = [n for n, _t in extract_types_local(t, gm_store)]
        assert "this" not in names and names == []


class TestTypesAbsent:
    def test_nothing_prepared(self, gm_store, gm_tasks):
        t = task_at(gm_tasks, "addImage_NewFile_CountsIt", 0)
        assert extract_types_absent(t, gm_store) == [obj("java/io/File")]

    def test_local_covers_parameter(self, gm_store, gm_tasks):
        t = task_at(gm_tasks, "addImage_NewFile_CountsIt", 1)
        assert extract_types_absent(t, gm_store) == []

    def test_receiver_covered_by_field(self, gm_store, gm_tasks):
        # sut is set in setup, so the receiver type is always prepared
        for k in range(3):
            t = task_at(gm_tasks, "addImage_NewFile_CountsIt", k)
            assert obj("gm/GMOperation") not in extract_types_absent(t, gm_store)

    def test_no_overlap_with_locals_or_fields(self, gm_store, gm_tasks):
        for t in gm_tasks.values():
            absent = set(extract_types_absent(t, gm_store))
            locals_ = {ty for _n, ty in extract_types_local(t, gm_store)}
            assert absent & locals_ == set()


class TestFieldsNotset:
    def test_setup_assignment_excluded(self, gm_store, gm_tasks):
        t = task_at(gm_tasks, "addImage_NewFile_CountsIt", 0)
        notset = extract_fields_notset(t, gm_store)
        assert "gm/GMOperationTest.sut" not in notset
        assert "gm/GMOperation.images" not in notset  # set in the constructor
        assert notset == ["gm/GMOperation.lastError"]

    def test_deeper_depth_never_adds(self, gm_store, gm_tasks):
        for t in gm_tasks.values():
            shallow = set(extract_fields_notset(t, gm_store, max_depth=1))
            deep = set(extract_fields_notset(t, gm_store, max_depth=6))
            assert deep <= shallow

    def test_depth_limit(self, tmp_path):
        chain = tmp_path / "src" / "Chain.java"
        chain.parent.mkdir()
        chain.write_text(
            "public class Chain {\n"
            "    public int shallow;\n"
            "    public int deep;\n"
            "    public void go() {\n        a();\n    }\n"
            "    public void a() {\n        b();\n    }\n"
            "    public void b() {\n        c();\n    }\n"
            "    public void c() {\n        shallow = 1;\n        d();\n    }\n"
            "    public void d() {\n        e();\n    }\n"
            "    public void e() {\n        deep = 1;\n    }\n"
            "}\n"
        )
        test = tmp_path / "src" / "ChainTest.java"
        test.write_text(
            "import org.junit.Test;\n"
            "import static org.junit.Assert.assertTrue;\n\n"
            "public class ChainTest {\n"
            "    @Test\n    public void run() {\n"
            "        Chain ch = new Chain();\n"
            "        ch.go();\n"
            "        assertTrue(true);\n    }\n}\n"
        )
        compile_sources([str(chain), str(test)], [], str(tmp_path / "classes"))
        store = collect_project(str(tmp_path))
        tasks, _ = filter_corpus(detect_tests(store), store)
        t = [x for x in tasks if x.stmt_index == 2][0]
        # go->a->b->c is 4 edges from the prior statements: shallow is set;
        # e is 6 edges away, so deep stays unset
        notset = extract_fields_notset(t, store, max_depth=4)
        assert "Chain.shallow" not in notset
        assert "Chain.deep" in notset
        assert "Chain.deep" not in extract_fields_notset(t, store, max_depth=6)


class TestSetupTeardown:
    def test_setup_tokens_present(self, gm_store, gm_tasks):
        t = task_at(gm_tasks, "addImage_NewFile_CountsIt", 0)
        toks = extract_setup_teardown(t, gm_store)
        assert "setup" in toks
        assert "GMOperation" in toks
        assert "@" in toks and "Before" in toks

    def test_before_then_after_in_declaration_order(self, tmp_path):
        src = tmp_path / "src" / "LifeTest.java"
        src.parent.mkdir()
        src.write_text(
            "import org.junit.After;\n"
            "import org.junit.Before;\n"
            "import org.junit.Test;\n\n"
            "public class LifeTest {\n"
            "    int x;\n"
            "    @After\n    public void down() {\n        x = 0;\n    }\n"
            "    @Before\n    public void up() {\n        x = up2();\n    }\n"
            "    @Before\n    public void upLater() {\n        x = 2;\n    }\n"
            "    public int up2() {\n        return 1;\n    }\n"
            "    @Test\n    public void probe() {\n        up2();\n    }\n}\n"
        )
        helper = tmp_path / "src" / "Life.java"
        helper.write_text("public class Life {\n    public int up2() {\n        return 9;\n    }\n}\n")
        compile_sources([str(src), str(helper)], [], str(tmp_path / "classes"))
        store = collect_project(str(tmp_path))
        tasks, _ = filter_corpus(detect_tests(store), store)
        toks = extract_setup_teardown(tasks[0], store)
        # declaration order within each group, @Before group first
        assert toks.index("up") < toks.index("upLater") < toks.index("down")

    def test_no_hooks_empty(self, tmp_path):
        src = tmp_path / "src" / "PlainTest.java"
        src.parent.mkdir()
        src.write_text(
            "import org.junit.Test;\n\npublic class PlainTest {\n"
            "    @Test\n    public void probe() {\n        helper();\n    }\n"
            "    public int helper() {\n        return 1;\n    }\n}\n"
        )
        helper = tmp_path / "src" / "Plain.java"
        helper.write_text("public class Plain {\n    public void helper() {\n    }\n}\n")
        compile_sources([str(src), str(helper)], [], str(tmp_path / "classes"))
        store = collect_project(str(tmp_path))
        tasks, _ = filter_corpus(detect_tests(store), store)
        assert extract_setup_teardown(tasks[0], store) == []


class TestLastCalled:
    def test_stmt_zero_empty(self, gm_store, gm_tasks):
        t = task_at(gm_tasks, "addImage_NewFile_CountsIt", 0)
        assert extract_last_called_method(t, gm_store) == []

    def test_dependency_callee_empty(self, gm_store, gm_tasks):
        # prior statement calls only new File(...), which has no source here
        t = task_at(gm_tasks, "addImage_NewFile_CountsIt", 1)
        assert extract_last_called_method(t, gm_store) == []

    def test_last_call_with_source(self, gm_store, gm_tasks):
        t = task_at(gm_tasks, "addImage_NewFile_CountsIt", 2)
        toks = extract_last_called_method(t, gm_store)
        assert toks[:4] == ["public", "void", "addImage", "("]
        assert "STR" in toks  # masked string literal from the throw message

    def test_selects_latest(self, gm_store, gm_tasks):
        t = task_at(gm_tasks, "reset_AfterAdd_Clears", 2)
        toks = extract_last_called_method(t, gm_store)
        assert "reset" in toks[:4]


class TestStatementIndex:
    def test_enumeration(self, tmp_path):
        src = tmp_path / "src" / "Seq.java"
        src.parent.mkdir()
        src.write_text(
            "public class Seq {\n"
            "    public int run(int x) {\n"
            "        int a = x;\n"
            "        int b = a + 1;\n"
            "        return a + b;\n"
            "    }\n"
            "}\n"
        )
        compile_sources([str(src)], [], str(tmp_path / "classes"))
        store = collect_project(str(tmp_path))
        index = build_statement_index(store)
        assert len(index) == 3
        docs = index.docs
        assert docs[0].length == 0  # first statement has an empty context
        assert list(docs[1].statement) == ["int", "b", "=", "a", "+", "1", ";"]

    def test_document_frequency(self):
        index = StatementIndex()
        index.add(["a", "b"], ["s1"])
        index.add(["b", "c"], ["s2"])
        index.add(["d"], ["s3"])
        index.finalize()
        assert index.df["b"] == 2 and index.df["a"] == 1
        assert index.avgdl == pytest.approx(5 / 3)

    def test_empty_store_empty_index(self, tmp_path):
        store = collect_project(str(tmp_path))
        assert len(build_statement_index(store)) == 0


class TestBm25:
    def hand_index(self):
        index = StatementIndex()
        index.add(["the", "cat", "sat"], ["s0"])
        index.add(["the", "dog", "ran", "far"], ["s1"])
        index.add(["cat", "cat", "dog"], ["s2"])
        return index.finalize()

    def test_hand_computed_values(self):
        index = self.hand_index()
        # doc 2, query [cat]: df=2, N=3 -> idf = ln(1.5/2.5) < 0 -> floored to 0
        assert index.score(["cat"], index.docs[2]) == 0.0
        # query [sat]: df=1 -> idf = ln(2.5/1.5); doc0 len 3, avgdl 10/3
        idf = math.log(2.5 / 1.5)
        tf_term = 1 * 2.2 / (1 + 1.2 * (1 - 0.75 + 0.75 * 3 / (10 / 3)))
        assert index.score(["sat"], index.docs[0]) == pytest.approx(idf * tf_term, abs=1e-9)
        assert index.score(["sat"], index.docs[1]) == 0.0

    def test_empty_query_zero(self):
        index = self.hand_index()
        assert all(index.score([], d) == 0.0 for d in index.docs)

    def test_matches_bruteforce_oracle(self):
        rng = random.Random(11)
        vocab = ["a", "b", "c", "d", "e", "f", "g"]
        index = StatementIndex()
        raw_docs = []
        for _ in range(12):
            doc = [rng.choice(vocab) for _ in range(rng.randint(0, 8))]
            raw_docs.append(doc)
            index.add(doc, ["stmt"])
        index.finalize()
        for _ in range(25):
            query = [rng.choice(vocab) for _ in range(rng.randint(1, 5))]
            for k, doc in enumerate(index.docs):
                want = bm25(query, raw_docs[k], raw_docs)
                assert index.score(query, doc) == pytest.approx(want, abs=1e-9)

    def test_adhoc_document_scoring(self):
        index = self.hand_index()
        got = bm25_score(["sat"], ["the", "cat", "sat"], index)
        assert got == pytest.approx(index.score(["sat"], index.docs[0]), abs=1e-9)

    def test_search_ranking_and_ties(self):
        index = StatementIndex()
        index.add(["x", "y"], ["first"])
        index.add(["x", "y"], ["second"])  # identical context: tie on score
        for i in range(3):
            index.add(["z", f"w{i}"], [f"filler{i}"])
        index.finalize()
        hits = index.search(["x"])
        assert [h[1].doc_id for h in hits] == [0, 1]
        assert hits[0][0] == pytest.approx(hits[1][0])

    def test_exhaustive_winner(self):
        rng = random.Random(5)
        vocab = ["p", "q", "r", "s"]
        index = StatementIndex()
        docs = []
        for i in range(10):
            doc = [rng.choice(vocab) for _ in range(rng.randint(1, 6))]
            docs.append(doc)
            index.add(doc, [f"s{i}"])
        index.finalize()
        query = ["p", "q"]
        hits = index.search(query)
        if hits:
            best = max(index.score(query, d) for d in index.docs)
            assert hits[0][0] == pytest.approx(best)


class TestSimilarStmt:
    def test_empty_index_empty(self, gm_tasks):
        t = task_at(gm_tasks, "addImage_NewFile_CountsIt", 1)
        assert extract_similar_stmt(t, StatementIndex().finalize()) == []

    def test_zero_score_empty(self, gm_store, gm_tasks):
        index = build_statement_index(gm_store)
        t = task_at(gm_tasks, "addImage_NewFile_CountsIt", 0)
        # no prior statements -> empty query -> no hit
        assert extract_similar_stmt(t, index) == []

    def test_self_match_dominates(self):
        index = StatementIndex()
        index.add(["alpha", "beta"], ["winner", ";"])
        index.add(["gamma"], ["loser", ";"])
        index.add(["delta"], ["other", ";"])
        index.finalize()

        class Fake:
            statements = [["alpha", "beta"], ["next"]]
            stmt_index = 1

        assert extract_similar_stmt(Fake(), index) == ["winner", ";"]

    def test_agrees_with_bruteforce(self, gm_store, gm_tasks):
        index = build_statement_index(gm_store)
        raw = [[t for t, c in doc.terms.items() for _ in range(c)] for doc in index.docs]
        for t in gm_tasks.values():
            query = context_of(t.statements, t.stmt_index)
            got = extract_similar_stmt(t, index)
            scores = [bm25(query, rd, raw) for rd in raw]
            best = max(scores) if scores else 0.0
            if best <= 0:
                assert got == []
            else:
                assert got == list(index.docs[scores.index(best)].statement)


class TestContext:
    def test_window_of_two(self):
        stmts = [["a", ";"], ["b", ";"], ["c", ";"], ["d", ";"]]
        assert context_of(stmts, 0) == []
        assert context_of(stmts, 1) == ["a", ";"]
        assert context_of(stmts, 3) == ["b", ";", "c", ";"]

    def test_subtokenized(self):
        stmts = [["fooBar", "(", ")", ";"]]
        assert context_of(stmts, 1) == ["foo", "bar", "(", ")", ";"]


class TestFullContext:
    def test_extract_semantics_deterministic(self, gm_store, gm_tasks):
        index = build_statement_index(gm_store)
        t = task_at(gm_tasks, "addImage_NewFile_CountsIt", 1)
        a = extract_semantics(t, gm_store, index)
        b = extract_semantics(t, gm_store, index)
        assert a == b

    def test_roundtrip_record(self, gm_store, gm_tasks):
        from nextstmt.semantics import SemanticContext

        index = build_statement_index(gm_store)
        t = task_at(gm_tasks, "addImage_NewFile_CountsIt", 2)
        ctx = extract_semantics(t, gm_store, index)
        back = SemanticContext.from_record(ctx.to_record())
        assert back == ctx


@settings(max_examples=60, deadline=None)
@given(
    docs=st.lists(
        st.lists(st.sampled_from("abcdef"), max_size=6), min_size=1, max_size=8
    ),
    query=st.lists(st.sampled_from("abcdef"), min_size=1, max_size=4),
)
def test_bm25_oracle_property(docs, query):
    index = StatementIndex()
    for d in docs:
        index.add(d, ["s"])
    index.finalize()
    for k, doc in enumerate(index.docs):
        assert index.score(query, doc) == pytest.approx(bm25(query, docs[k], docs), abs=1e-9)
