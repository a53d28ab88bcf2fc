"""Tests for the code-element store, test detection, filtering, and splits."""

import json

import pytest

from nextstmt.elements import (
    CodeElementStore,
    CompletionTask,
    DuplicateClass,
    FilterConfig,
    UnknownProject,
    Unlocatable,
    collect_project,
    detect_tests,
    filter_corpus,
    first_assertion_index,
    is_assertion_statement,
    locate_mut,
    read_records,
    record_to_task,
    split_corpus,
    statement_calls,
    task_to_record,
    write_records,
)
from nextstmt.jsource import parse_source
from nextstmt.minijdk import compile_sources


class TestCollect:
    def test_store_contents(self, gm_store):
        assert set(gm_store.classes) == {"gm/GMOperation", "gm/GMOperationTest"}
        assert gm_store.classes["gm/GMOperation"].kind == "non-test"
        assert gm_store.classes["gm/GMOperationTest"].kind == "test"
        names = {m.name for m in gm_store.methods_of("gm/GMOperation")}
        assert {"addImage", "imageCount", "reset", "<init>"} <= names
        setup = [m for m in gm_store.methods_of("gm/GMOperationTest") if m.name == "setup"]
        assert setup and setup[0].info is not None and setup[0].model is not None

    def test_source_and_bytecode_linked(self, gm_store):
        e = gm_store.classes["gm/GMOperation"]
        assert e.source is not None and e.classfile is not None
        assert not e.missing_bytecode
        add = [m for m in gm_store.methods_of("gm/GMOperation") if m.name == "addImage"][0]
        assert add.descriptor == "(Ljava/io/File;)V"
        assert add.model.raw_text.startswith("public void addImage")

    def test_fields_registered(self, gm_store):
        ids = {f.id for f in gm_store.fields_of("gm/GMOperation")}
        assert ids == {"gm/GMOperation.images", "gm/GMOperation.lastError"}
        sut = gm_store.fields.get("gm/GMOperationTest.sut")
        assert sut is not None and sut.descriptor == "Lgm/GMOperation;"

    def test_empty_directory(self, tmp_path):
        store = collect_project(str(tmp_path))
        assert not store.classes and not store.methods

    def test_missing_bytecode_tagged(self, tmp_path):
        src = tmp_path / "src" / "A.java"
        src.parent.mkdir()
        src.write_text("public class A { public void f() { } }\n")
        store = collect_project(str(tmp_path))
        assert store.classes["A"].missing_bytecode

    def test_duplicate_class_rejected(self, tmp_path):
        (tmp_path / "one").mkdir()
        (tmp_path / "two").mkdir()
        (tmp_path / "one" / "A.java").write_text("public class A { }\n")
        (tmp_path / "two" / "A.java").write_text("public class A { }\n")
        with pytest.raises(DuplicateClass):
            collect_project(str(tmp_path))

    def test_dependency_classes_metadata_only(self, tmp_path):
        dep_src = tmp_path / "dep" / "util" / "Helper.java"
        dep_src.parent.mkdir(parents=True)
        dep_src.write_text(
            "package util;\n\npublic class Helper {\n"
            "    public int twice(int x) {\n        return x * 2;\n    }\n}\n"
        )
        dep_out = tmp_path / "dep-classes"
        compile_sources([str(dep_src)], [], str(dep_out))
        proj = tmp_path / "proj"
        (proj / "src").mkdir(parents=True)
        (proj / "src" / "A.java").write_text("public class A { }\n")
        store = collect_project(str(proj), [str(dep_out)])
        entry = store.classes["util/Helper"]
        assert entry.kind == "dependency"
        assert entry.source is None
        assert all(m.code is None for m in entry.classfile.methods)
        twice = [m for m in store.methods_of("util/Helper") if m.name == "twice"]
        assert twice and twice[0].descriptor == "(I)I"

    def test_store_roundtrip(self, gm_store, tmp_path):
        path = tmp_path / "store.json"
        gm_store.save(str(path))
        loaded = CodeElementStore.load(str(path))
        assert set(loaded.classes) == set(gm_store.classes)
        assert set(loaded.methods) == set(gm_store.methods)
        assert loaded.classes["gm/GMOperationTest"].kind == "test"
        add = loaded.methods["gm/GMOperation.addImage(Ljava/io/File;)V"]
        assert add.info is not None and add.model is not None


class TestDetect:
    def test_detected_set(self, gm_store):
        tests = detect_tests(gm_store)
        names = [gm_store.method(t).name for t in tests]
        assert names == [
            "addImage_NewFile_CountsIt",
            "reset_AfterAdd_Clears",
            "test0",
            "addImage_Null_Throws",
            "badReturn",
        ]

    def test_ignored_excluded(self, gm_store):
        names = {gm_store.method(t).name for t in detect_tests(gm_store)}
        assert "skipped" not in names
        assert "png" not in names  # helper without annotation


class TestAssertions:
    def test_statement_calls_and_assertions(self, gm_store):
        test = [m for m in gm_store.methods_of("gm/GMOperationTest")
                if m.name == "addImage_NewFile_CountsIt"][0]
        body = test.model.body
        assert statement_calls(body[0]) == []  # new File(...) is a constructor
        assert statement_calls(body[1]) == ["addImage"]
        assert statement_calls(body[2]) == ["assertEquals", "imageCount"]
        assert not is_assertion_statement(body[1])
        assert is_assertion_statement(body[2])
        assert first_assertion_index(body) == 2


class TestLocate:
    def locate(self, store, test_name):
        tid = [t for t in detect_tests(store)
               if store.method(t).name == test_name][0]
        return locate_mut(tid, store)

    def test_cut_call_before_assertion(self, gm_store):
        mid = self.locate(gm_store, "addImage_NewFile_CountsIt")
        assert mid == "gm/GMOperation.addImage(Ljava/io/File;)V"

    def test_last_cut_call_selected(self, gm_store):
        mid = self.locate(gm_store, "reset_AfterAdd_Clears")
        assert mid == "gm/GMOperation.reset()V"

    def test_zero_calls_unlocatable(self, tmp_path):
        src = tmp_path / "src" / "NoCallsTest.java"
        src.parent.mkdir()
        src.write_text(
            "import org.junit.Test;\n\npublic class NoCallsTest {\n"
            "    @Test\n    public void noCalls() {\n        int x = 1;\n    }\n}\n"
        )
        compile_sources([str(src)], [], str(tmp_path / "classes"))
        store = collect_project(str(tmp_path))
        with pytest.raises(Unlocatable):
            locate_mut(detect_tests(store)[0], store)

    def test_four_step_order(self, tmp_path):
        # FooTest calls Foo.a(), Foo.b(), then asserts: step 2b picks b
        foo = tmp_path / "src" / "Foo.java"
        foo.parent.mkdir()
        foo.write_text(
            "public class Foo {\n"
            "    public int a() {\n        return 1;\n    }\n"
            "    public int b() {\n        return 2;\n    }\n}\n"
        )
        test = tmp_path / "src" / "FooTest.java"
        test.write_text(
            "import org.junit.Test;\n"
            "import static org.junit.Assert.assertEquals;\n\n"
            "public class FooTest {\n"
            "    @Test\n    public void both() {\n"
            "        Foo f = new Foo();\n"
            "        f.a();\n"
            "        f.b();\n"
            "        assertEquals(3L, f.a() + f.b());\n    }\n}\n"
        )
        compile_sources([str(foo), str(test)], [], str(tmp_path / "classes"))
        store = collect_project(str(tmp_path))
        assert locate_mut(detect_tests(store)[0], store) == "Foo.b()I"


class TestFilter:
    def test_dispositions(self, gm_store):
        tests = detect_tests(gm_store)
        tasks, report = filter_corpus(tests, gm_store)
        reasons = {gm_store.method(tid).name: reason for tid, reason in report.rows}
        assert reasons["addImage_NewFile_CountsIt"] == "kept"
        assert reasons["reset_AfterAdd_Clears"] == "kept"
        assert reasons["test0"] == "badly-named"
        assert reasons["addImage_Null_Throws"] == "control-flow"
        assert reasons["badReturn"] == "irregular-signature"

    def test_report_partitions_detected_set(self, gm_store):
        tests = detect_tests(gm_store)
        _tasks, report = filter_corpus(tests, gm_store)
        assert [tid for tid, _r in report.rows] == tests
        assert sum(report.counts().values()) == len(tests)

    def test_one_task_per_statement(self, gm_store):
        tasks, _report = filter_corpus(detect_tests(gm_store), gm_store)
        kept = {}
        for t in tasks:
            kept.setdefault(t.test_id, []).append(t.stmt_index)
        for tid, indices in kept.items():
            n = len(gm_store.method(tid).model.body)
            assert indices == list(range(n))

    def test_masking_applied(self, gm_store):
        tasks, _ = filter_corpus(detect_tests(gm_store), gm_store)
        for t in tasks:
            for stmt in t.statements:
                assert not any(tok.startswith('"') for tok in stmt)
        one = [t for t in tasks if "NewFile" in t.test_id][0]
        assert one.statements[0] == ["File", "f", "=", "new", "File", "(", "STR", ")", ";"]

    def test_sign_tokens(self, gm_store):
        tasks, _ = filter_corpus(detect_tests(gm_store), gm_store)
        one = [t for t in tasks if "NewFile" in t.test_id][0]
        assert one.sign[:2] == ["@", "Test"]
        assert "addImage_NewFile_CountsIt" in one.sign
        assert "{" not in one.sign

    def test_size_thresholds(self, gm_store):
        tight = FilterConfig(max_stmts=2)
        _tasks, report = filter_corpus(detect_tests(gm_store), gm_store, tight)
        reasons = {gm_store.method(tid).name: r for tid, r in report.rows}
        assert reasons["addImage_NewFile_CountsIt"] == "too-many-stmts"
        tiny = FilterConfig(max_stmt_tokens=5)
        _tasks, report = filter_corpus(detect_tests(gm_store), gm_store, tiny)
        reasons = {gm_store.method(tid).name: r for tid, r in report.rows}
        assert reasons["addImage_NewFile_CountsIt"] == "stmt-too-long"


class TestSplit:
    def make(self, project, n):
        return [CompletionTask(project, f"{project}/T.t{i}()V#x", "m", [], [["a"]], 0)
                for i in range(n)]

    def test_partition(self):
        tasks = self.make("p1", 3) + self.make("p2", 2) + self.make("p3", 1)
        spec = {"p1": "train", "p2": "val", "p3": "eval"}
        train, val, ev = split_corpus(tasks, spec)
        assert len(train) == 3 and len(val) == 2 and len(ev) == 1
        projects = [{t.project for t in part} for part in (train, val, ev)]
        assert projects[0] & projects[1] == set()
        assert projects[0] & projects[2] == set()

    def test_unknown_project(self):
        with pytest.raises(UnknownProject):
            split_corpus(self.make("p9", 1), {"p1": "train"})

    def test_deterministic(self):
        tasks = self.make("p1", 4) + self.make("p2", 4)
        spec = {"p1": "train", "p2": "eval"}
        a = split_corpus(tasks, spec)
        b = split_corpus(tasks, spec)
        assert [[t.task_id for t in part] for part in a] == \
               [[t.task_id for t in part] for part in b]


class TestSerialization:
    def test_task_roundtrip(self, gm_store, tmp_path):
        tasks, _ = filter_corpus(detect_tests(gm_store), gm_store)
        path = tmp_path / "corpus.jsonl"
        write_records(str(path), [task_to_record(t) for t in tasks],
                      meta={"stage": "corpus", "seed": 7})
        meta, records = read_records(str(path))
        assert meta == {"stage": "corpus", "seed": 7}
        back = [record_to_task(r) for r in records]
        assert [t.task_id for t in back] == [t.task_id for t in tasks]
        assert back[0].statements == tasks[0].statements

    def test_records_are_plain_json_lines(self, gm_store, tmp_path):
        tasks, _ = filter_corpus(detect_tests(gm_store), gm_store)
        path = tmp_path / "corpus.jsonl"
        write_records(str(path), [task_to_record(t) for t in tasks])
        lines = path.read_text().strip().split("\n")
        assert len(lines) == len(tasks)
        assert all(isinstance(json.loads(line), dict) for line in lines)
