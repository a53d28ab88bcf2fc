"""Integration coverage for the fixture projects under fixtures/.

Every expectation in every fixture manifest is asserted here: the collector
below walks each manifest at import time and rejects keys it does not
recognize, so a manifest entry cannot land without a matching check.  The
checked-in classes are used as-is; building the fixtures is never required.
"""

import json
import pathlib

import pytest

from nextstmt.elements import collect_project, detect_tests, filter_corpus
from nextstmt.execution import NOT_COMPILABLE, evaluate_task_candidates
from nextstmt.jclass import field_type
from nextstmt.predictor import CandidateList
from nextstmt.semantics import (
    extract_fields_notset,
    extract_last_called_method,
    extract_setup_teardown,
    extract_types_absent,
    extract_types_local,
)

PROJECTS = pathlib.Path(__file__).resolve().parent.parent / "fixtures" / "projects"

EXPECT_KEYS = {"store", "tests", "dispositions", "tasks", "exec"}
TASK_KEYS = {
    "types_local",
    "types_absent",
    "fields_notset",
    "fields_notset_excludes",
    "fields_notset_at_depth",
    "setup_teardown_contains",
    "setup_teardown_excludes",
    "setup_teardown_empty",
    "last_called_contains",
    "last_called_empty",
    "mut",
}


def _load_manifests():
    out = {}
    for path in sorted(PROJECTS.glob("*/manifest.json")):
        m = json.loads(path.read_text())
        unknown = set(m["expect"]) - EXPECT_KEYS
        if unknown:
            raise ValueError(f"{m['name']}: unknown expect keys {sorted(unknown)}")
        for tid, spec in m["expect"]["tasks"].items():
            bad = set(spec) - TASK_KEYS
            if bad:
                raise ValueError(f"{m['name']}: {tid}: unknown keys {sorted(bad)}")
        out[m["name"]] = m
    return out


MANIFESTS = _load_manifests()


def _short(tid):
    method, index = tid.rsplit("#", 1)
    return f"{method.split('.')[-1].split('(')[0]}#{index}"


TASK_PARAMS = [
    pytest.param(name, tid, key, id=f"{name}-{_short(tid)}-{key}")
    for name, m in sorted(MANIFESTS.items())
    for tid, spec in m["expect"]["tasks"].items()
    for key in sorted(spec)
]
EXEC_PARAMS = [
    pytest.param(name, entry, id=f"{name}-{_short(entry['task'])}")
    for name, m in sorted(MANIFESTS.items())
    for entry in m["expect"]["exec"]
]


@pytest.fixture(scope="module")
def loaded():
    cache = {}

    def load(name):
        if name not in cache:
            store = collect_project(str(PROJECTS / name))
            tasks, report = filter_corpus(detect_tests(store), store)
            by_id = {f"{t.test_id}#{t.stmt_index}": t for t in tasks}
            cache[name] = (store, by_id, report)
        return cache[name]

    return load


class TestStoreExpectations:
    @pytest.mark.parametrize("name", sorted(MANIFESTS))
    def test_class_kinds(self, loaded, name):
        store, _, _ = loaded(name)
        got = {cls: entry.kind for cls, entry in store.classes.items()}
        assert got == MANIFESTS[name]["expect"]["store"]

    @pytest.mark.parametrize("name", sorted(MANIFESTS))
    def test_detected_tests(self, loaded, name):
        store, _, _ = loaded(name)
        assert detect_tests(store) == MANIFESTS[name]["expect"]["tests"]

    @pytest.mark.parametrize(
        "name",
        [n for n in sorted(MANIFESTS) if "dispositions" in MANIFESTS[n]["expect"]])
    def test_filter_dispositions(self, loaded, name):
        _, _, report = loaded(name)
        assert dict(report.rows) == MANIFESTS[name]["expect"]["dispositions"]


def _check_types_local(task, store, want):
    assert extract_types_local(task, store) == [
        (n, field_type(d)) for n, d in want]


def _check_types_absent(task, store, want):
    assert extract_types_absent(task, store) == [field_type(d) for d in want]


def _check_fields_notset(task, store, want):
    assert extract_fields_notset(task, store) == want


def _check_fields_notset_excludes(task, store, want):
    got = extract_fields_notset(task, store)
    for fragment in want:
        assert not any(fragment in field for field in got), got


def _check_fields_notset_at_depth(task, store, want):
    for depth, fields in want.items():
        assert extract_fields_notset(task, store, max_depth=int(depth)) == fields


def _check_setup_teardown_contains(task, store, want):
    got = extract_setup_teardown(task, store)
    for token in want:
        assert token in got, token


def _check_setup_teardown_excludes(task, store, want):
    got = extract_setup_teardown(task, store)
    for token in want:
        assert token not in got, token


def _check_setup_teardown_empty(task, store, want):
    assert (extract_setup_teardown(task, store) == []) is want


def _check_last_called_contains(task, store, want):
    got = extract_last_called_method(task, store)
    for token in want:
        assert token in got, token


def _check_last_called_empty(task, store, want):
    assert (extract_last_called_method(task, store) == []) is want


def _check_mut(task, store, want):
    assert task.mut_id == want


CHECKS = {
    "types_local": _check_types_local,
    "types_absent": _check_types_absent,
    "fields_notset": _check_fields_notset,
    "fields_notset_excludes": _check_fields_notset_excludes,
    "fields_notset_at_depth": _check_fields_notset_at_depth,
    "setup_teardown_contains": _check_setup_teardown_contains,
    "setup_teardown_excludes": _check_setup_teardown_excludes,
    "setup_teardown_empty": _check_setup_teardown_empty,
    "last_called_contains": _check_last_called_contains,
    "last_called_empty": _check_last_called_empty,
    "mut": _check_mut,
}
assert set(CHECKS) == TASK_KEYS


class TestTaskExpectations:
    @pytest.mark.parametrize("name,tid,key", TASK_PARAMS)
    def test_expectation(self, loaded, name, tid, key):
        store, tasks, _ = loaded(name)
        assert tid in tasks, f"{name} produced no task {tid}"
        want = MANIFESTS[name]["expect"]["tasks"][tid][key]
        CHECKS[key](tasks[tid], store, want)


class TestExecExpectations:
    @pytest.mark.parametrize("name,entry", EXEC_PARAMS)
    def test_candidate_outcomes(self, loaded, name, entry):
        store, tasks, _ = loaded(name)
        task = tasks[entry["task"]]
        candidates = CandidateList([
            (task.gold() if c == "__gold__" else c, 0.9 - 0.1 * i)
            for i, c in enumerate(entry["candidates"])])
        outcomes = evaluate_task_candidates(task, candidates, store,
                                            workers=len(candidates))
        assert [o.status for o in outcomes] == entry["statuses"]
        for outcome in outcomes:
            if outcome.status != NOT_COMPILABLE:
                assert outcome.runner == entry["runner"]
