"""Code-element store and corpus construction.

Collection phase: scan a project tree for Java sources and compiled classes,
link them into one immutable store, detect test methods, locate the method
under test, filter the tests into per-statement completion tasks, and split
the resulting corpus by project.
"""

from __future__ import annotations

import base64
import json
import os
import re
import zipfile
from dataclasses import dataclass, field

from .jclass import (
    AmbiguousLineMapping,
    MalformedBytecode,
    map_statements_to_instructions,
    parse_classfile,
    parse_method_descriptor,
)
from .jsource import KEYWORDS, lex, mask_strings, parse_source

TEST_ANNOTATIONS = frozenset({"org.junit.Test", "org.junit.jupiter.api.Test"})
IGNORE_ANNOTATIONS = frozenset({"org.junit.Ignore", "org.junit.jupiter.api.Disabled"})
SETUP_ANNOTATIONS = (
    "org.junit.Before",
    "org.junit.jupiter.api.BeforeEach",
    "org.junit.BeforeClass",
    "org.junit.jupiter.api.BeforeAll",
)
TEARDOWN_ANNOTATIONS = (
    "org.junit.After",
    "org.junit.jupiter.api.AfterEach",
    "org.junit.AfterClass",
    "org.junit.jupiter.api.AfterAll",
)
KNOWN_ANNOTATIONS = (
    TEST_ANNOTATIONS
    | IGNORE_ANNOTATIONS
    | frozenset(SETUP_ANNOTATIONS)
    | frozenset(TEARDOWN_ANNOTATIONS)
)

ASSERTION_PREFIXES = ("assert", "fail", "verify")
BADLY_NAMED_RE = re.compile(r"test[0-9]*")

REJECTION_REASONS = (
    "badly-named", "irregular-signature", "no-mut", "line-mapping",
    "too-few-stmts", "too-many-stmts", "mut-too-long", "combined-too-long",
    "stmt-too-long", "control-flow", "lambda",
)


class DuplicateClass(ValueError):
    pass


class MissingBytecode(ValueError):
    pass


class Unlocatable(LookupError):
    pass


class UnknownProject(KeyError):
    pass


@dataclass
class ClassEntry:
    name: str  # internal form, e.g. org/example/Foo
    kind: str  # non-test | test | dependency
    source: object = None  # SourceModel
    model: object = None  # ClassModel within source
    classfile: object = None  # ClassFile
    source_path: str = ""
    missing_bytecode: bool = False

    @property
    def simple_name(self):
        return self.name.rsplit("/", 1)[-1].rsplit("$", 1)[-1]

    @property
    def package(self):
        return self.name.rsplit("/", 1)[0] if "/" in self.name else ""


@dataclass
class MethodEntry:
    id: str
    owner: str
    name: str
    model: object = None  # MethodModel
    info: object = None  # MethodInfo

    @property
    def descriptor(self):
        return self.info.descriptor if self.info is not None else None

    @property
    def is_static(self):
        if self.info is not None:
            return self.info.is_static
        return "static" in (self.model.modifiers if self.model else ())


@dataclass
class FieldEntry:
    id: str
    owner: str
    name: str
    descriptor: str = ""
    model: object = None  # FieldModel
    info: object = None  # FieldInfo


def _method_id(owner, name, descriptor, model=None):
    if descriptor:
        return f"{owner}.{name}{descriptor}"
    arity = len(model.params) if model is not None else 0
    return f"{owner}.{name}/{arity}"


class CodeElementStore:
    """Immutable shared set of all code elements of one project.

    Built once by collect_project (or load) and treated read-only by every
    downstream phase.
    """

    def __init__(self, project):
        self.project = project
        self.classes = {}  # internal name -> ClassEntry
        self.methods = {}  # method id -> MethodEntry
        self.fields = {}  # field id -> FieldEntry
        self.class_bytes = {}  # internal name -> raw classfile bytes
        self.hierarchy = {}  # internal name -> superclass internal name
        self._by_owner = {}  # internal name -> (method ids, field ids)
        self._frozen = False

    # -- construction -----------------------------------------------------

    def _add_class(self, entry, data=None):
        if entry.name in self.classes:
            raise DuplicateClass(entry.name)
        self.classes[entry.name] = entry
        self._by_owner[entry.name] = ([], [])
        if data is not None:
            self.class_bytes[entry.name] = data
        if entry.classfile is not None and entry.classfile.superclass:
            self.hierarchy[entry.name] = entry.classfile.superclass

    def _register_members(self, entry):
        methods, fields = self._by_owner[entry.name]
        models = list(entry.model.methods) if entry.model is not None else []
        infos = list(entry.classfile.methods) if entry.classfile is not None else []
        used = set()
        for mm in models:
            name = "<init>" if mm.is_constructor else mm.name
            info = _match_info(name, mm, infos, used)
            if info is not None:
                used.add(id(info))
            mid = _method_id(entry.name, name, info.descriptor if info else None, mm)
            self.methods[mid] = MethodEntry(mid, entry.name, name, model=mm, info=info)
            methods.append(mid)
        for info in infos:
            if id(info) in used:
                continue
            mid = _method_id(entry.name, info.name, info.descriptor)
            if mid in self.methods:
                continue
            self.methods[mid] = MethodEntry(mid, entry.name, info.name, info=info)
            methods.append(mid)
        finfos = {f.name: f for f in entry.classfile.fields} if entry.classfile else {}
        fmodels = {f.name: f for f in entry.model.fields} if entry.model else {}
        for name in list(fmodels) + [n for n in finfos if n not in fmodels]:
            fid = f"{entry.name}.{name}"
            info = finfos.get(name)
            self.fields[fid] = FieldEntry(
                fid, entry.name, name,
                descriptor=info.descriptor if info else "",
                model=fmodels.get(name), info=info,
            )
            fields.append(fid)

    def freeze(self):
        self._frozen = True
        return self

    # -- lookups ----------------------------------------------------------

    def method(self, mid):
        return self.methods[mid]

    def methods_of(self, class_name):
        return [self.methods[m] for m in self._by_owner.get(class_name, ((), ()))[0]]

    def fields_of(self, class_name):
        return [self.fields[f] for f in self._by_owner.get(class_name, ((), ()))[1]]

    def method_by_ref(self, owner, name, descriptor):
        """Resolve an invoke target, walking up the superclass chain."""
        cls = owner
        while cls is not None:
            e = self.methods.get(f"{cls}.{name}{descriptor}")
            if e is not None:
                return e
            cls = self.hierarchy.get(cls)
        return None

    def field_by_ref(self, owner, name):
        cls = owner
        while cls is not None:
            e = self.fields.get(f"{cls}.{name}")
            if e is not None:
                return e
            cls = self.hierarchy.get(cls)
        return None

    def is_subtype(self, sub, sup):
        """True when `sub` equals or derives from `sup` per the visible hierarchy."""
        seen = set()
        cls = sub
        while cls is not None and cls not in seen:
            if cls == sup:
                return True
            seen.add(cls)
            entry = self.classes.get(cls)
            if entry is not None and entry.classfile is not None:
                if any(i == sup for i in entry.classfile.interfaces):
                    return True
            cls = self.hierarchy.get(cls)
        return False

    def class_by_simple_name(self, simple, package=""):
        hits = [e for e in self.classes.values() if e.simple_name == simple]
        if not hits:
            return None
        same = [e for e in hits if e.package == package]
        pool = same or hits
        return sorted(pool, key=lambda e: e.name)[0]

    # -- persistence -------------------------------------------------------

    def save(self, path, meta=None):
        rows = []
        for name in sorted(self.classes):
            e = self.classes[name]
            rows.append({
                "name": name,
                "kind": e.kind,
                "source_path": e.source_path,
                "source_text": e.source.text if e.source is not None else None,
                "classfile": base64.b64encode(self.class_bytes[name]).decode("ascii")
                if name in self.class_bytes else None,
                "missing_bytecode": e.missing_bytecode,
            })
        doc = {"project": self.project, "classes": rows}
        if meta is not None:
            doc["_meta"] = meta
        with open(path, "w") as fh:
            json.dump(doc, fh, sort_keys=True, indent=1)
            fh.write("\n")

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            doc = json.load(fh)
        store = cls(doc["project"])
        sources = {}
        for row in doc["classes"]:
            src = None
            if row["source_text"] is not None:
                key = (row["source_path"], row["source_text"])
                if key not in sources:
                    sources[key] = parse_source(row["source_text"], row["source_path"])
                src = sources[key]
            cf = None
            data = None
            if row["classfile"] is not None:
                data = base64.b64decode(row["classfile"])
                cf = parse_classfile(data)
                if row["kind"] == "dependency":
                    for m in cf.methods:
                        m.code = None
            model = None
            if src is not None:
                for cm in src.classes:
                    if cm.binary_name.replace(".", "/") == row["name"]:
                        model = cm
                        break
            entry = ClassEntry(row["name"], row["kind"], source=src, model=model,
                               classfile=cf, source_path=row["source_path"],
                               missing_bytecode=row["missing_bytecode"])
            store._add_class(entry, data)
        for entry in store.classes.values():
            store._register_members(entry)
        return store.freeze()


def _match_info(name, model, infos, used):
    """Pair a source method with its classfile counterpart by name and arity."""
    pool = [i for i in infos if i.name == name and id(i) not in used]
    if not pool:
        return None
    if len(pool) == 1:
        return pool[0]
    by_arity = [i for i in pool
                if len(parse_method_descriptor(i.descriptor)[0]) == len(model.params)]
    pool = by_arity or pool
    if len(pool) > 1:
        def matches(info):
            params, _ = parse_method_descriptor(info.descriptor)
            for (type_text, _n), desc in zip(model.params, params):
                simple = type_text.split("<")[0].replace("[]", "").strip()
                simple = simple.rsplit(".", 1)[-1]
                if desc.kind == "object" and desc.name.rsplit("/", 1)[-1] != simple:
                    return False
                if desc.kind == "primitive" and desc.name != simple:
                    return False
            return True
        exact = [i for i in pool if matches(i)]
        pool = exact or pool
    return pool[0]


def _iter_files(root, suffix):
    out = []
    for dirpath, dirnames, filenames in os.walk(root):
        dirnames[:] = sorted(d for d in dirnames if not d.startswith("."))
        for fn in sorted(filenames):
            if fn.endswith(suffix):
                out.append(os.path.join(dirpath, fn))
    return out


def collect_project(root, dependency_classpath=()):
    """Scan one project tree into a CodeElementStore.

    Sources are parsed, compiled classes linked by internal name, and
    classpath entries folded in as metadata-only dependency classes.
    """
    root = os.path.abspath(root)
    store = CodeElementStore(os.path.basename(root))

    classfiles = {}
    for path in _iter_files(root, ".class"):
        with open(path, "rb") as fh:
            data = fh.read()
        cf = parse_classfile(data)
        if cf.binary_name in classfiles:
            raise DuplicateClass(cf.binary_name)
        classfiles[cf.binary_name] = (cf, data)

    seen_sources = {}
    for path in _iter_files(root, ".java"):
        with open(path) as fh:
            text = fh.read()
        src = parse_source(text, path)
        rel = os.path.relpath(path, root)
        in_test_root = "test" in rel.split(os.sep)[:-1]
        for model in src.classes:
            name = model.binary_name.replace(".", "/")
            if name in seen_sources:
                raise DuplicateClass(name)
            seen_sources[name] = True
            cf, data = classfiles.pop(name, (None, None))
            kind = "test" if in_test_root or _declares_test(src, model) else "non-test"
            entry = ClassEntry(name, kind, source=src, model=model, classfile=cf,
                               source_path=rel, missing_bytecode=cf is None)
            store._add_class(entry, data)

    # compiled classes with no matching source stay as bodiless project classes
    for name, (cf, data) in sorted(classfiles.items()):
        store._add_class(ClassEntry(name, "non-test", classfile=cf), data)

    for entry in _read_classpath(dependency_classpath):
        name, cf, data = entry
        if name in store.classes:
            continue
        for m in cf.methods:
            m.code = None
        store._add_class(ClassEntry(name, "dependency", classfile=cf), data)

    for entry in store.classes.values():
        store._register_members(entry)
    return store.freeze()


def _read_classpath(entries):
    out = []
    for entry in entries:
        if os.path.isdir(entry):
            for path in _iter_files(entry, ".class"):
                with open(path, "rb") as fh:
                    data = fh.read()
                cf = parse_classfile(data)
                out.append((cf.binary_name, cf, data))
        elif zipfile.is_zipfile(entry):
            with zipfile.ZipFile(entry) as zf:
                for info in sorted(zf.infolist(), key=lambda i: i.filename):
                    if info.filename.endswith(".class"):
                        data = zf.read(info)
                        cf = parse_classfile(data)
                        out.append((cf.binary_name, cf, data))
    return out


def _declares_test(src, model):
    for mm in model.methods:
        for raw in mm.annotations:
            if src.resolve_annotation(raw, KNOWN_ANNOTATIONS) in TEST_ANNOTATIONS:
                return True
    return False


def resolved_annotations(entry, method_model):
    """Qualified annotation names of one source method."""
    if entry.source is None:
        return set()
    return {entry.source.resolve_annotation(raw, KNOWN_ANNOTATIONS)
            for raw in method_model.annotations}


def detect_tests(store):
    """Method ids annotated as tests, minus ignored ones, in stable order."""
    out = []
    for name in sorted(store.classes):
        entry = store.classes[name]
        if entry.source is None or entry.kind == "dependency":
            continue
        for mid in store._by_owner[name][0]:
            m = store.methods[mid]
            if m.model is None or m.model.body is None:
                continue
            annos = resolved_annotations(entry, m.model)
            if annos & TEST_ANNOTATIONS and not annos & IGNORE_ANNOTATIONS:
                out.append(mid)
    return out


# -- method-under-test location -------------------------------------------


_IDENT_RE = re.compile(r"[A-Za-z_$][A-Za-z0-9_$]*")


def _token_view(tok):
    kind = getattr(tok, "kind", None)
    text = tok.text if kind is not None else str(tok)
    if kind is None:
        if text in KEYWORDS:
            kind = "keyword"
        elif _IDENT_RE.fullmatch(text):
            kind = "identifier"
        else:
            kind = "other"
    return kind, text


def statement_calls(stmt):
    """Called method names in source order; constructor calls excluded.

    Accepts a Statement or a plain token-text list, so it works on stored
    task statements as well as freshly parsed ones.
    """
    out = []
    toks = [_token_view(t) for t in getattr(stmt, "tokens", stmt)]
    for i, (kind, text) in enumerate(toks):
        if kind != "identifier":
            continue
        if i + 1 < len(toks) and toks[i + 1][1] == "(":
            prev = toks[i - 1][1] if i > 0 else ""
            if prev != "new":
                out.append(text)
    return out


def is_assertion_statement(stmt):
    calls = statement_calls(stmt)
    return bool(calls) and calls[0].startswith(ASSERTION_PREFIXES)


def first_assertion_index(statements):
    for k, stmt in enumerate(statements):
        if is_assertion_statement(stmt):
            return k
    return None


def _cut_of(test_entry, store):
    simple = store.classes[test_entry.owner].simple_name
    for suffix in ("Tests", "Test"):
        if simple.endswith(suffix) and len(simple) > len(suffix):
            simple = simple[: -len(suffix)]
            break
    else:
        for prefix in ("Tests", "Test"):
            if simple.startswith(prefix) and len(simple) > len(prefix):
                simple = simple[len(prefix):]
                break
    entry = store.class_by_simple_name(simple, store.classes[test_entry.owner].package)
    if entry is not None and entry.kind != "test":
        return entry
    return None


def _resolve_call(name, store, cut=None):
    """Candidate store method for a called name; prefers the class under test."""
    hits = [m for m in store.methods.values()
            if m.name == name and m.name != "<init>"
            and store.classes[m.owner].kind == "non-test"]
    if not hits:
        return None
    if cut is not None:
        in_cut = [m for m in hits if m.owner == cut.name]
        if in_cut:
            hits = in_cut
    return sorted(hits, key=lambda m: m.id)[0]


def locate_mut(test_id, store):
    """Four-step heuristic locating the method under test.

    (1) a single call resolves directly; (2) calls into the class under test,
    unique method or last before the first assertion; (3) last resolvable call
    before the first assertion; (4) last resolvable call anywhere.
    """
    test = store.method(test_id)
    body = test.model.body if test.model is not None else None
    if not body:
        raise Unlocatable(test_id)
    cut = _cut_of(test, store)
    calls = []  # (statement index, name, resolved entry or None)
    for k, stmt in enumerate(body):
        for name in statement_calls(stmt):
            calls.append((k, name, _resolve_call(name, store, cut)))
    if not calls:
        raise Unlocatable(test_id)

    if len(calls) == 1:
        _, _, entry = calls[0]
        if entry is None:
            raise Unlocatable(test_id)
        return entry.id

    first_assert = first_assertion_index(body)
    cutoff = first_assert if first_assert is not None else len(body)

    if cut is not None:
        cut_calls = [(k, e) for k, _n, e in calls if e is not None and e.owner == cut.name]
        distinct = {e.id for _k, e in cut_calls}
        if len(distinct) == 1:
            return cut_calls[0][1].id
        before = [e for k, e in cut_calls if k < cutoff]
        if before:
            return before[-1].id

    resolved = [(k, e) for k, _n, e in calls if e is not None]
    before = [e for k, e in resolved if k < cutoff]
    if before:
        return before[-1].id
    if resolved:
        return resolved[-1][1].id
    raise Unlocatable(test_id)


# -- filtering into completion tasks ---------------------------------------


@dataclass
class FilterConfig:
    min_stmts: int = 1
    max_stmts: int = 20
    max_mut_tokens: int = 400
    max_combined_tokens: int = 800
    max_stmt_tokens: int = 100


@dataclass
class CompletionTask:
    project: str
    test_id: str
    mut_id: str
    sign: list  # masked signature token texts
    statements: list  # per statement: masked token texts
    stmt_index: int
    semantics: object = None

    @property
    def task_id(self):
        return f"{self.test_id}#{self.stmt_index}"

    def prior(self):
        return self.statements[: self.stmt_index]

    def gold(self):
        return self.statements[self.stmt_index]


@dataclass
class FilterReport:
    rows: list = field(default_factory=list)  # (test id, "kept" or rejection reason)

    def counts(self):
        out = {}
        for _tid, reason in self.rows:
            out[reason] = out.get(reason, 0) + 1
        return out

    def write_tsv(self, path):
        with open(path, "w") as fh:
            fh.write("test_id\tdisposition\n")
            for tid, reason in self.rows:
                fh.write(f"{tid}\t{reason}\n")


def signature_tokens(method_model):
    """Masked token texts of a method declaration up to its body brace."""
    toks = lex(method_model.raw_text)
    out = []
    for t in toks:
        if t.text == "{":
            break
        out.append(t)
    return [t.text for t in mask_strings(out)]


def method_token_count(entry):
    if entry.model is None:
        return 0
    return len(lex(entry.model.raw_text))


def filter_corpus(tests, store, config=None):
    """Apply the corpus filters in order; rejections are report rows."""
    config = config or FilterConfig()
    tasks = []
    report = FilterReport()
    for tid in tests:
        reason = _disposition(tid, store, config)
        report.rows.append((tid, reason))
        if reason != "kept":
            continue
        test = store.method(tid)
        mut_id = locate_mut(tid, store)
        sign = signature_tokens(test.model)
        statements = [[t.text for t in mask_strings(s.tokens)] for s in test.model.body]
        for k in range(len(statements)):
            tasks.append(CompletionTask(
                project=store.project, test_id=tid, mut_id=mut_id,
                sign=sign, statements=statements, stmt_index=k,
            ))
    return tasks, report


def _disposition(tid, store, config):
    test = store.method(tid)
    model = test.model
    if BADLY_NAMED_RE.fullmatch(model.name):
        return "badly-named"
    if model.params or model.return_type != "void":
        return "irregular-signature"
    try:
        mut_id = locate_mut(tid, store)
    except Unlocatable:
        return "no-mut"
    if test.info is None or test.info.code is None:
        return "line-mapping"
    try:
        map_statements_to_instructions(test.info, model.body)
    except (AmbiguousLineMapping, MalformedBytecode):
        return "line-mapping"
    n = len(model.body)
    if n < config.min_stmts:
        return "too-few-stmts"
    if n > config.max_stmts:
        return "too-many-stmts"
    mut_tokens = method_token_count(store.method(mut_id))
    if mut_tokens > config.max_mut_tokens:
        return "mut-too-long"
    if mut_tokens + len(lex(model.raw_text)) > config.max_combined_tokens:
        return "combined-too-long"
    if any(len(s.tokens) > config.max_stmt_tokens for s in model.body):
        return "stmt-too-long"
    if any(s.has_control_flow for s in model.body):
        return "control-flow"
    if any(s.has_lambda for s in model.body):
        return "lambda"
    return "kept"


# -- splits and serialization ----------------------------------------------


def split_corpus(tasks, split_spec):
    """Partition tasks by project into (train, val, eval) lists."""
    parts = {"train": [], "val": [], "eval": []}
    for task in tasks:
        if task.project not in split_spec:
            raise UnknownProject(task.project)
        part = split_spec[task.project]
        if part not in parts:
            raise UnknownProject(f"{task.project}: bad partition {part!r}")
        parts[part].append(task)
    return parts["train"], parts["val"], parts["eval"]


def task_to_record(task):
    rec = {
        "project": task.project,
        "test_id": task.test_id,
        "mut_id": task.mut_id,
        "sign": task.sign,
        "statements": task.statements,
        "stmt_index": task.stmt_index,
    }
    if task.semantics is not None:
        rec["semantics"] = task.semantics.to_record()
    return rec


def record_to_task(rec):
    semantics = None
    if "semantics" in rec:
        from .semantics import SemanticContext

        semantics = SemanticContext.from_record(rec["semantics"])
    return CompletionTask(
        project=rec["project"], test_id=rec["test_id"], mut_id=rec["mut_id"],
        sign=list(rec["sign"]), statements=[list(s) for s in rec["statements"]],
        stmt_index=rec["stmt_index"], semantics=semantics,
    )


def write_records(path, records, meta=None):
    """Line-delimited records with an optional leading _meta line."""
    with open(path, "w") as fh:
        if meta is not None:
            fh.write(json.dumps({"_meta": meta}, sort_keys=True) + "\n")
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


def read_records(path):
    meta = None
    records = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            if "_meta" in rec and meta is None and not records:
                meta = rec["_meta"]
                continue
            records.append(rec)
    return meta, records
