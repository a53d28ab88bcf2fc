"""Extraction of the six kinds of code semantics for a completion point.

All extractors are pure functions over the immutable code-element store (plus
the statement index for similarity search), so a SemanticContext is fully
determined by its task.
"""

from __future__ import annotations

import math
from collections import Counter, deque
from dataclasses import dataclass, field

from .elements import SETUP_ANNOTATIONS, TEARDOWN_ANNOTATIONS, resolved_annotations
from .jclass import (
    infer_local_types,
    map_statements_to_instructions,
    obj,
    field_type,
    parse_method_descriptor,
)
from .jsource import lex, mask_strings, subtokenize

BM25_K1 = 1.2
BM25_B = 0.75

_INVOKES = ("invokevirtual", "invokespecial", "invokestatic", "invokeinterface")
_FIELD_STORES = ("putfield", "putstatic")


@dataclass
class SemanticContext:
    types_local: list = field(default_factory=list)  # (name, TypeDesc)
    types_absent: list = field(default_factory=list)  # TypeDesc, sorted
    fields_notset: list = field(default_factory=list)  # field ids
    setup_teardown: list = field(default_factory=list)  # masked token texts
    last_called_method: list = field(default_factory=list)
    similar_stmt: list = field(default_factory=list)

    def to_record(self):
        return {
            "types_local": [[n, t.to_descriptor()] for n, t in self.types_local],
            "types_absent": [t.to_descriptor() for t in self.types_absent],
            "fields_notset": list(self.fields_notset),
            "setup_teardown": list(self.setup_teardown),
            "last_called_method": list(self.last_called_method),
            "similar_stmt": list(self.similar_stmt),
        }

    @classmethod
    def from_record(cls, rec):
        return cls(
            types_local=[(n, field_type(d)) for n, d in rec["types_local"]],
            types_absent=[field_type(d) for d in rec["types_absent"]],
            fields_notset=list(rec["fields_notset"]),
            setup_teardown=list(rec["setup_teardown"]),
            last_called_method=list(rec["last_called_method"]),
            similar_stmt=list(rec["similar_stmt"]),
        )


# -- shared bytecode plumbing ------------------------------------------------


def _test_ranges(task, store):
    test = store.method(task.test_id)
    return test, map_statements_to_instructions(test.info, test.model.body)


def _prior_boundary(task, store):
    """Instruction offset ending the last prior statement, or 0."""
    if task.stmt_index == 0:
        return None, 0
    test, ranges = _test_ranges(task, store)
    return test, ranges[task.stmt_index - 1][1][1]


def _instructions_between(info, start, end):
    return [i for i in info.code.instructions if start <= i.offset < end]


def _local_name(info, slot, boundary):
    best = None
    for start_pc, length, name, _desc, s in info.code.local_variable_table:
        if s == slot and start_pc <= boundary <= start_pc + length:
            if best is None or start_pc >= best[0]:
                best = (start_pc, name)
    return best[1] if best else f"var{slot}"


def _setup_methods(store, class_name, annotations=SETUP_ANNOTATIONS):
    entry = store.classes[class_name]
    out = []
    for m in store.methods_of(class_name):
        if m.model is None:
            continue
        if resolved_annotations(entry, m.model) & set(annotations):
            out.append(m)
    return out


def masked_method_tokens(entry):
    """Masked token texts of one method's full source."""
    if entry.model is None:
        return []
    return [t.text for t in mask_strings(lex(entry.model.raw_text))]


# -- S1: types of local variables ---------------------------------------------


def extract_types_local(task, store):
    """Local variable types at the end of the last prior statement."""
    test, boundary = _prior_boundary(task, store)
    if test is None:
        return []
    cf = store.classes[test.owner].classfile
    types = infer_local_types(test.info, cf, upto=boundary, hierarchy=store.hierarchy)
    out = []
    for slot in sorted(types):
        if slot == 0 and not test.info.is_static:
            continue
        t = types[slot]
        if t.kind in ("top", "uninitialized"):
            continue
        out.append((_local_name(test.info, slot, boundary), t))
    return out


# -- S2: types needed but absent -----------------------------------------------


def _prepared_types(task, store):
    prepared = [t for _n, t in extract_types_local(task, store)]
    test = store.method(task.test_id)
    notset = set(extract_fields_notset(task, store))
    for f in store.fields_of(test.owner):
        if f.id in notset or not f.descriptor:
            continue
        prepared.append(field_type(f.descriptor))
    return prepared


def _covers(prepared, needed, store):
    if prepared == needed:
        return True
    if prepared.kind == "object" and needed.kind == "object":
        return store.is_subtype(prepared.name, needed.name)
    return False


def extract_types_absent(task, store):
    """MUT parameter/receiver types with no prepared value of that type."""
    mut = store.method(task.mut_id)
    if mut.descriptor is None:
        return []
    needed, _ret = parse_method_descriptor(mut.descriptor)
    needed = list(needed)
    if not mut.is_static:
        needed.append(obj(mut.owner))
    prepared = _prepared_types(task, store)
    absent = []
    for n in needed:
        if any(_covers(p, n, store) for p in prepared):
            continue
        if n not in absent:
            absent.append(n)
    return sorted(absent, key=lambda t: t.to_descriptor())


# -- S3: fields not yet set ------------------------------------------------


def extract_fields_notset(task, store, max_depth=4):
    """Fields of the test class and class under test with no reachable store.

    A field counts as set when a field-store instruction targeting it appears
    in the prior statements, a setup method, or any method reachable from
    those within max_depth call edges.
    """
    test = store.method(task.test_id)
    mut = store.method(task.mut_id)
    universe = [f.id for f in store.fields_of(test.owner)]
    if mut.owner != test.owner:
        universe += [f.id for f in store.fields_of(mut.owner)]

    test_pool = store.classes[test.owner].classfile.pool
    work = deque()
    if task.stmt_index > 0:
        _t, ranges = _test_ranges(task, store)
        end = ranges[task.stmt_index - 1][1][1]
        work.append((_instructions_between(test.info, 0, end), test_pool, 0))
    for m in _setup_methods(store, test.owner):
        if m.info is not None and m.info.code is not None:
            pool = store.classes[m.owner].classfile.pool
            work.append((m.info.code.instructions, pool, 0))

    stored = set()
    seen = set()
    # breadth-first, so every method is first expanded at its minimal depth
    while work:
        instructions, pool, depth = work.popleft()
        for ins in instructions:
            if ins.mnemonic in _FIELD_STORES:
                cls, name, _desc = pool.member_ref(ins.operands[0])
                f = store.field_by_ref(cls, name)
                stored.add(f.id if f is not None else f"{cls}.{name}")
            elif ins.mnemonic in _INVOKES and depth < max_depth:
                cls, name, desc = pool.member_ref(ins.operands[0])
                callee = store.method_by_ref(cls, name, desc)
                if callee is None or callee.info is None or callee.info.code is None:
                    continue
                if callee.id in seen:
                    continue
                seen.add(callee.id)
                cpool = store.classes[callee.owner].classfile.pool
                work.append((callee.info.code.instructions, cpool, depth + 1))
    return [fid for fid in universe if fid not in stored]


# -- S4: setup and teardown sources -----------------------------------------


def extract_setup_teardown(task, store):
    test = store.method(task.test_id)
    out = []
    for m in _setup_methods(store, test.owner, SETUP_ANNOTATIONS):
        out.extend(masked_method_tokens(m))
    for m in _setup_methods(store, test.owner, TEARDOWN_ANNOTATIONS):
        out.extend(masked_method_tokens(m))
    return out


# -- S5: last called method ---------------------------------------------------


def extract_last_called_method(task, store):
    if task.stmt_index == 0:
        return []
    test, ranges = _test_ranges(task, store)
    end = ranges[task.stmt_index - 1][1][1]
    pool = store.classes[test.owner].classfile.pool
    last = None
    for ins in _instructions_between(test.info, 0, end):
        if ins.mnemonic in _INVOKES:
            last = ins
    if last is None:
        return []
    cls, name, desc = pool.member_ref(last.operands[0])
    callee = store.method_by_ref(cls, name, desc)
    if callee is None or callee.model is None:
        return []
    return masked_method_tokens(callee)


# -- S6: most similar statement (BM25 over prior-statement contexts) ----------


@dataclass
class _Doc:
    doc_id: int
    terms: Counter
    length: int
    statement: tuple  # masked token texts


class StatementIndex:
    """BM25 index of statements keyed by their ≤2-prior-statement contexts."""

    def __init__(self, k1=BM25_K1, b=BM25_B):
        self.k1 = k1
        self.b = b
        self.docs = []
        self.df = Counter()
        self.avgdl = 0.0
        self._finalized = False

    def __len__(self):
        return len(self.docs)

    def add(self, context_subtokens, statement_tokens):
        if self._finalized:
            raise ValueError("index is finalized")
        terms = Counter(context_subtokens)
        doc = _Doc(len(self.docs), terms, sum(terms.values()), tuple(statement_tokens))
        self.docs.append(doc)
        for t in terms:
            self.df[t] += 1
        return doc.doc_id

    def finalize(self):
        n = len(self.docs)
        self.avgdl = (sum(d.length for d in self.docs) / n) if n else 0.0
        self._finalized = True
        return self

    def idf(self, term):
        n = len(self.docs)
        return max(0.0, math.log((n - self.df[term] + 0.5) / (self.df[term] + 0.5)))

    def score(self, query_terms, doc):
        if self.avgdl == 0:
            return 0.0
        norm = self.k1 * (1 - self.b + self.b * doc.length / self.avgdl)
        total = 0.0
        for term in set(query_terms):
            tf = doc.terms.get(term, 0)
            if tf == 0:
                continue
            total += self.idf(term) * tf * (self.k1 + 1) / (tf + norm)
        return total

    def search(self, query_subtokens, k=None):
        """Docs ranked by (score desc, doc id asc); zero scores dropped."""
        if not self._finalized:
            raise ValueError("index not finalized")
        scored = []
        for doc in self.docs:
            s = self.score(query_subtokens, doc)
            if s > 0:
                scored.append((s, doc))
        scored.sort(key=lambda p: (-p[0], p[1].doc_id))
        return scored[:k] if k is not None else scored


def bm25_score(query_subtokens, doc_subtokens, index):
    """Score an ad-hoc document against the index statistics."""
    terms = Counter(doc_subtokens)
    doc = _Doc(-1, terms, sum(terms.values()), ())
    return index.score(query_subtokens, doc)


def context_of(statements, k):
    """Subtokens of the ≤2 statements before index k (token-text lists)."""
    prior = statements[max(0, k - 2):k]
    out = []
    for stmt in prior:
        out.extend(subtokenize(list(stmt), markers=False))
    return out


def build_statement_index(store, k1=BM25_K1, b=BM25_B, into=None):
    """Index every non-test statement by its ≤2-prior-statement context."""
    index = into if into is not None else StatementIndex(k1=k1, b=b)
    for name in sorted(store.classes):
        entry = store.classes[name]
        if entry.kind != "non-test" or entry.model is None:
            continue
        for m in store.methods_of(name):
            if m.model is None or m.model.body is None:
                continue
            masked = [[t.text for t in mask_strings(s.tokens)] for s in m.model.body]
            for k in range(len(masked)):
                index.add(context_of(masked, k), masked[k])
    return index if into is not None else index.finalize()


def extract_similar_stmt(task, index):
    query = context_of(task.statements, task.stmt_index)
    hits = index.search(query, k=1)
    if not hits:
        return []
    return list(hits[0][1].statement)


# -- assembling all six -------------------------------------------------------


def extract_semantics(task, store, index, max_depth=4):
    return SemanticContext(
        types_local=extract_types_local(task, store),
        types_absent=extract_types_absent(task, store),
        fields_notset=extract_fields_notset(task, store, max_depth),
        setup_teardown=extract_setup_teardown(task, store),
        last_called_method=extract_last_called_method(task, store),
        similar_stmt=extract_similar_stmt(task, index),
    )
