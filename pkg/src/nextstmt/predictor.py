"""Model-input assembly and pluggable next-statement predictors.

The input sequence concatenates the six semantics pieces and three
syntax-level pieces in a configurable order with `<sep>` delimiters, truncated
from the front to a fixed budget.  Candidates come either from the BM25
retrieval baseline or from an external predictions file.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field

from .elements import read_records
from .jsource import subtokenize
from .semantics import StatementIndex, build_statement_index, context_of

log = logging.getLogger(__name__)

SEP = "<sep>"
PIECES = (
    "fields_notset",      # S3
    "last_called_method", # S5
    "types_local",        # S1
    "types_absent",       # S2
    "similar_stmt",       # S6
    "setup_teardown",     # S4
    "mut",
    "sign",
    "prior",
)

_NAME_PART = re.compile(r"[A-Za-z0-9_$]+|\[\]|[./]")


class EmptyIndex(ValueError):
    pass


class UnknownTaskId(KeyError):
    pass


class MalformedRecord(ValueError):
    pass


@dataclass
class PredictorConfig:
    max_len: int = 512
    k: int = 10
    ordering: tuple = PIECES

    def __post_init__(self):
        if sorted(self.ordering) != sorted(PIECES):
            raise ValueError(f"ordering must permute {PIECES}")


@dataclass
class InputSequence:
    subtokens: list
    truncated: bool
    original_length: int


@dataclass
class CandidateList:
    candidates: list = field(default_factory=list)  # (token texts, score), score desc

    def __len__(self):
        return len(self.candidates)

    def tokens(self, rank):
        return self.candidates[rank][0]

    def to_record(self, task_id):
        return {"task_id": task_id,
                "candidates": [{"tokens": list(t), "score": s}
                               for t, s in self.candidates]}

    @classmethod
    def from_record(cls, rec):
        return cls([(list(c["tokens"]), float(c["score"])) for c in rec["candidates"]])


def _type_tokens(type_desc):
    return _NAME_PART.findall(type_desc.to_source())


def _piece_tokens(task, semantics, name, store):
    if name == "fields_notset":
        out = []
        for fid in semantics.fields_notset:
            owner, fname = fid.rsplit(".", 1)
            out += [owner.rsplit("/", 1)[-1], ".", fname]
        return out
    if name == "last_called_method":
        return list(semantics.last_called_method)
    if name == "types_local":
        out = []
        for var, t in semantics.types_local:
            out += [var] + _type_tokens(t)
        return out
    if name == "types_absent":
        out = []
        for t in semantics.types_absent:
            out += _type_tokens(t)
        return out
    if name == "similar_stmt":
        return list(semantics.similar_stmt)
    if name == "setup_teardown":
        return list(semantics.setup_teardown)
    if name == "mut":
        if store is None:
            return []
        from .semantics import masked_method_tokens

        return masked_method_tokens(store.method(task.mut_id))
    if name == "sign":
        return list(task.sign)
    if name == "prior":
        out = []
        for stmt in task.prior():
            out += list(stmt)
        return out
    raise ValueError(f"unknown piece {name!r}")


def assemble_input(task, config=None, store=None):
    """Concatenate the input pieces with delimiters and truncate from the front."""
    config = config or PredictorConfig()
    semantics = task.semantics
    if semantics is None:
        from .semantics import SemanticContext

        semantics = SemanticContext()
    out = []
    for i, name in enumerate(config.ordering):
        if i:
            out.append(SEP)
        out.extend(subtokenize(_piece_tokens(task, semantics, name, store), markers=False))
    original = len(out)
    if original > config.max_len:
        return InputSequence(out[original - config.max_len:], True, original)
    return InputSequence(out, False, original)


# -- retrieval baseline -------------------------------------------------------


def build_retrieval_index(train_tasks, stores=(), k1=None, b=None):
    """Index gold statements of the training tasks plus non-test code."""
    kwargs = {}
    if k1 is not None:
        kwargs["k1"] = k1
    if b is not None:
        kwargs["b"] = b
    index = StatementIndex(**kwargs)
    for task in train_tasks:
        index.add(context_of(task.statements, task.stmt_index), task.gold())
    for store in stores:
        build_statement_index(store, into=index)
    return index.finalize()


def predict_retrieval(task, index, config=None):
    """Top-k distinct next statements ranked by BM25 over prior contexts."""
    config = config or PredictorConfig()
    if len(index) == 0:
        return CandidateList()
    query = context_of(task.statements, task.stmt_index)
    seen = set()
    out = []
    for score, doc in index.search(query):
        key = tuple(doc.statement)
        if key in seen:
            continue
        seen.add(key)
        out.append((list(doc.statement), score))
        if len(out) == config.k:
            break
    return CandidateList(out)


# -- external predictions ----------------------------------------------------


def write_predictions(path, predictions, meta=None):
    """predictions: iterable of (task_id, CandidateList), written line-delimited."""
    with open(path, "w") as fh:
        if meta is not None:
            fh.write(json.dumps({"_meta": meta}, sort_keys=True) + "\n")
        for task_id, cl in predictions:
            fh.write(json.dumps(cl.to_record(task_id), sort_keys=True) + "\n")


def load_external_predictions(path, tasks, k=10):
    """Validated map task id -> CandidateList for records naming known tasks."""
    known = {t.task_id for t in tasks}
    out = {}
    _meta, records = read_records(path)
    for rec in records:
        if "task_id" not in rec or "candidates" not in rec:
            raise MalformedRecord(f"missing task_id/candidates: {rec!r}")
        tid = rec["task_id"]
        if tid not in known:
            raise UnknownTaskId(tid)
        try:
            cl = CandidateList.from_record(rec)
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedRecord(f"{tid}: {exc}") from exc
        if len(cl.candidates) > k:
            raise MalformedRecord(f"{tid}: more than {k} candidates")
        scores = [s for _t, s in cl.candidates]
        if any(a < b for a, b in zip(scores, scores[1:])):
            log.warning("re-sorting unsorted candidate scores for %s", tid)
            cl.candidates.sort(key=lambda p: -p[1])
        out[tid] = cl
    return out
