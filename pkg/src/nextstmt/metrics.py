"""Evaluation metrics over predicted statements.

All metrics operate on token lists after whitespace normalization (tokens
stripped, empty tokens dropped). Records built by the pipeline carry
subtokens, but nothing here depends on that.
"""

import json
import logging
import math
import random
from collections import Counter
from dataclasses import dataclass, field

log = logging.getLogger(__name__)

# Status labels shared with the execution runner.
NOT_COMPILABLE = "NotCompilable"
COMPILABLE_NOT_RUNNABLE = "CompilableNotRunnable"
RUNNABLE = "Runnable"

SUBSETS = ("all", "runnable", "oracle", "oracle-runnable")
METRICS = ("XM", "Acc@10", "BLEU", "CodeBLEU", "EditSim", "ROUGE-L")

JAVA_KEYWORDS = frozenset("""
    abstract assert boolean break byte case catch char class const continue
    default do double else enum extends final finally float for goto if
    implements import instanceof int interface long native new package
    private protected public return short static strictfp super switch
    synchronized this throw throws transient try void volatile while
    true false null
""".split())
KEYWORD_WEIGHT = 5.0

_ASSIGN_OPS = frozenset(
    ("=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<=", ">>=", ">>>=")
)


class EmptySubset(Exception):
    pass


class MissingOutcome(Exception):
    pass


class LengthMismatch(Exception):
    pass


def _norm(tokens):
    return [t.strip() for t in tokens if t and t.strip()]


def exact_match(pred, gold):
    return int(_norm(pred) == _norm(gold))


def acc_at_k(preds, gold, k=10):
    return int(any(exact_match(p, gold) for p in preds[:k]))


def _ngrams(tokens, n):
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def bleu(pred, gold):
    """1-4-gram BLEU with add-one smoothing where an n-gram count is zero."""
    p, g = _norm(pred), _norm(gold)
    if not p and not g:
        return 1.0
    if not p or not g:
        return 0.0
    log_sum = 0.0
    for n in range(1, 5):
        pn, gn = _ngrams(p, n), _ngrams(g, n)
        total = sum(pn.values())
        match = sum(min(c, gn[t]) for t, c in pn.items())
        if match == 0:
            match, total = match + 1, total + 1
        log_sum += math.log(match / total)
    bp = 1.0 if len(p) >= len(g) else math.exp(1 - len(g) / len(p))
    return bp * math.exp(log_sum / 4)


def _keyword_bleu(pred, gold):
    """BLEU with keyword-weighted unigram precision; higher n-grams standard."""
    p, g = _norm(pred), _norm(gold)
    if not p and not g:
        return 1.0
    if not p or not g:
        return 0.0

    def weight(token):
        return KEYWORD_WEIGHT if token in JAVA_KEYWORDS else 1.0

    log_sum = 0.0
    pn, gn = Counter(p), Counter(g)
    total = sum(c * weight(t) for t, c in pn.items())
    match = sum(min(c, gn[t]) * weight(t) for t, c in pn.items())
    if match == 0:
        match, total = match + 1, total + 1
    log_sum += math.log(match / total)
    for n in range(2, 5):
        pn, gn = _ngrams(p, n), _ngrams(g, n)
        total = sum(pn.values())
        match = sum(min(c, gn[t]) for t, c in pn.items())
        if match == 0:
            match, total = match + 1, total + 1
        log_sum += math.log(match / total)
    bp = 1.0 if len(p) >= len(g) else math.exp(1 - len(g) / len(p))
    return bp * math.exp(log_sum / 4)


_OPEN = {"(": ")", "[": "]", "{": "}"}
_CLOSE = frozenset(_OPEN.values())


def _bracket_shapes(tokens):
    """Multiset of subtree shapes from bracket nesting; leaves collapse to T."""
    root = ("R", [])
    stack = [root]
    for t in _norm(tokens):
        if t in _OPEN:
            node = (t, [])
            stack[-1][1].append(node)
            stack.append(node)
        elif t in _CLOSE:
            if len(stack) > 1:
                stack.pop()
        else:
            if not stack[-1][1] or stack[-1][1][-1] != "T":
                stack[-1][1].append("T")
    shapes = Counter()

    def serialize(node):
        if node == "T":
            return "T"
        label, children = node
        s = "(" + label + "".join(serialize(c) for c in children) + ")"
        shapes[s] += 1
        return s

    serialize(root)
    return shapes


def _dice(a, b):
    overlap = sum((a & b).values())
    size = sum(a.values()) + sum(b.values())
    return 2 * overlap / size if size else 1.0


def tree_similarity(pred, gold):
    """Bracket-nesting shape overlap; rename-invariant shallow syntax match."""
    return _dice(_bracket_shapes(pred), _bracket_shapes(gold))


_IDENT_CHARS = frozenset(
    "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_$"
)


def _is_identifier(token):
    return (
        bool(token)
        and not token[0].isdigit()
        and all(c in _IDENT_CHARS for c in token)
        and token not in JAVA_KEYWORDS
    )


def _defuse_pairs(tokens):
    """Def-use pairs with identifiers renamed by first occurrence."""
    toks = _norm(tokens)
    names = {}
    for t in toks:
        if _is_identifier(t) and t not in names:
            names[t] = f"v{len(names)}"
    pairs = Counter()
    for i, t in enumerate(toks):
        if t not in _ASSIGN_OPS:
            continue
        target = next((names[x] for x in reversed(toks[:i]) if x in names), None)
        if target is None:
            continue
        for x in toks[i + 1:]:
            if x in names:
                pairs[(target, names[x])] += 1
    return pairs


def defuse_overlap(pred, gold):
    a, b = _defuse_pairs(pred), _defuse_pairs(gold)
    if not a and not b:
        return 1.0
    if not a or not b:
        return 0.0
    return _dice(a, b)


def codebleu_parts(pred, gold):
    return {
        "bleu": bleu(pred, gold),
        "keyword_bleu": _keyword_bleu(pred, gold),
        "tree": tree_similarity(pred, gold),
        "defuse": defuse_overlap(pred, gold),
    }


def codebleu(pred, gold, weights=(0.25, 0.25, 0.25, 0.25)):
    parts = codebleu_parts(pred, gold)
    order = ("bleu", "keyword_bleu", "tree", "defuse")
    return sum(w * parts[name] for w, name in zip(weights, order))


def _levenshtein(a, b):
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[len(b)]


def edit_similarity(pred, gold):
    """1 - edit distance / max length over single-space-joined tokens."""
    a, b = " ".join(_norm(pred)), " ".join(_norm(gold))
    if not a and not b:
        return 1.0
    return 1.0 - _levenshtein(a, b) / max(len(a), len(b))


def rouge_l_f1(pred, gold):
    p, g = _norm(pred), _norm(gold)
    if not p and not g:
        return 1.0
    if not p or not g:
        return 0.0
    prev = [0] * (len(g) + 1)
    for x in p:
        cur = [0]
        for j, y in enumerate(g, 1):
            cur.append(prev[j - 1] + 1 if x == y else max(prev[j], cur[j - 1]))
        prev = cur
    lcs = prev[len(g)]
    prec, rec = lcs / len(p), lcs / len(g)
    if prec + rec == 0:
        return 0.0
    return 2 * prec * rec / (prec + rec)


@dataclass
class EvalRecord:
    task_id: str
    gold: list
    predictions: list
    statuses: list = None
    runnable_gold: bool = False
    first_assertion: bool = False

    def to_record(self):
        rec = {
            "task_id": self.task_id,
            "gold": list(self.gold),
            "predictions": [list(p) for p in self.predictions],
            "runnable_gold": self.runnable_gold,
            "first_assertion": self.first_assertion,
        }
        if self.statuses is not None:
            rec["statuses"] = list(self.statuses)
        return rec

    @classmethod
    def from_record(cls, rec):
        return cls(
            task_id=rec["task_id"],
            gold=list(rec["gold"]),
            predictions=[list(p) for p in rec["predictions"]],
            statuses=list(rec["statuses"]) if "statuses" in rec else None,
            runnable_gold=bool(rec.get("runnable_gold")),
            first_assertion=bool(rec.get("first_assertion")),
        )


def subset_records(records, subset):
    if subset == "all":
        return list(records)
    if subset == "runnable":
        return [r for r in records if r.runnable_gold]
    if subset == "oracle":
        return [r for r in records if r.first_assertion]
    if subset == "oracle-runnable":
        return [r for r in records if r.runnable_gold and r.first_assertion]
    raise ValueError(f"unknown subset {subset!r}")


def pct_compile_run(records):
    """(%Compile, %Run) over top-1 outcomes, two decimals."""
    records = list(records)
    if not records:
        raise EmptySubset("no records with outcomes")
    top = []
    for r in records:
        if not r.statuses:
            raise MissingOutcome(r.task_id)
        top.append(r.statuses[0])
    n = len(top)
    compilable = sum(1 for s in top if s != NOT_COMPILABLE)
    runnable = sum(1 for s in top if s == RUNNABLE)
    return round(100.0 * compilable / n, 2), round(100.0 * runnable / n, 2)


@dataclass
class BootstrapResult:
    significant: bool
    low: float
    high: float
    mean_diff: float


def _percentile(sorted_vals, q):
    pos = q * (len(sorted_vals) - 1)
    lo = int(math.floor(pos))
    hi = min(lo + 1, len(sorted_vals) - 1)
    frac = pos - lo
    return sorted_vals[lo] * (1 - frac) + sorted_vals[hi] * frac


def bootstrap_test(per_example_a, per_example_b, resamples=1000, confidence=0.95,
                   seed=0):
    """Paired bootstrap over example indices.

    Each resample draws len(a) indices via random.Random(seed).randrange, so an
    independent resampler with the same draw order reproduces the decision.
    Significant iff the confidence interval of the mean difference excludes 0.
    """
    a, b = list(per_example_a), list(per_example_b)
    if len(a) != len(b):
        raise LengthMismatch(f"{len(a)} != {len(b)}")
    if not a:
        raise EmptySubset("no paired examples")
    diffs = [x - y for x, y in zip(a, b)]
    n = len(diffs)
    rng = random.Random(seed)
    means = sorted(
        sum(diffs[rng.randrange(n)] for _ in range(n)) / n for _ in range(resamples)
    )
    alpha = (1.0 - confidence) / 2.0
    low = _percentile(means, alpha)
    high = _percentile(means, 1.0 - alpha)
    return BootstrapResult(
        significant=low > 0 or high < 0,
        low=low,
        high=high,
        mean_diff=sum(diffs) / n,
    )


@dataclass
class EvalReport:
    subset: str
    count: int
    aggregates: dict
    per_example: dict
    task_ids: list = field(default_factory=list)

    def to_record(self):
        return {
            "subset": self.subset,
            "count": self.count,
            "aggregates": self.aggregates,
            "per_example": self.per_example,
            "task_ids": self.task_ids,
        }

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_record(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    def format_table(self, scale=False):
        """Human-readable table; scale=True reports similarities x100."""
        lines = [f"subset: {self.subset}  (n={self.count})"]
        for name in METRICS + ("%Compile", "%Run"):
            value = self.aggregates.get(name)
            if value is None:
                continue
            if scale and name in ("BLEU", "CodeBLEU", "EditSim", "ROUGE-L"):
                value, suffix = round(value * 100, 2), " (x100)"
            else:
                suffix = ""
            lines.append(f"  {name:<9} {value:>8}{suffix}")
        return "\n".join(lines)


def evaluate(records, subset="all", k=10):
    """EvalReport over the named subset; percentages to two decimals."""
    sel = subset_records(records, subset)
    if not sel:
        raise EmptySubset(subset)
    per = {name: [] for name in METRICS}
    for r in sel:
        top = r.predictions[0] if r.predictions else []
        per["XM"].append(float(exact_match(top, r.gold)))
        per["Acc@10"].append(float(acc_at_k(r.predictions, r.gold, k)))
        per["BLEU"].append(bleu(top, r.gold))
        per["CodeBLEU"].append(codebleu(top, r.gold))
        per["EditSim"].append(edit_similarity(top, r.gold))
        per["ROUGE-L"].append(rouge_l_f1(top, r.gold))
    n = len(sel)
    aggregates = {
        "XM": round(100.0 * sum(per["XM"]) / n, 2),
        "Acc@10": round(100.0 * sum(per["Acc@10"]) / n, 2),
        "BLEU": round(sum(per["BLEU"]) / n, 4),
        "CodeBLEU": round(sum(per["CodeBLEU"]) / n, 4),
        "EditSim": round(sum(per["EditSim"]) / n, 4),
        "ROUGE-L": round(sum(per["ROUGE-L"]) / n, 4),
    }
    if all(r.statuses for r in sel):
        aggregates["%Compile"], aggregates["%Run"] = pct_compile_run(sel)
    return EvalReport(
        subset=subset,
        count=n,
        aggregates=aggregates,
        per_example=per,
        task_ids=[r.task_id for r in sel],
    )


def compare_reports(report_a, report_b, metric, resamples=1000, confidence=0.95,
                    seed=0):
    """Bootstrap significance of report_a vs report_b on one metric."""
    if report_a.task_ids != report_b.task_ids:
        raise LengthMismatch("reports cover different task sets")
    return bootstrap_test(
        report_a.per_example[metric], report_b.per_example[metric],
        resamples=resamples, confidence=confidence, seed=seed,
    )
