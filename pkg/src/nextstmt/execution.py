"""Execution-based reranking of candidate statements.

Each candidate is compiled and run inside a synthesized one-class harness in
an isolated working directory, using whatever javac/java pair is discovered.
A bundled miniature toolchain keeps the pipeline usable without a JDK.
"""

import os
import shutil
import subprocess
import sys
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .elements import (
    SETUP_ANNOTATIONS,
    TEARDOWN_ANNOTATIONS,
    TEST_ANNOTATIONS,
    resolved_annotations,
)
from .metrics import (
    COMPILABLE_NOT_RUNNABLE,
    NOT_COMPILABLE,
    RUNNABLE,
    LengthMismatch,
)
from .predictor import CandidateList

RUNNER_JUNIT4 = "junit4-cli"
RUNNER_ADHOC = "adhoc-main"
RUNNER_NONE = "none"

JUNIT4_MAIN = "org.junit.runner.JUnitCore"
_JUNIT4_MARKERS = ("OK (", "FAILURES!!!", "Tests run:", "JUnit version")

_STATUS_RANK = {RUNNABLE: 0, COMPILABLE_NOT_RUNNABLE: 1, NOT_COMPILABLE: 2}


class ToolchainMissing(Exception):
    pass


class MissingSource(Exception):
    pass


@dataclass
class Toolchain:
    javac: list
    java: list
    name: str


def bundled_toolchain():
    """The miniature compiler/runtime shipped with this package."""
    return Toolchain(
        javac=[sys.executable, "-m", "nextstmt.minijdk.cli", "javac"],
        java=[sys.executable, "-m", "nextstmt.minijdk.cli", "java"],
        name="bundled",
    )


def _jdk_at(root):
    javac = os.path.join(root, "bin", "javac")
    java = os.path.join(root, "bin", "java")
    if os.path.isfile(javac) and os.path.isfile(java):
        return Toolchain([javac], [java], name=root)
    return None


def discover_toolchain(path=None):
    """Explicit root, then JAVA_HOME, then PATH, then the bundled fallback."""
    if path:
        tc = _jdk_at(path)
        if tc is None:
            raise ToolchainMissing(f"no javac/java under {path}")
        return tc
    home = os.environ.get("JAVA_HOME")
    if home:
        tc = _jdk_at(home)
        if tc is not None:
            return tc
    javac, java = shutil.which("javac"), shutil.which("java")
    if javac and java:
        return Toolchain([javac], [java], name="system")
    return bundled_toolchain()


@dataclass
class ExecOutcome:
    status: str
    diagnostics: str = ""
    duration: float = 0.0
    runner: str = RUNNER_NONE

    def to_record(self):
        return {
            "status": self.status,
            "diagnostics": self.diagnostics,
            "duration": self.duration,
            "runner": self.runner,
        }

    @classmethod
    def from_record(cls, rec):
        return cls(
            status=rec["status"],
            diagnostics=rec.get("diagnostics", ""),
            duration=rec.get("duration", 0.0),
            runner=rec.get("runner", RUNNER_NONE),
        )


@dataclass
class HarnessSpec:
    source: str
    class_binary: str
    test_method: str
    entry_mode: str  # junit4 | adhoc
    classpath_entries: list = field(default_factory=list)
    timeout: float = 30.0


def render_statement(tokens):
    """Masked STR tokens materialize as the empty string literal."""
    return " ".join('""' if t == "STR" else t for t in tokens)


def _field_decl(fm):
    parts = list(fm.annotations) + list(fm.modifiers) + [fm.type_text, fm.name]
    text = " ".join(parts)
    if fm.has_initializer:
        text += " = " + " ".join(t.text for t in fm.init_tokens)
    return text + ";"


def _hook_calls(entry, model, annotations):
    annotations = frozenset(annotations)
    calls = []
    for mm in model.methods:
        if mm.body is None or mm.is_constructor:
            continue
        if resolved_annotations(entry, mm) & annotations:
            calls.append((mm.name, "static" in mm.modifiers))
    return calls


def synthesize_harness(task, candidate, store, classpath_entries=(),
                       timeout=30.0):
    """One-class harness: signature + prior statements + the candidate.

    Non-test methods and fields of the original test class are copied in
    verbatim; an ad-hoc main calls setup methods, the test, then teardown
    methods in declaration order.
    """
    method = store.methods.get(task.test_id)
    if method is None or method.model is None:
        raise MissingSource(task.test_id)
    entry = store.classes[method.owner]
    if entry.source is None or entry.model is None:
        raise MissingSource(method.owner)
    src, model = entry.source, entry.model

    lines = []
    if src.package:
        lines.append(f"package {src.package};")
    for qual, is_static, is_wildcard in src.imports:
        stat = "static " if is_static else ""
        star = ".*" if is_wildcard else ""
        lines.append(f"import {stat}{qual}{star};")

    header = " ".join(model.modifiers + ["class", model.name])
    if model.extends_name:
        header += f" extends {model.extends_name}"
    if model.implements_names:
        header += " implements " + ", ".join(model.implements_names)
    lines.append(header + " {")

    for fm in model.fields:
        lines.append("    " + _field_decl(fm))

    for mm in model.methods:
        if mm.body is None and not mm.is_constructor:
            continue
        if resolved_annotations(entry, mm) & TEST_ANNOTATIONS:
            continue
        if mm.name == "main" and "static" in mm.modifiers:
            continue
        lines.append("    " + mm.raw_text)

    body = [render_statement(s) for s in task.prior()] + [
        render_statement(candidate)]
    lines.append("    " + render_statement(task.sign) + " {")
    for stmt in body:
        lines.append("        " + stmt)
    lines.append("    }")

    is_static_test = "static" in method.model.modifiers
    before = _hook_calls(entry, model, SETUP_ANNOTATIONS)
    after = _hook_calls(entry, model, TEARDOWN_ANNOTATIONS)
    lines.append("    public static void main(String[] args) throws Exception {")
    for name, is_static in before:
        if is_static:
            lines.append(f"        {name}();")
    if not is_static_test:
        lines.append(f"        {model.name} t = new {model.name}();")
    for name, is_static in before:
        if not is_static:
            lines.append(f"        t.{name}();")
    receiver = "" if is_static_test else "t."
    lines.append(f"        {receiver}{method.name}();")
    for name, is_static in after:
        if not is_static:
            lines.append(f"        t.{name}();")
    for name, is_static in after:
        if is_static:
            lines.append(f"        {name}();")
    lines.append("    }")
    lines.append("}")

    uses_junit4 = any(
        qual == "org.junit" or qual.startswith("org.junit.")
        for qual, _s, _w in src.imports
        if not qual.startswith("org.junit.jupiter")
    )
    binary = (src.package.replace(".", "/") + "/" if src.package else "") + model.name
    return HarnessSpec(
        source="\n".join(lines) + "\n",
        class_binary=binary,
        test_method=method.name,
        entry_mode="junit4" if uses_junit4 else "adhoc",
        classpath_entries=list(classpath_entries),
        timeout=timeout,
    )


def write_classpath(store, dest, include=()):
    """Compiled non-test and dependency classes as a directory tree."""
    include = set(include)
    for name, entry in store.classes.items():
        if entry.kind == "test" and name not in include:
            continue
        data = store.class_bytes.get(name)
        if data is None:
            continue
        path = os.path.join(dest, *f"{name}.class".split("/"))
        os.makedirs(os.path.dirname(path), exist_ok=True)
        with open(path, "wb") as fh:
            fh.write(data)
    return dest


def _test_ancestors(store, owner):
    """Test-kind superclasses of the entry class, needed on the classpath."""
    out = []
    cur = store.hierarchy.get(owner)
    seen = {owner}
    while cur and cur not in seen:
        seen.add(cur)
        entry = store.classes.get(cur)
        if entry is not None and entry.kind == "test":
            out.append(cur)
        cur = store.hierarchy.get(cur)
    return out


def _run(cmd, timeout):
    try:
        proc = subprocess.run(
            cmd, stdout=subprocess.PIPE, stderr=subprocess.STDOUT,
            text=True, timeout=timeout,
        )
        return proc.returncode, proc.stdout, False
    except subprocess.TimeoutExpired as e:
        out = e.stdout if isinstance(e.stdout, str) else ""
        return -1, out, True


def evaluate_candidate(spec, toolchain):
    """Compile and run one harness; all artifacts stay in a scratch directory."""
    started = time.monotonic()
    work = tempfile.mkdtemp(prefix="nextstmt-exec-")
    diagnostics = []
    try:
        src_path = os.path.join(work, spec.class_binary.split("/")[-1] + ".java")
        with open(src_path, "w") as fh:
            fh.write(spec.source)
        out_dir = os.path.join(work, "classes")
        os.makedirs(out_dir)
        cp = os.pathsep.join(spec.classpath_entries)

        cmd = list(toolchain.javac)
        if cp:
            cmd += ["-cp", cp]
        cmd += ["-d", out_dir, src_path]
        rc, out, timed_out = _run(cmd, spec.timeout)
        diagnostics.append("javac: " + out.strip())
        if timed_out:
            diagnostics.append(f"javac: timeout after {spec.timeout}s")
        if rc != 0:
            return ExecOutcome(
                status=NOT_COMPILABLE,
                diagnostics="\n".join(diagnostics),
                duration=time.monotonic() - started,
                runner=RUNNER_NONE,
            )

        run_cp = os.pathsep.join([out_dir] + list(spec.classpath_entries))
        dotted = spec.class_binary.replace("/", ".")
        if spec.entry_mode == "junit4":
            cmd = list(toolchain.java) + ["-cp", run_cp, JUNIT4_MAIN, dotted]
            rc, out, timed_out = _run(cmd, spec.timeout)
            diagnostics.append("junit4-cli: " + out.strip())
            if timed_out:
                diagnostics.append(f"junit4-cli: timeout after {spec.timeout}s")
                return ExecOutcome(
                    status=COMPILABLE_NOT_RUNNABLE,
                    diagnostics="\n".join(diagnostics),
                    duration=time.monotonic() - started,
                    runner=RUNNER_JUNIT4,
                )
            if any(m in out for m in _JUNIT4_MARKERS):
                return ExecOutcome(
                    status=RUNNABLE if rc == 0 else COMPILABLE_NOT_RUNNABLE,
                    diagnostics="\n".join(diagnostics),
                    duration=time.monotonic() - started,
                    runner=RUNNER_JUNIT4,
                )
            diagnostics.append("junit4-cli: runner unavailable, falling back")

        cmd = list(toolchain.java) + ["-cp", run_cp, dotted]
        rc, out, timed_out = _run(cmd, spec.timeout)
        diagnostics.append("adhoc-main: " + out.strip())
        if timed_out:
            diagnostics.append(f"adhoc-main: timeout after {spec.timeout}s")
            rc = -1
        return ExecOutcome(
            status=RUNNABLE if rc == 0 else COMPILABLE_NOT_RUNNABLE,
            diagnostics="\n".join(diagnostics),
            duration=time.monotonic() - started,
            runner=RUNNER_ADHOC,
        )
    finally:
        shutil.rmtree(work, ignore_errors=True)


def evaluate_task_candidates(task, candidates, store, toolchain=None,
                             timeout=30.0, workers=1):
    """ExecOutcome per candidate, evaluated in isolated scratch directories."""
    toolchain = toolchain or discover_toolchain()
    owner = store.methods[task.test_id].owner
    cp_dir = tempfile.mkdtemp(prefix="nextstmt-cp-")
    try:
        write_classpath(store, cp_dir, include=_test_ancestors(store, owner))
        specs = [
            synthesize_harness(task, tokens, store, classpath_entries=[cp_dir],
                               timeout=timeout)
            for tokens, _score in candidates.candidates
        ]
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                return list(pool.map(
                    lambda s: evaluate_candidate(s, toolchain), specs))
        return [evaluate_candidate(spec, toolchain) for spec in specs]
    finally:
        shutil.rmtree(cp_dir, ignore_errors=True)


def _status_of(outcome):
    return outcome if isinstance(outcome, str) else outcome.status


def rerank_order(candidates, outcomes):
    """Permutation of candidate indices: status class, then original score."""
    if len(candidates.candidates) != len(outcomes):
        raise LengthMismatch(
            f"{len(candidates.candidates)} candidates, {len(outcomes)} outcomes")
    keyed = [
        (_STATUS_RANK[_status_of(o)], -c[1], i)
        for i, (c, o) in enumerate(zip(candidates.candidates, outcomes))
    ]
    return [i for _r, _s, i in sorted(keyed, key=lambda k: (k[0], k[1]))]


def rerank(candidates, outcomes):
    """Runnable > CompilableNotRunnable > NotCompilable, stable by score."""
    order = rerank_order(candidates, outcomes)
    return CandidateList([candidates.candidates[i] for i in order])
