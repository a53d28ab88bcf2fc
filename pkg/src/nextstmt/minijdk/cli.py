"""Command-line front end mirroring the javac/java launcher contract.

Usage:
    python -m nextstmt.minijdk.cli javac [-d OUTDIR] [-cp PATH] SOURCE...
    python -m nextstmt.minijdk.cli java [-cp PATH] MAINCLASS [ARG...]

Exit codes follow the JDK tools: javac exits 1 on compile errors; java exits
with System.exit status, 1 on an uncaught exception, 2 on launcher misuse.
"""

import os
import sys

from .compiler import CompileError, compile_sources
from .runtime import Machine, VMError


def _split_path(value):
    return [p for p in value.split(os.pathsep) if p]


def _run_javac(argv):
    out_dir = "."
    classpath = []
    sources = []
    i = 0
    while i < len(argv):
        a = argv[i]
        if a == "-d":
            i += 1
            out_dir = argv[i]
        elif a in ("-cp", "-classpath", "--class-path"):
            i += 1
            classpath.extend(_split_path(argv[i]))
        elif a == "-version":
            sys.stderr.write("javac 8.0 (miniature)\n")
            return 0
        elif a.startswith("-"):
            sys.stderr.write(f"javac: invalid flag: {a}\n")
            return 2
        else:
            sources.append(a)
        i += 1
    if not sources:
        sys.stderr.write("javac: no source files\n")
        return 2
    try:
        compile_sources(sources, classpath, out_dir)
    except CompileError as e:
        sys.stderr.write(str(e) + "\n")
        sys.stderr.write("1 error\n")
        return 1
    except FileNotFoundError as e:
        sys.stderr.write(f"javac: file not found: {e.filename}\n")
        return 2
    return 0


def _run_java(argv):
    classpath = ["."]
    i = 0
    while i < len(argv):
        a = argv[i]
        if a in ("-cp", "-classpath", "--class-path"):
            i += 1
            classpath = _split_path(argv[i])
        elif a == "-version":
            sys.stderr.write('java version "8.0" (miniature)\n')
            return 0
        elif a.startswith("-"):
            sys.stderr.write(f"java: invalid flag: {a}\n")
            return 2
        else:
            main_class = a
            args = argv[i + 1 :]
            machine = Machine(classpath)
            try:
                return machine.run_main(main_class, args)
            except VMError as e:
                sys.stderr.write(f"java: internal error: {e}\n")
                return 2
        i += 1
    sys.stderr.write("java: no main class given\n")
    return 2


def main(argv=None):
    sys.setrecursionlimit(20000)
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv:
        sys.stderr.write("usage: cli (javac|java) [options] ...\n")
        return 2
    tool, rest = argv[0], argv[1:]
    if tool == "javac":
        return _run_javac(rest)
    if tool == "java":
        return _run_java(rest)
    sys.stderr.write(f"unknown tool: {tool}\n")
    return 2


if __name__ == "__main__":
    sys.exit(main())
