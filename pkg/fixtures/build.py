#!/usr/bin/env python3
"""Build the fixture projects and run their tests.

One command does everything:

    python3 build.py

With javac on PATH the projects compile against the shim sources in shim/
and run on the host JVM.  Otherwise the bundled toolchain is used via
"python -m nextstmt.minijdk.cli", which requires the nextstmt package to be
importable; its runtime ships the test framework built in, so the shim is
skipped.  Either way each project's classes land in <project>/classes and
its tests must pass for the build to succeed.
"""

import argparse
import json
import logging
import os
import shutil
import subprocess
import sys
from pathlib import Path

log = logging.getLogger("fixtures")

HERE = Path(__file__).resolve().parent
PROJECTS = HERE / "projects"
SHIM_SRC = HERE / "shim" / "src"
SHIM_CLASSES = HERE / "shim" / "classes"


class BuildError(Exception):
    pass


def pick_toolchain(choice):
    """Return (name, javac argv prefix, java argv prefix)."""
    have_jdk = shutil.which("javac") is not None
    if choice == "jdk" and not have_jdk:
        raise BuildError("toolchain jdk requested but javac is not on PATH")
    if choice == "jdk" or (choice == "auto" and have_jdk):
        return "jdk", ["javac"], ["java"]
    base = [sys.executable, "-m", "nextstmt.minijdk.cli"]
    return "bundled", base + ["javac"], base + ["java"]


def run_tool(argv):
    proc = subprocess.run(argv, stdout=subprocess.PIPE,
                          stderr=subprocess.STDOUT, text=True)
    if proc.returncode != 0:
        raise BuildError(f"{argv[0]} {argv[-1]}: exit {proc.returncode}\n{proc.stdout}")
    return proc.stdout


def compile_shim(javac):
    sources = sorted(str(p) for p in SHIM_SRC.rglob("*.java"))
    if SHIM_CLASSES.exists():
        shutil.rmtree(SHIM_CLASSES)
    run_tool(javac + ["-d", str(SHIM_CLASSES)] + sources)
    log.info("shim: compiled %d sources", len(sources))


def build_project(root, manifest, javac, java, with_shim):
    classes = root / manifest["build"]["classes"]
    if classes.exists():
        shutil.rmtree(classes)
    sources = [str(root / s) for s in manifest["build"]["sources"]]
    for s in sources:
        if not os.path.exists(s):
            raise BuildError(f"{manifest['name']}: missing source {s}")
    if not sources:
        log.info("%s: nothing to compile", manifest["name"])
        return
    cp = [str(SHIM_CLASSES)] if with_shim else []
    cmd = javac + ["-d", str(classes)]
    if cp:
        cmd += ["-cp", os.pathsep.join(cp)]
    run_tool(cmd + sources)
    n = sum(1 for _ in classes.rglob("*.class"))
    log.info("%s: compiled %d classes", manifest["name"], n)


def test_project(root, manifest, java, with_shim):
    spec = manifest["run"]
    if spec is None:
        log.info("%s: no tests to run", manifest["name"])
        return
    cp = [str(root / manifest["build"]["classes"])]
    if with_shim:
        cp.append(str(SHIM_CLASSES))
    base = java + ["-cp", os.pathsep.join(cp)]
    if spec["kind"] == "junit4":
        out = run_tool(base + ["org.junit.runner.JUnitCore"] + spec["classes"])
        n = spec["tests"]
        want = f"OK ({n} test)" if n == 1 else f"OK ({n} tests)"
    elif spec["kind"] == "main":
        out = run_tool(base + [spec["main"]])
        want = spec["expect"]
    else:
        raise BuildError(f"{manifest['name']}: unknown run kind {spec['kind']!r}")
    if want not in out.splitlines():
        raise BuildError(f"{manifest['name']}: expected {want!r} in test output:\n{out}")
    log.info("%s: %s", manifest["name"], want)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--toolchain", choices=("auto", "jdk", "bundled"),
                        default="auto")
    parser.add_argument("--projects", nargs="*", metavar="NAME",
                        help="build only these projects")
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    try:
        name, javac, java = pick_toolchain(args.toolchain)
        log.info("toolchain: %s", name)
        with_shim = name == "jdk"
        if with_shim:
            compile_shim(javac)
        roots = sorted(p for p in PROJECTS.iterdir() if (p / "manifest.json").exists())
        if args.projects:
            roots = [p for p in roots if p.name in args.projects]
            missing = set(args.projects) - {p.name for p in roots}
            if missing:
                raise BuildError(f"unknown projects: {', '.join(sorted(missing))}")
        for root in roots:
            manifest = json.loads((root / "manifest.json").read_text())
            build_project(root, manifest, javac, java, with_shim)
            test_project(root, manifest, java, with_shim)
    except BuildError as e:
        log.error("build failed: %s", e)
        return 1
    log.info("%d projects built, all tests passed", len(roots))
    return 0


if __name__ == "__main__":
    sys.exit(main())
