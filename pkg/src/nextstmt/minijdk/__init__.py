"""Bundled Java-subset toolchain: compiler, interpreter, and CLI.

Provides a javac/java-compatible fallback so bytecode-level features work in
environments without a JDK.  The compiler emits standard classfiles; the
runtime interprets them with built-in platform and JUnit 4 support.
"""

from .compiler import Classpath, CompileError, compile_sources
from .runtime import JArray, JObject, JThrow, Machine, SysExit, VMError

__all__ = [
    "Classpath",
    "CompileError",
    "compile_sources",
    "JArray",
    "JObject",
    "JThrow",
    "Machine",
    "SysExit",
    "VMError",
]
