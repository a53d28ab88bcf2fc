"""Compiler for a small Java subset, emitting standard classfiles.

Supported: top-level classes with fields, constructors, methods, inheritance,
annotations; statements (declarations, assignments, calls, return, throw,
if/else, while, for, blocks); int/long/double/boolean/char/String and
reference types; arrays; string concatenation.  Emitted classfiles use major
version 49 (pre-StackMapTable) so stock JVMs accept them unverified-frames.

Unsupported constructs fail with a javac-style "<file>:<line>: error:" line.
"""

from __future__ import annotations

import os
import zipfile
from dataclasses import dataclass, field

from ..jclass import parse_classfile
from ..jclass.model import (
    ACC_ABSTRACT,
    ACC_FINAL,
    ACC_INTERFACE,
    ACC_PRIVATE,
    ACC_PROTECTED,
    ACC_PUBLIC,
    ACC_STATIC,
    ACC_SUPER,
)
from ..jclass.writer import ClassFileBuilder, CodeAssembler, Label, write_classfile
from ..jsource import parse_source, split_statements
from . import stdlib

PRIMITIVE_DESCS = {
    "int": "I", "long": "J", "double": "D", "boolean": "Z",
    "char": "C", "void": "V",
}
UNSUPPORTED_PRIMS = {"byte", "short", "float"}
NULL_DESC = "<null>"
CLASSFILE_MAJOR = 49

_WIDE = ("J", "D")


def _is_ref(desc):
    return desc == NULL_DESC or desc.startswith(("L", "["))


def _ref_binary(desc):
    return desc[1:-1] if desc.startswith("L") else None


def _width(desc):
    return 2 if desc in _WIDE else 1


class CompileError(Exception):
    def __init__(self, path, line, message):
        super().__init__(f"{path}:{line}: error: {message}")
        self.path = path
        self.line = line
        self.message = message


# ---------------------------------------------------------------------------
# symbol tables
# ---------------------------------------------------------------------------


@dataclass
class MethodSym:
    name: str
    descriptor: str
    is_static: bool
    is_private: bool = False
    source: object = None  # MethodModel for source classes


@dataclass
class FieldSym:
    name: str
    descriptor: str
    is_static: bool
    init_tokens: tuple = ()
    line: int = 0
    access: int = 0


@dataclass
class ClassSym:
    binary: str
    superclass: str | None
    is_interface: bool = False
    fields: dict = field(default_factory=dict)
    methods: list = field(default_factory=list)
    interfaces: list = field(default_factory=list)
    source: object = None  # ClassModel when compiled from source
    unit: object = None  # owning _Unit

    def find_methods(self, name):
        return [m for m in self.methods if m.name == name]


class Classpath:
    """Directories and jar/zip archives searched for prebuilt classes."""

    def __init__(self, entries):
        self.dirs = []
        self.zips = []
        for e in entries:
            if not e:
                continue
            if os.path.isdir(e):
                self.dirs.append(e)
            elif os.path.isfile(e) and e.endswith((".jar", ".zip")):
                self.zips.append(zipfile.ZipFile(e))

    def read(self, binary):
        rel = binary + ".class"
        for d in self.dirs:
            p = os.path.join(d, *rel.split("/"))
            if os.path.isfile(p):
                with open(p, "rb") as fh:
                    return fh.read()
        for z in self.zips:
            try:
                return z.read(rel)
            except KeyError:
                continue
        return None

    def contains(self, binary):
        rel = binary + ".class"
        for d in self.dirs:
            if os.path.isfile(os.path.join(d, *rel.split("/"))):
                return True
        return any(rel in z.namelist() for z in self.zips)


class World:
    """Resolution across source classes, classpath classes, and built-ins."""

    def __init__(self, classpath=None):
        self.source = {}  # binary -> ClassSym
        self.classpath = classpath or Classpath([])
        self._cp_cache = {}

    def add_source(self, sym):
        self.source[sym.binary] = sym

    def lookup(self, binary):
        if binary in self.source:
            return self.source[binary]
        if binary in self._cp_cache:
            return self._cp_cache[binary]
        data = self.classpath.read(binary)
        if data is not None:
            sym = _sym_from_classfile(parse_classfile(data))
            self._cp_cache[binary] = sym
            return sym
        if stdlib.is_known(binary):
            sym = _sym_from_stdlib(binary)
            self._cp_cache[binary] = sym
            return sym
        return None

    def exists(self, binary):
        return self.lookup(binary) is not None

    def superclass(self, binary):
        sym = self.lookup(binary)
        return sym.superclass if sym else None

    def ancestry(self, binary):
        chain = []
        cur = binary
        seen = set()
        while cur and cur not in seen:
            chain.append(cur)
            seen.add(cur)
            cur = self.superclass(cur)
        return chain

    def interfaces_of(self, binary):
        sym = self.lookup(binary)
        if sym is not None and sym.interfaces:
            return list(sym.interfaces)
        return list(stdlib.interfaces_of(binary))

    def assignable(self, src, dst):
        if src == dst:
            return True
        if src == NULL_DESC:
            return _is_ref(dst)
        if dst == NULL_DESC:
            return False
        if not _is_ref(src) and not _is_ref(dst):
            return (src, dst) in {
                ("I", "J"), ("I", "D"), ("J", "D"),
                ("C", "I"), ("C", "J"), ("C", "D"),
            }
        if not _is_ref(src) or not _is_ref(dst):
            return False
        if dst == "Ljava/lang/Object;":
            return True
        if src.startswith("[") and dst.startswith("["):
            return self.assignable(src[1:], dst[1:])
        if src.startswith("[") or dst.startswith("["):
            return False
        target = _ref_binary(dst)
        work = [_ref_binary(src)]
        seen = set()
        while work:
            cur = work.pop()
            if cur is None or cur in seen:
                continue
            if cur == target:
                return True
            seen.add(cur)
            sup = self.superclass(cur)
            if sup:
                work.append(sup)
            work.extend(self.interfaces_of(cur))
        return False

    def find_field(self, binary, name):
        for cls in self.ancestry(binary):
            sym = self.lookup(cls)
            if sym and name in sym.fields:
                f = sym.fields[name]
                return cls, f.descriptor, f.is_static
        return None

    def find_methods(self, binary, name):
        out = []
        for cls in self.ancestry(binary) or [binary]:
            sym = self.lookup(cls)
            if sym is None:
                continue
            for m in sym.find_methods(name):
                out.append((cls, m))
        if not out:
            for iface in self.interfaces_of(binary):
                for cls, m in self.find_methods(iface, name):
                    out.append((cls, m))
        return out

    def is_interface(self, binary):
        sym = self.lookup(binary)
        return bool(sym and sym.is_interface)


def _sym_from_classfile(cf):
    sym = ClassSym(cf.binary_name, cf.superclass, bool(cf.access_flags & ACC_INTERFACE))
    sym.interfaces = list(cf.interfaces)
    for f in cf.fields:
        sym.fields[f.name] = FieldSym(f.name, f.descriptor, f.is_static)
    for m in cf.methods:
        sym.methods.append(
            MethodSym(m.name, m.descriptor, m.is_static, bool(m.access_flags & ACC_PRIVATE))
        )
    return sym


def _sym_from_stdlib(binary):
    sym = ClassSym(binary, stdlib.superclass(binary), binary in stdlib.INTERFACE_TYPES)
    sym.interfaces = list(stdlib.interfaces_of(binary))
    for name, (desc, static) in stdlib.fields_of(binary).items():
        sym.fields[name] = FieldSym(name, desc, static)
    for name, desc, static in stdlib.methods_of(binary):
        sym.methods.append(MethodSym(name, desc, static))
    return sym


# ---------------------------------------------------------------------------
# per-compilation-unit name resolution
# ---------------------------------------------------------------------------


class _Unit:
    def __init__(self, source_model, world, path):
        self.sm = source_model
        self.world = world
        self.path = path
        self.package = source_model.package.replace(".", "/") if source_model.package else ""
        self.explicit = {}
        self.wildcards = []
        self.static_explicit = {}
        self.static_wild = []
        for qual, is_static, is_wild in source_model.imports:
            binary = qual.replace(".", "/")
            if is_static and is_wild:
                self.static_wild.append(binary)
            elif is_static:
                cls, member = binary.rsplit("/", 1)
                self.static_explicit[member] = cls
            elif is_wild:
                self.wildcards.append(binary)
            else:
                self.explicit[binary.rsplit("/", 1)[-1]] = binary

    def resolve_class(self, text):
        """Type name (simple or qualified, dots) -> binary name, or None."""
        name = text.strip()
        if "." in name:
            binary = name.replace(".", "/")
            return binary if self.world.exists(binary) else None
        if name in self.explicit:
            return self.explicit[name]
        if self.package:
            local = f"{self.package}/{name}"
            if self.world.exists(local):
                return local
        if name in stdlib.JAVA_LANG_DEFAULTS:
            return stdlib.JAVA_LANG_DEFAULTS[name]
        for pkg in self.wildcards:
            cand = f"{pkg}/{name}"
            if self.world.exists(cand):
                return cand
        if self.world.exists(name):  # default package
            return name
        return None

    def resolve_type_text(self, text, line):
        t = text.strip()
        dims = 0
        while t.endswith("[]"):
            dims += 1
            t = t[:-2].strip()
        if "<" in t:
            t = t[: t.index("<")].strip()  # erase generics
        if t in UNSUPPORTED_PRIMS:
            raise CompileError(self.path, line, f"unsupported primitive type: {t}")
        if t in PRIMITIVE_DESCS:
            base = PRIMITIVE_DESCS[t]
            if base == "V" and dims:
                raise CompileError(self.path, line, "array of void")
        else:
            binary = self.resolve_class(t)
            if binary is None:
                raise CompileError(self.path, line, f"cannot find symbol: class {t}")
            base = f"L{binary};"
        return "[" * dims + base

    def resolve_annotation(self, raw, line):
        name = raw.lstrip("@").split("(")[0].strip()
        binary = self.resolve_class(name)
        if binary is None:
            raise CompileError(self.path, line, f"cannot find annotation: {name}")
        return f"L{binary};"


# ---------------------------------------------------------------------------
# expression parsing (token stream -> small AST)
# ---------------------------------------------------------------------------


class _Cur:
    def __init__(self, tokens, path):
        self.toks = list(tokens)
        self.i = 0
        self.path = path

    def peek(self, off=0):
        j = self.i + off
        return self.toks[j] if j < len(self.toks) else None

    def at(self, text, off=0):
        t = self.peek(off)
        return t is not None and t.text == text

    def adv(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, text):
        t = self.peek()
        if t is None or t.text != text:
            line = t.line if t else self.line()
            raise CompileError(self.path, line, f"expected {text!r}")
        return self.adv()

    def expect_ident(self):
        t = self.peek()
        if t is None or t.kind != "identifier":
            line = t.line if t else self.line()
            raise CompileError(self.path, line, "expected identifier")
        return self.adv()

    def line(self):
        if self.i < len(self.toks):
            return self.toks[self.i].line
        return self.toks[-1].line if self.toks else 0

    def done(self):
        return self.i >= len(self.toks)


_ESCAPES = {"n": "\n", "t": "\t", "r": "\r", "b": "\b", "f": "\f",
            "0": "\0", "\\": "\\", "'": "'", '"': '"'}


def _decode_literal_text(raw, path, line):
    out = []
    i = 0
    while i < len(raw):
        c = raw[i]
        if c != "\\":
            out.append(c)
            i += 1
            continue
        nxt = raw[i + 1]
        if nxt == "u":
            out.append(chr(int(raw[i + 2 : i + 6], 16)))
            i += 6
        elif nxt in _ESCAPES:
            out.append(_ESCAPES[nxt])
            i += 2
        else:
            raise CompileError(path, line, f"unsupported escape \\{nxt}")
    return "".join(out)


class _ExprParser:
    def __init__(self, cur, unit):
        self.c = cur
        self.unit = unit
        self.path = cur.path

    def parse(self):
        return self._or()

    def _or(self):
        node = self._and()
        while self.c.at("||"):
            line = self.c.adv().line
            node = ("bin", "||", node, self._and(), line)
        return node

    def _and(self):
        node = self._eq()
        while self.c.at("&&"):
            line = self.c.adv().line
            node = ("bin", "&&", node, self._eq(), line)
        return node

    def _eq(self):
        node = self._rel()
        while self.c.at("==") or self.c.at("!="):
            op = self.c.adv()
            node = ("bin", op.text, node, self._rel(), op.line)
        return node

    def _rel(self):
        node = self._add()
        while self.c.peek() and self.c.peek().text in ("<", "<=", ">", ">=", "instanceof"):
            op = self.c.adv()
            if op.text == "instanceof":
                node = ("instanceof", node, self._type_name(), op.line)
            else:
                node = ("bin", op.text, node, self._add(), op.line)
        return node

    def _type_name(self):
        parts = [self.c.expect_ident().text]
        while self.c.at("."):
            self.c.adv()
            parts.append(self.c.expect_ident().text)
        name = ".".join(parts)
        while self.c.at("[") and self.c.at("]", 1):
            self.c.adv()
            self.c.adv()
            name += "[]"
        return name

    def _add(self):
        node = self._mul()
        while self.c.peek() and self.c.peek().text in ("+", "-"):
            op = self.c.adv()
            node = ("bin", op.text, node, self._mul(), op.line)
        return node

    def _mul(self):
        node = self._unary()
        while self.c.peek() and self.c.peek().text in ("*", "/", "%"):
            op = self.c.adv()
            node = ("bin", op.text, node, self._unary(), op.line)
        return node

    def _unary(self):
        t = self.c.peek()
        if t is None:
            raise CompileError(self.path, self.c.line(), "missing expression")
        if t.text in ("-", "!"):
            self.c.adv()
            return ("un", t.text, self._unary(), t.line)
        if t.text == "+":
            self.c.adv()
            return self._unary()
        cast = self._try_cast()
        if cast is not None:
            return cast
        return self._postfix(self._primary())

    def _try_cast(self):
        c = self.c
        if not c.at("("):
            return None
        j = c.i + 1
        toks = c.toks
        if j >= len(toks):
            return None
        first = toks[j]
        is_prim = first.kind == "keyword" and first.text in PRIMITIVE_DESCS
        if not is_prim and first.kind != "identifier":
            return None
        parts = [first.text]
        j += 1
        while j + 1 < len(toks) and toks[j].text == "." and toks[j + 1].kind == "identifier":
            parts.append(toks[j + 1].text)
            j += 2
        dims = 0
        while j + 1 < len(toks) and toks[j].text == "[" and toks[j + 1].text == "]":
            dims += 1
            j += 2
        if j >= len(toks) or toks[j].text != ")":
            return None
        after = toks[j + 1] if j + 1 < len(toks) else None
        if after is None:
            return None
        starts_operand = (
            after.kind in ("identifier", "literal-string", "literal-char", "literal-number")
            or after.text in ("(", "!", "new", "this")
            or (after.kind == "keyword" and after.text in ("true", "false", "null"))
        )
        if not starts_operand:
            return None
        type_text = ".".join(parts) + "[]" * dims
        if not is_prim and self.unit.resolve_class(".".join(parts)) is None:
            return None
        line = first.line
        c.i = j + 1
        return ("cast", type_text, self._unary(), line)

    def _postfix(self, node):
        while True:
            if self.c.at("."):
                self.c.adv()
                name = self.c.adv()
                if self.c.at("("):
                    args = self._args()
                    node = ("call", node, name.text, args, name.line)
                else:
                    node = ("field", node, name.text, name.line)
            elif self.c.at("["):
                line = self.c.adv().line
                idx = self.parse()
                self.c.expect("]")
                node = ("index", node, idx, line)
            else:
                return node

    def _args(self):
        self.c.expect("(")
        args = []
        while not self.c.at(")"):
            args.append(self.parse())
            if self.c.at(","):
                self.c.adv()
        self.c.expect(")")
        return args

    def _primary(self):
        t = self.c.peek()
        if t is None:
            raise CompileError(self.path, self.c.line(), "missing expression")
        if t.kind == "literal-number":
            self.c.adv()
            return self._number(t)
        if t.kind == "literal-string":
            self.c.adv()
            return ("str", _decode_literal_text(t.text[1:-1], self.path, t.line), t.line)
        if t.kind == "literal-char":
            self.c.adv()
            decoded = _decode_literal_text(t.text[1:-1], self.path, t.line)
            if len(decoded) != 1:
                raise CompileError(self.path, t.line, "bad char literal")
            return ("char", ord(decoded), t.line)
        if t.kind == "keyword":
            if t.text in ("true", "false"):
                self.c.adv()
                return ("bool", t.text == "true", t.line)
            if t.text == "null":
                self.c.adv()
                return ("null", t.line)
            if t.text == "this":
                self.c.adv()
                return ("this", t.line)
            if t.text == "new":
                return self._new()
            raise CompileError(self.path, t.line, f"unsupported keyword {t.text!r} in expression")
        if t.text == "(":
            self.c.adv()
            node = self.parse()
            self.c.expect(")")
            return node
        if t.kind == "identifier":
            self.c.adv()
            if self.c.at("("):
                args = self._args()
                return ("call", None, t.text, args, t.line)
            return ("name", t.text, t.line)
        raise CompileError(self.path, t.line, f"unexpected token {t.text!r}")

    def _new(self):
        kw = self.c.expect("new")
        parts = [self.c.adv().text]
        while self.c.at(".") and self.c.peek(1) and self.c.peek(1).kind == "identifier":
            self.c.adv()
            parts.append(self.c.adv().text)
        type_text = ".".join(parts)
        if self.c.at("<"):  # erase type arguments, including diamond
            depth = 0
            while not self.c.done():
                txt = self.c.adv().text
                if txt == "<":
                    depth += 1
                elif txt in (">", ">>", ">>>"):
                    depth -= len(txt)
                if depth <= 0:
                    break
        if self.c.at("("):
            args = self._args()
            return ("new", type_text, args, kw.line)
        if self.c.at("["):
            self.c.adv()
            dim = self.parse()
            self.c.expect("]")
            if self.c.at("["):
                raise CompileError(self.path, kw.line, "multi-dimensional arrays unsupported")
            return ("newarr", type_text, dim, kw.line)
        raise CompileError(self.path, kw.line, "expected ( or [ after new")

    def _number(self, t):
        text = t.text.replace("_", "")
        line = t.line
        if text[-1] in "fF":
            raise CompileError(self.path, line, "float literals unsupported, use double")
        is_long = text[-1] in "lL"
        if is_long:
            text = text[:-1]
        if text[-1] in "dD" and not text[:-1].lower().startswith("0x"):
            return ("double", float(text[:-1]), line)
        lowered = text.lower()
        if lowered.startswith("0x"):
            v = int(text, 16)
        elif lowered.startswith("0b"):
            v = int(text, 2)
        elif "." in text or "e" in lowered:
            return ("double", float(text), line)
        else:
            v = int(text)
        if is_long:
            return ("long", v, line)
        return ("int", v, line)


# ---------------------------------------------------------------------------
# code generation
# ---------------------------------------------------------------------------


class _Scope:
    def __init__(self, parent=None):
        self.vars = {}
        self.parent = parent

    def find(self, name):
        s = self
        while s is not None:
            if name in s.vars:
                return s.vars[name]
            s = s.parent
        return None


class _Gen:
    def __init__(self, unit, cls, method_sym, asm, builder):
        self.unit = unit
        self.world = unit.world
        self.cls = cls
        self.msym = method_sym
        self.asm = asm
        self.b = builder
        self.path = unit.path
        self.scope = _Scope()
        self.next_slot = 0
        self.ret_desc = _return_desc(method_sym.descriptor)

    # -- slots ---------------------------------------------------------

    def alloc(self, name, desc, declare=True):
        slot = self.next_slot
        self.next_slot += _width(desc)
        self.asm.reserve(self.next_slot)
        self.scope.vars[name] = (slot, desc)
        if declare:
            self.asm.declare_local(slot, name, desc if desc != NULL_DESC else "Ljava/lang/Object;")
        return slot

    def push_scope(self):
        self.scope = _Scope(self.scope)

    def pop_scope(self):
        self.scope = self.scope.parent

    # -- statements ----------------------------------------------------

    def compile_body(self, statements):
        for s in statements:
            self.statement(s)

    def statement(self, stmt):
        toks = list(stmt.tokens)
        if not toks:
            return
        self.asm.line(toks[0].line)
        first = toks[0]
        if stmt.has_control_flow or (first.kind == "keyword" and first.text in ("if", "while", "for")):
            self.control(toks)
            return
        if first.text == "{":
            self.block(toks[1:-1])
            return
        if first.kind == "keyword" and first.text == "return":
            self.return_stmt(toks)
            return
        if first.kind == "keyword" and first.text == "throw":
            cur = _Cur(toks[1:-1], self.path)
            node = _ExprParser(cur, self.unit).parse()
            self._expect_consumed(cur)
            desc = self.expr(node)
            if not _is_ref(desc):
                raise CompileError(self.path, first.line, "throw of non-reference")
            self.asm.emit("athrow")
            return
        if first.text == ";":
            return
        self.decl_or_expr(toks)

    def _expect_consumed(self, cur):
        if not cur.done():
            t = cur.peek()
            raise CompileError(self.path, t.line, f"unexpected token {t.text!r}")

    def block(self, toks):
        self.push_scope()
        for s in split_statements(toks):
            self.statement(s)
        self.pop_scope()

    def decl_or_expr(self, toks):
        body = toks[:-1] if toks and toks[-1].text == ";" else list(toks)
        if not body:
            return
        if self._try_declaration(body):
            return
        self.expr_statement(body)

    def expr_statement(self, body):
        if body[0].text in ("++", "--"):
            op_tok = body[0]
            cur = _Cur(body[1:], self.path)
            node = _ExprParser(cur, self.unit).parse()
            self._expect_consumed(cur)
            self._apply_incdec(node, op_tok.text, op_tok.line)
            return
        cur = _Cur(body, self.path)
        node = _ExprParser(cur, self.unit).parse()
        t = cur.peek()
        if t is not None and t.text == "=":
            cur.adv()
            rhs = _ExprParser(cur, self.unit).parse()
            self._expect_consumed(cur)
            self.assign(node, rhs)
            return
        if t is not None and t.text in _COMPOUND:
            cur.adv()
            rhs = _ExprParser(cur, self.unit).parse()
            self._expect_consumed(cur)
            self.assign(node, ("bin", _COMPOUND[t.text], node, rhs, t.line))
            return
        if t is not None and t.text in ("++", "--"):
            cur.adv()
            self._expect_consumed(cur)
            self._apply_incdec(node, t.text, t.line)
            return
        self._expect_consumed(cur)
        desc = self.expr(node)
        if desc != "V":
            self.asm.emit("pop2" if desc in _WIDE else "pop")

    def _apply_incdec(self, node, op, line):
        one = ("int", 1, line)
        self.assign(node, ("bin", "+" if op == "++" else "-", node, one, line))

    def _try_declaration(self, toks):
        parsed = self._parse_type_prefix(toks)
        if parsed is None:
            return None
        type_text, k = parsed
        if k >= len(toks) or toks[k].kind != "identifier":
            return None
        after = toks[k + 1].text if k + 1 < len(toks) else None
        if after not in ("=", ",", None):
            return None
        desc = self.unit.resolve_type_text(type_text, toks[0].line)
        if desc == "V":
            return None
        cur = _Cur(toks[k:], self.path)
        while True:
            name_tok = cur.adv()
            if cur.at("="):
                cur.adv()
                node = _ExprParser(cur, self.unit).parse()
                src = self.expr(node)
                self.convert(src, desc, name_tok.line)
                slot = self.alloc(name_tok.text, desc)
                self._store(slot, desc)
            else:
                self.alloc(name_tok.text, desc)
            if cur.at(","):
                cur.adv()
                continue
            break
        self._expect_consumed(cur)
        return True

    def _parse_type_prefix(self, toks):
        if not toks:
            return None
        k = 0
        t = toks[0]
        if t.kind == "keyword" and t.text in PRIMITIVE_DESCS:
            parts = [t.text]
            k = 1
        elif t.kind == "keyword" and t.text in UNSUPPORTED_PRIMS:
            parts = [t.text]
            k = 1
        elif t.kind == "identifier":
            parts = [t.text]
            k = 1
            while k + 1 < len(toks) and toks[k].text == "." and toks[k + 1].kind == "identifier":
                parts.append(toks[k + 1].text)
                k += 2
        else:
            return None
        if k < len(toks) and toks[k].text == "<":
            depth, j = 0, k
            while j < len(toks):
                txt = toks[j].text
                if txt == "<":
                    depth += 1
                elif txt in (">", ">>", ">>>"):
                    depth -= len(txt)
                j += 1
                if depth <= 0:
                    break
            if depth > 0:
                return None
            k = j
        dims = 0
        while k + 1 < len(toks) and toks[k].text == "[" and toks[k + 1].text == "]":
            dims += 1
            k += 2
        return ".".join(parts) + "[]" * dims, k

    def return_stmt(self, toks):
        line = toks[0].line
        inner = toks[1:-1]
        if not inner:
            if self.ret_desc != "V":
                raise CompileError(self.path, line, "missing return value")
            self.asm.emit("return")
            return
        cur = _Cur(inner, self.path)
        node = _ExprParser(cur, self.unit).parse()
        self._expect_consumed(cur)
        src = self.expr(node)
        self.convert(src, self.ret_desc, line)
        self.asm.emit(_return_op(self.ret_desc))

    def assign(self, lhs, rhs):
        tag = lhs[0]
        if tag == "name":
            _, name, line = lhs
            hit = self.scope.find(name)
            if hit is not None:
                slot, desc = hit
                src = self.expr(rhs)
                self.convert(src, desc, line)
                self._store(slot, desc)
                return
            found = self.world.find_field(self.cls.binary, name)
            if found is not None:
                owner, desc, is_static = found
                if is_static:
                    src = self.expr(rhs)
                    self.convert(src, desc, line)
                    self.asm.emit("putstatic", self.b.fieldref(owner, name, desc))
                else:
                    if self.msym.is_static:
                        raise CompileError(self.path, line, f"instance field {name} in static context")
                    self.asm.var_op("aload", 0)
                    src = self.expr(rhs)
                    self.convert(src, desc, line)
                    self.asm.emit("putfield", self.b.fieldref(owner, name, desc))
                return
            raise CompileError(self.path, line, f"cannot find symbol: {name}")
        if tag == "field":
            _, obj, name, line = lhs
            static_cls = self._as_type(obj)
            if static_cls is not None:
                found = self.world.find_field(static_cls, name)
                if found is None or not found[2]:
                    raise CompileError(self.path, line, f"cannot find static field {name}")
                owner, desc, _ = found
                src = self.expr(rhs)
                self.convert(src, desc, line)
                self.asm.emit("putstatic", self.b.fieldref(owner, name, desc))
                return
            obj_desc = self.expr(obj)
            binary = _ref_binary(obj_desc)
            if binary is None:
                raise CompileError(self.path, line, "field assignment on non-object")
            found = self.world.find_field(binary, name)
            if found is None:
                raise CompileError(self.path, line, f"cannot find symbol: {name}")
            owner, desc, is_static = found
            if is_static:
                raise CompileError(self.path, line, f"{name} is static; use the class name")
            src = self.expr(rhs)
            self.convert(src, desc, line)
            self.asm.emit("putfield", self.b.fieldref(owner, name, desc))
            return
        if tag == "index":
            _, arr, idx, line = lhs
            arr_desc = self.expr(arr)
            if not arr_desc.startswith("["):
                raise CompileError(self.path, line, "indexing a non-array")
            idx_desc = self.expr(idx)
            self.convert(idx_desc, "I", line)
            elem = arr_desc[1:]
            src = self.expr(rhs)
            self.convert(src, elem, line)
            self.asm.emit(_array_store_op(elem))
            return
        raise CompileError(self.path, lhs[-1], "invalid assignment target")

    # -- control flow ----------------------------------------------------

    def control(self, toks):
        first = toks[0]
        if first.text == "{":
            self.block(toks[1:-1])
            return
        kw = first.text
        if kw == "if":
            self._if(toks)
        elif kw == "while":
            self._while(toks)
        elif kw == "for":
            self._for(toks)
        elif kw == "try":
            self._try(toks)
        else:
            raise CompileError(self.path, first.line, f"{kw} statements are unsupported")

    def _split_control(self, toks):
        """keyword ( header ) rest -> (header tokens, rest tokens)."""
        cur = _Cur(toks, self.path)
        cur.adv()
        cur.expect("(")
        depth = 1
        start = cur.i
        while not cur.done():
            t = cur.adv()
            if t.text == "(":
                depth += 1
            elif t.text == ")":
                depth -= 1
                if depth == 0:
                    return cur.toks[start : cur.i - 1], cur.toks[cur.i :]
        raise CompileError(self.path, toks[0].line, "unterminated condition")

    def _body_statements(self, toks):
        if toks and toks[0].text == "{":
            return split_statements(toks[1:-1]), None
        stmts = split_statements(toks)
        return stmts[:1], stmts[1:]

    def _if(self, toks):
        header, rest = self._split_control(toks)
        cond = self._parse_expr(header)
        if rest and rest[0].text == "{":
            body_toks, after = self._take_block(rest)
        else:
            body_toks, after = self._take_single(rest)
        else_toks = None
        if after and after[0].text == "else":
            after = after[1:]
            if after and after[0].text == "{":
                else_toks, tail = self._take_block(after)
            else:
                else_toks, tail = after, []
            if tail:
                raise CompileError(self.path, toks[0].line, "trailing tokens after else")
        false_lbl = Label()
        self.cond(cond, false_lbl, jump_if=False)
        self.push_scope()
        for s in split_statements(body_toks):
            self.statement(s)
        self.pop_scope()
        if else_toks is not None:
            end_lbl = Label()
            self.asm.emit("goto", end_lbl)
            self.asm.mark(false_lbl)
            self.push_scope()
            for s in split_statements(else_toks):
                self.statement(s)
            self.pop_scope()
            self.asm.mark(end_lbl)
        else:
            self.asm.mark(false_lbl)

    def _take_block(self, toks):
        depth = 0
        for k, t in enumerate(toks):
            if t.text == "{":
                depth += 1
            elif t.text == "}":
                depth -= 1
                if depth == 0:
                    return toks[1:k], toks[k + 1 :]
        raise CompileError(self.path, toks[0].line, "unbalanced block")

    def _take_single(self, toks):
        stmts = split_statements(toks)
        if not stmts:
            return [], []
        first = stmts[0]
        n = len(first.tokens)
        return list(first.tokens), toks[n:]

    def _while(self, toks):
        header, rest = self._split_control(toks)
        cond = self._parse_expr(header)
        body_toks = rest[1:-1] if rest and rest[0].text == "{" else rest
        top, end = Label(), Label()
        self.asm.mark(top)
        self.asm.line(toks[0].line)
        self.cond(cond, end, jump_if=False)
        self.push_scope()
        for s in split_statements(body_toks):
            self.statement(s)
        self.pop_scope()
        self.asm.emit("goto", top)
        self.asm.mark(end)

    def _for(self, toks):
        cur = _Cur(toks, self.path)
        cur.adv()
        cur.expect("(")
        depth = 1
        start = cur.i
        parts, part_start = [], start
        while not cur.done():
            t = cur.adv()
            if t.text == "(":
                depth += 1
            elif t.text == ")":
                depth -= 1
                if depth == 0:
                    parts.append(cur.toks[part_start : cur.i - 1])
                    break
            elif t.text == ";" and depth == 1:
                parts.append(cur.toks[part_start : cur.i - 1])
                part_start = cur.i
        if len(parts) != 3:
            raise CompileError(self.path, toks[0].line, "for header must have three parts")
        init, cond_toks, update = parts
        body_toks = cur.toks[cur.i :]
        if body_toks and body_toks[0].text == "{":
            body_toks = body_toks[1:-1]
        self.push_scope()
        if init:
            self.asm.line(init[0].line)
            self.decl_or_expr(list(init))
        top, end = Label(), Label()
        self.asm.mark(top)
        if cond_toks:
            self.asm.line(cond_toks[0].line)
            self.cond(self._parse_expr(cond_toks), end, jump_if=False)
        for s in split_statements(body_toks):
            self.statement(s)
        if update:
            self.asm.line(update[0].line)
            self.expr_statement(list(update))
        self.asm.emit("goto", top)
        self.asm.mark(end)
        self.pop_scope()

    def _try(self, toks):
        start_tok = toks[0]
        rest = toks[1:]
        if rest and rest[0].text == "(":
            raise CompileError(self.path, start_tok.line, "try-with-resources is unsupported")
        body_toks, rest = self._take_block(rest)
        start_lbl, end_lbl, after_lbl = Label(), Label(), Label()
        self.asm.mark(start_lbl)
        self.push_scope()
        for s in split_statements(body_toks):
            self.statement(s)
        self.pop_scope()
        self.asm.mark(end_lbl)
        self.asm.emit("goto", after_lbl)
        handlers = []
        while rest and rest[0].text == "catch":
            line = rest[0].line
            cur = _Cur(rest[1:], self.path)
            cur.expect("(")
            if cur.at("final"):
                cur.adv()
            parts = [cur.adv().text]
            while cur.at("."):
                cur.adv()
                parts.append(cur.adv().text)
            if cur.at("|"):
                raise CompileError(self.path, line, "multi-catch is unsupported")
            name_tok = cur.adv()
            cur.expect(")")
            h_toks, rest = self._take_block(cur.toks[cur.i :])
            handlers.append((".".join(parts), name_tok.text, h_toks, line))
        if rest and rest[0].text == "finally":
            raise CompileError(self.path, rest[0].line, "finally blocks are unsupported")
        if rest:
            raise CompileError(self.path, rest[0].line, "trailing tokens after try")
        if not handlers:
            raise CompileError(self.path, start_tok.line, "try without catch")
        for type_text, var, h_toks, line in handlers:
            binary = self.unit.resolve_class(type_text)
            if binary is None:
                raise CompileError(self.path, line, f"cannot find symbol: class {type_text}")
            desc = f"L{binary};"
            h_lbl = Label()
            self.asm.mark(h_lbl)
            self.asm.line(line)
            self.push_scope()
            slot = self.alloc(var, desc)
            self._store(slot, desc)
            for s in split_statements(h_toks):
                self.statement(s)
            self.pop_scope()
            self.asm.emit("goto", after_lbl)
            self.asm.exceptions.append((start_lbl, end_lbl, h_lbl, binary))
        self.asm.mark(after_lbl)

    def _parse_expr(self, toks):
        cur = _Cur(toks, self.path)
        node = _ExprParser(cur, self.unit).parse()
        self._expect_consumed(cur)
        return node

    # -- conditions ------------------------------------------------------

    def cond(self, node, target, jump_if):
        tag = node[0]
        if tag == "bool":
            if node[1] == jump_if:
                self.asm.emit("goto", target)
            return
        if tag == "un" and node[1] == "!":
            self.cond(node[2], target, not jump_if)
            return
        if tag == "bin" and node[1] in ("&&", "||"):
            _, op, l, r, _line = node
            if (op == "&&" and not jump_if) or (op == "||" and jump_if):
                self.cond(l, target, jump_if)
                self.cond(r, target, jump_if)
            else:
                skip = Label()
                self.cond(l, skip, not jump_if)
                self.cond(r, target, jump_if)
                self.asm.mark(skip)
            return
        if tag == "bin" and node[1] in ("==", "!=", "<", "<=", ">", ">="):
            _, op, l, r, line = node
            lt, rt = self.dry_type(l), self.dry_type(r)
            if op in ("==", "!=") and (_is_ref(lt) or _is_ref(rt)):
                if l[0] == "null" or r[0] == "null":
                    operand = r if l[0] == "null" else l
                    self.expr(operand)
                    eq = op == "=="
                    self.asm.emit("ifnull" if eq == jump_if else "ifnonnull", target)
                else:
                    self.expr(l)
                    self.expr(r)
                    eq = op == "=="
                    self.asm.emit("if_acmpeq" if eq == jump_if else "if_acmpne", target)
                return
            common = _promote(lt, rt)
            if common is None:
                raise CompileError(self.path, line, f"cannot compare {lt} and {rt}")
            self.expr(l)
            self.convert(lt, common, line)
            self.expr(r)
            self.convert(rt, common, line)
            effective = op if jump_if else _NEGATE[op]
            if common == "I":
                self.asm.emit("if_icmp" + _CMP_SUFFIX[effective], target)
            elif common == "J":
                self.asm.emit("lcmp")
                self.asm.emit("if" + _CMP_SUFFIX[effective], target)
            else:
                self.asm.emit("dcmpg" if op in ("<", "<=") else "dcmpl")
                self.asm.emit("if" + _CMP_SUFFIX[effective], target)
            return
        desc = self.expr(node)
        if desc != "Z":
            raise CompileError(self.path, node[-1], "condition is not boolean")
        self.asm.emit("ifne" if jump_if else "ifeq", target)

    # -- expressions -----------------------------------------------------

    def dry_type(self, node):
        """Type of an expression without emitting code."""
        saved_asm, saved_slot, saved_scope = self.asm, self.next_slot, self.scope
        self.asm = CodeAssembler(max_locals=saved_asm.max_locals)
        try:
            return self.expr(node)
        finally:
            self.asm, self.next_slot, self.scope = saved_asm, saved_slot, saved_scope

    def expr(self, node):
        tag = node[0]
        if tag == "int":
            self.asm.load_const_int(node[1], self.b)
            return "I"
        if tag == "char":
            self.asm.load_const_int(node[1], self.b)
            return "C"
        if tag == "long":
            v = node[1]
            if v in (0, 1):
                self.asm.emit(f"lconst_{v}")
            else:
                self.asm.emit("ldc2_w", self.b.long_(v))
            return "J"
        if tag == "double":
            v = node[1]
            if v in (0.0, 1.0):
                self.asm.emit(f"dconst_{int(v)}")
            else:
                self.asm.emit("ldc2_w", self.b.double_(v))
            return "D"
        if tag == "bool":
            self.asm.emit("iconst_1" if node[1] else "iconst_0")
            return "Z"
        if tag == "str":
            idx = self.b.string(node[1])
            if idx <= 0xFF:
                self.asm.emit("ldc", idx)
            else:
                self.asm.emit("ldc_w", idx)
            return "Ljava/lang/String;"
        if tag == "null":
            self.asm.emit("aconst_null")
            return NULL_DESC
        if tag == "this":
            if self.msym.is_static:
                raise CompileError(self.path, node[-1], "this in static context")
            self.asm.var_op("aload", 0)
            return f"L{self.cls.binary};"
        if tag == "name":
            return self._name(node)
        if tag == "field":
            return self._field(node)
        if tag == "call":
            return self._call(node)
        if tag == "new":
            return self._new(node)
        if tag == "newarr":
            return self._newarr(node)
        if tag == "index":
            return self._index(node)
        if tag == "cast":
            return self._cast(node)
        if tag == "instanceof":
            _, e, type_text, line = node
            dst = self.unit.resolve_type_text(type_text, line)
            if not _is_ref(dst):
                raise CompileError(self.path, line, f"instanceof needs a reference type, got {dst}")
            src = self.expr(e)
            if not _is_ref(src):
                raise CompileError(self.path, line, f"instanceof on non-reference {src}")
            self.asm.emit("instanceof", self.b.klass(
                _ref_binary(dst) if dst.startswith("L") else dst
            ))
            return "Z"
        if tag == "un":
            return self._unary(node)
        if tag == "bin":
            return self._binary(node)
        raise CompileError(self.path, node[-1], f"unsupported expression {tag}")

    def _name(self, node):
        _, name, line = node
        hit = self.scope.find(name)
        if hit is not None:
            slot, desc = hit
            self.asm.var_op(_load_base(desc), slot)
            return desc
        found = self.world.find_field(self.cls.binary, name)
        if found is not None:
            owner, desc, is_static = found
            if is_static:
                self.asm.emit("getstatic", self.b.fieldref(owner, name, desc))
            else:
                if self.msym.is_static:
                    raise CompileError(self.path, line, f"instance field {name} in static context")
                self.asm.var_op("aload", 0)
                self.asm.emit("getfield", self.b.fieldref(owner, name, desc))
            return desc
        raise CompileError(self.path, line, f"cannot find symbol: {name}")

    def _as_type(self, node):
        """A name/field chain that denotes a class -> binary name, else None."""
        if node[0] == "name":
            if self.scope.find(node[1]) is not None:
                return None
            if self.world.find_field(self.cls.binary, node[1]) is not None:
                return None
            return self.unit.resolve_class(node[1])
        if node[0] == "field":
            parts = []
            cur = node
            while cur[0] == "field":
                parts.append(cur[2])
                cur = cur[1]
            if cur[0] != "name":
                return None
            parts.append(cur[1])
            dotted = ".".join(reversed(parts))
            return self.unit.resolve_class(dotted)
        return None

    def _field(self, node):
        _, obj, name, line = node
        static_cls = self._as_type(obj)
        if static_cls is not None:
            found = self.world.find_field(static_cls, name)
            if found is None:
                qualified = self._as_type(node)
                if qualified is not None:
                    raise CompileError(self.path, line, f"{qualified} is a class, not a value")
                raise CompileError(self.path, line, f"cannot find symbol: {name}")
            owner, desc, is_static = found
            if not is_static:
                raise CompileError(self.path, line, f"{name} is not static")
            self.asm.emit("getstatic", self.b.fieldref(owner, name, desc))
            return desc
        obj_desc = self.expr(obj)
        if obj_desc.startswith("[") and name == "length":
            self.asm.emit("arraylength")
            return "I"
        binary = _ref_binary(obj_desc)
        if binary is None:
            raise CompileError(self.path, line, f"cannot access field {name} on {obj_desc}")
        found = self.world.find_field(binary, name)
        if found is None:
            raise CompileError(self.path, line, f"cannot find symbol: {name}")
        owner, desc, is_static = found
        if is_static:
            self.asm.emit("getstatic", self.b.fieldref(owner, name, desc))
            return desc
        self.asm.emit("getfield", self.b.fieldref(owner, name, desc))
        return desc

    def _call(self, node):
        _, recv, name, args, line = node
        if recv is None:
            candidates = self.world.find_methods(self.cls.binary, name)
            if candidates:
                arg_descs = [self.dry_type(a) for a in args]
                owner, msym = self._pick(candidates, arg_descs, line, name)
                if msym.is_static:
                    return self._invoke_static(owner, msym, args, arg_descs, line)
                if self.msym.is_static:
                    raise CompileError(self.path, line, f"instance method {name} in static context")
                self.asm.var_op("aload", 0)
                return self._invoke_instance(owner, msym, args, arg_descs, line, this_call=True)
            static_cls = self.unit.static_explicit.get(name)
            if static_cls is None:
                for cand in self.unit.static_wild:
                    if any(m.name == name for m in (self.world.lookup(cand).methods if self.world.lookup(cand) else [])):
                        static_cls = cand
                        break
            if static_cls is not None:
                candidates = self.world.find_methods(static_cls, name)
                arg_descs = [self.dry_type(a) for a in args]
                owner, msym = self._pick(candidates, arg_descs, line, name)
                return self._invoke_static(owner, msym, args, arg_descs, line)
            raise CompileError(self.path, line, f"cannot find symbol: method {name}")
        static_cls = self._as_type(recv)
        if static_cls is not None:
            candidates = [c for c in self.world.find_methods(static_cls, name) if c[1].is_static]
            if not candidates:
                raise CompileError(self.path, line, f"cannot find static method {name} on {static_cls}")
            arg_descs = [self.dry_type(a) for a in args]
            owner, msym = self._pick(candidates, arg_descs, line, name)
            return self._invoke_static(owner, msym, args, arg_descs, line)
        recv_desc = self.expr(recv)
        binary = _ref_binary(recv_desc)
        if recv_desc.startswith("["):
            binary = "java/lang/Object"
        if binary is None:
            raise CompileError(self.path, line, f"cannot call {name} on {recv_desc}")
        candidates = self.world.find_methods(binary, name)
        if not candidates:
            raise CompileError(self.path, line, f"cannot find symbol: method {name} on {binary}")
        arg_descs = [self.dry_type(a) for a in args]
        owner, msym = self._pick(candidates, arg_descs, line, name)
        return self._invoke_instance(owner, msym, args, arg_descs, line)

    def _pick(self, candidates, arg_descs, line, name):
        matching = []
        for owner, m in candidates:
            params = _param_descs(m.descriptor)
            if len(params) != len(arg_descs):
                continue
            if all(self.world.assignable(a, p) or a == p for a, p in zip(arg_descs, params)):
                matching.append((owner, m, params))
        if not matching:
            raise CompileError(
                self.path, line,
                f"no applicable overload of {name} for ({', '.join(arg_descs) or ''})",
            )
        for owner, m, params in matching:
            if list(params) == list(arg_descs):
                return owner, m
        return matching[0][0], matching[0][1]

    def _emit_args(self, args, arg_descs, params, line):
        for a, src, dst in zip(args, arg_descs, params):
            actual = self.expr(a)
            self.convert(actual, dst, line)

    def _invoke_static(self, owner, msym, args, arg_descs, line):
        params = _param_descs(msym.descriptor)
        self._emit_args(args, arg_descs, params, line)
        self.asm.emit("invokestatic", self.b.methodref(owner, msym.name, msym.descriptor))
        return _return_desc(msym.descriptor)

    def _invoke_instance(self, owner, msym, args, arg_descs, line, this_call=False):
        params = _param_descs(msym.descriptor)
        self._emit_args(args, arg_descs, params, line)
        if self.world.is_interface(owner):
            count = 1 + sum(_width(p) for p in params)
            self.asm.emit(
                "invokeinterface",
                self.b.interface_methodref(owner, msym.name, msym.descriptor),
                count, 0,
            )
        elif msym.is_private and owner == self.cls.binary:
            self.asm.emit("invokespecial", self.b.methodref(owner, msym.name, msym.descriptor))
        else:
            self.asm.emit("invokevirtual", self.b.methodref(owner, msym.name, msym.descriptor))
        return _return_desc(msym.descriptor)

    def _new(self, node):
        _, type_text, args, line = node
        binary = self.unit.resolve_class(type_text)
        if binary is None:
            raise CompileError(self.path, line, f"cannot find symbol: class {type_text}")
        if self.world.is_interface(binary):
            raise CompileError(self.path, line, f"{type_text} is an interface")
        self.asm.emit("new", self.b.klass(binary))
        self.asm.emit("dup")
        candidates = [
            (owner, m) for owner, m in self.world.find_methods(binary, "<init>") if owner == binary
        ]
        if not candidates and not args:
            candidates = [(binary, MethodSym("<init>", "()V", False))]
        arg_descs = [self.dry_type(a) for a in args]
        owner, msym = self._pick(candidates, arg_descs, line, type_text)
        params = _param_descs(msym.descriptor)
        self._emit_args(args, arg_descs, params, line)
        self.asm.emit("invokespecial", self.b.methodref(binary, "<init>", msym.descriptor))
        return f"L{binary};"

    def _newarr(self, node):
        _, type_text, dim, line = node
        elem_desc = self.unit.resolve_type_text(type_text, line)
        d = self.expr(dim)
        self.convert(d, "I", line)
        if elem_desc in ("I", "J", "D", "Z", "C"):
            atype = {"Z": 4, "C": 5, "D": 7, "I": 10, "J": 11}[elem_desc]
            self.asm.emit("newarray", atype)
        else:
            self.asm.emit("anewarray", self.b.klass(_ref_binary(elem_desc)))
        return "[" + elem_desc

    def _index(self, node):
        _, arr, idx, line = node
        arr_desc = self.expr(arr)
        if not arr_desc.startswith("["):
            raise CompileError(self.path, line, "indexing a non-array")
        d = self.expr(idx)
        self.convert(d, "I", line)
        elem = arr_desc[1:]
        self.asm.emit(_array_load_op(elem))
        return elem

    def _cast(self, node):
        _, type_text, e, line = node
        dst = self.unit.resolve_type_text(type_text, line)
        src = self.expr(e)
        if _is_ref(dst):
            if not _is_ref(src):
                raise CompileError(self.path, line, f"cannot cast {src} to {dst}")
            if src != dst:
                self.asm.emit("checkcast", self.b.klass(
                    _ref_binary(dst) if dst.startswith("L") else dst
                ))
            return dst
        if _is_ref(src):
            raise CompileError(self.path, line, f"cannot cast {src} to {dst}")
        self._numeric_cast(src, dst, line)
        return dst

    def _numeric_cast(self, src, dst, line):
        s = "I" if src in ("C", "Z") else src
        d = "I" if dst in ("C", "Z") else dst
        if s != d:
            ops = {("I", "J"): "i2l", ("I", "D"): "i2d", ("J", "I"): "l2i",
                   ("J", "D"): "l2d", ("D", "I"): "d2i", ("D", "J"): "d2l"}
            op = ops.get((s, d))
            if op is None:
                raise CompileError(self.path, line, f"cannot cast {src} to {dst}")
            self.asm.emit(op)
        if dst == "C" and src != "C":
            self.asm.emit("i2c")

    def _unary(self, node):
        _, op, e, line = node
        if op == "-":
            desc = self.expr(e)
            if desc in ("I", "C"):
                self.asm.emit("ineg")
                return "I"
            if desc == "J":
                self.asm.emit("lneg")
                return "J"
            if desc == "D":
                self.asm.emit("dneg")
                return "D"
            raise CompileError(self.path, line, f"cannot negate {desc}")
        if op == "!":
            return self._materialize(node)
        raise CompileError(self.path, line, f"unsupported unary {op}")

    def _materialize(self, node):
        false_lbl, end_lbl = Label(), Label()
        self.cond(node, false_lbl, jump_if=False)
        self.asm.emit("iconst_1")
        self.asm.emit("goto", end_lbl)
        self.asm.mark(false_lbl)
        self.asm.emit("iconst_0")
        self.asm.mark(end_lbl)
        return "Z"

    def _binary(self, node):
        _, op, l, r, line = node
        if op in ("&&", "||", "==", "!=", "<", "<=", ">", ">="):
            return self._materialize(node)
        lt, rt = self.dry_type(l), self.dry_type(r)
        if op == "+" and (lt == "Ljava/lang/String;" or rt == "Ljava/lang/String;"):
            self._emit_as_string(l, lt, line)
            self._emit_as_string(r, rt, line)
            self.asm.emit(
                "invokevirtual",
                self.b.methodref("java/lang/String", "concat",
                                 "(Ljava/lang/String;)Ljava/lang/String;"),
            )
            return "Ljava/lang/String;"
        common = _promote(lt, rt)
        if common is None:
            raise CompileError(self.path, line, f"cannot apply {op} to {lt} and {rt}")
        self.expr(l)
        self.convert(lt, common, line)
        self.expr(r)
        self.convert(rt, common, line)
        prefix = {"I": "i", "J": "l", "D": "d"}[common]
        mnem = {"+": "add", "-": "sub", "*": "mul", "/": "div", "%": "rem"}.get(op)
        if mnem is None:
            raise CompileError(self.path, line, f"unsupported operator {op}")
        self.asm.emit(prefix + mnem)
        return common

    def _emit_as_string(self, node, desc, line):
        if desc == "Ljava/lang/String;":
            self.expr(node)
            return
        self.expr(node)
        arg = desc
        if _is_ref(desc):
            arg = "Ljava/lang/Object;"
        elif desc == "Z":
            arg = "Z"
        elif desc == "C":
            arg = "C"
        elif desc in ("I",):
            arg = "I"
        elif desc in ("J", "D"):
            arg = desc
        else:
            raise CompileError(self.path, line, f"cannot stringify {desc}")
        self.asm.emit(
            "invokestatic",
            self.b.methodref("java/lang/String", "valueOf", f"({arg})Ljava/lang/String;"),
        )

    # -- conversions -----------------------------------------------------

    def convert(self, src, dst, line):
        if src == dst or dst is None:
            return
        if src == NULL_DESC and _is_ref(dst):
            return
        if _is_ref(src) and _is_ref(dst):
            if self.world.assignable(src, dst):
                return
            raise CompileError(self.path, line, f"incompatible types: {src} cannot become {dst}")
        pairs = {
            ("I", "J"): "i2l", ("I", "D"): "i2d", ("J", "D"): "l2d",
            ("C", "J"): "i2l", ("C", "D"): "i2d",
        }
        if (src, dst) == ("C", "I") or (src, dst) == ("Z", "I"):
            return
        op = pairs.get((src, dst))
        if op is None:
            raise CompileError(self.path, line, f"incompatible types: {src} cannot become {dst}")
        self.asm.emit(op)

    def _store(self, slot, desc):
        self.asm.var_op(_store_base(desc), slot)


_NEGATE = {"==": "!=", "!=": "==", "<": ">=", "<=": ">", ">": "<=", ">=": "<"}
_CMP_SUFFIX = {"==": "eq", "!=": "ne", "<": "lt", "<=": "le", ">": "gt", ">=": "ge"}
_COMPOUND = {"+=": "+", "-=": "-", "*=": "*", "/=": "/", "%=": "%"}


def _promote(a, b):
    kinds = {a, b}
    if not kinds <= {"I", "J", "D", "C", "Z"}:
        if a == b and _is_ref(a):
            return None
        return None
    if "Z" in kinds and kinds != {"Z"}:
        return None
    if kinds == {"Z"}:
        return "I"
    if "D" in kinds:
        return "D"
    if "J" in kinds:
        return "J"
    return "I"


def _load_base(desc):
    if desc in ("I", "Z", "C"):
        return "iload"
    if desc == "J":
        return "lload"
    if desc == "D":
        return "dload"
    return "aload"


def _store_base(desc):
    if desc in ("I", "Z", "C"):
        return "istore"
    if desc == "J":
        return "lstore"
    if desc == "D":
        return "dstore"
    return "astore"


def _return_op(desc):
    if desc in ("I", "Z", "C"):
        return "ireturn"
    if desc == "J":
        return "lreturn"
    if desc == "D":
        return "dreturn"
    return "areturn"


def _array_load_op(elem):
    return {"I": "iaload", "J": "laload", "D": "daload", "Z": "baload", "C": "caload"}.get(elem, "aaload")


def _array_store_op(elem):
    return {"I": "iastore", "J": "lastore", "D": "dastore", "Z": "bastore", "C": "castore"}.get(elem, "aastore")


def _param_descs(descriptor):
    out = []
    i = 1
    while descriptor[i] != ")":
        start = i
        while descriptor[i] == "[":
            i += 1
        if descriptor[i] == "L":
            i = descriptor.index(";", i) + 1
        else:
            i += 1
        out.append(descriptor[start:i])
    return out


def _return_desc(descriptor):
    return descriptor[descriptor.index(")") + 1 :]


# ---------------------------------------------------------------------------
# driver
# ---------------------------------------------------------------------------


def _method_descriptor(unit, m):
    params = "".join(unit.resolve_type_text(t, m.line_span[0]) for t, _ in m.params)
    if m.is_constructor:
        return f"({params})V"
    ret = unit.resolve_type_text(m.return_type or "void", m.line_span[0])
    return f"({params}){ret}"


def _access_flags(modifiers, base=0):
    acc = base
    for mod in modifiers:
        acc |= {
            "public": ACC_PUBLIC, "private": ACC_PRIVATE, "protected": ACC_PROTECTED,
            "static": ACC_STATIC, "final": ACC_FINAL, "abstract": ACC_ABSTRACT,
        }.get(mod, 0)
    return acc


def compile_sources(paths, classpath_entries=(), out_dir=None):
    """Compile .java files; returns {binary name: classfile bytes}.

    Also writes <out_dir>/<package dirs>/<Name>.class when out_dir is given.
    """
    world = World(Classpath(list(classpath_entries)))
    units = []
    for path in paths:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
        try:
            sm = parse_source(text, path)
        except ValueError as e:
            raise CompileError(path, 1, str(e)) from e
        unit = _Unit(sm, world, path)
        units.append(unit)
        for cm in sm.classes:
            if "$" in cm.binary_name:
                raise CompileError(path, cm.line_span[0], "nested classes are unsupported")
            binary = cm.binary_name.replace(".", "/")
            sym = ClassSym(binary, None, cm.kind == "interface", source=cm, unit=unit)
            world.add_source(sym)

    # second pass: signatures
    for unit in units:
        for cm in unit.sm.classes:
            binary = cm.binary_name.replace(".", "/")
            sym = world.source[binary]
            if cm.extends_name:
                sup = unit.resolve_class(cm.extends_name)
                if sup is None:
                    raise CompileError(unit.path, cm.line_span[0],
                                       f"cannot find symbol: class {cm.extends_name}")
                if cm.kind == "interface":
                    sym.superclass = "java/lang/Object"
                    sym.interfaces.append(sup)
                else:
                    sym.superclass = sup
            else:
                sym.superclass = "java/lang/Object"
            for iname in cm.implements_names:
                iface = unit.resolve_class(iname)
                if iface is None:
                    raise CompileError(unit.path, cm.line_span[0],
                                       f"cannot find symbol: class {iname}")
                sym.interfaces.append(iface)
            for f in cm.fields:
                desc = unit.resolve_type_text(f.type_text, f.line)
                sym.fields[f.name] = FieldSym(
                    f.name, desc, "static" in f.modifiers, f.init_tokens, f.line,
                    _access_flags(f.modifiers),
                )
            has_ctor = False
            for m in cm.methods:
                desc = _method_descriptor(unit, m)
                if m.is_constructor:
                    has_ctor = True
                sym.methods.append(
                    MethodSym(
                        "<init>" if m.is_constructor else m.name,
                        desc, "static" in m.modifiers, "private" in m.modifiers, m,
                    )
                )
            if not has_ctor and cm.kind == "class":
                sym.methods.append(MethodSym("<init>", "()V", False, False, None))

    # third pass: code generation
    out = {}
    for unit in units:
        for cm in unit.sm.classes:
            binary = cm.binary_name.replace(".", "/")
            data = _compile_class(unit, world.source[binary])
            out[binary] = data
            if out_dir:
                dest = os.path.join(out_dir, *binary.split("/")) + ".class"
                os.makedirs(os.path.dirname(dest), exist_ok=True)
                with open(dest, "wb") as fh:
                    fh.write(data)
    return out


def _compile_class(unit, sym):
    cm = sym.source
    base = ACC_SUPER | _access_flags(cm.modifiers)
    if sym.is_interface:
        base |= ACC_INTERFACE | ACC_ABSTRACT
        base &= ~ACC_SUPER
    b = ClassFileBuilder(sym.binary, sym.superclass or "java/lang/Object",
                         major=CLASSFILE_MAJOR, access=base or ACC_SUPER,
                         interfaces=tuple(sym.interfaces))
    b.attributes.append(b.source_file_attribute(os.path.basename(unit.path)))

    for f in sym.fields.values():
        b.add_field(f.access, f.name, f.descriptor)

    class_annos = [unit.resolve_annotation(a, cm.line_span[0]) for a in cm.annotations]
    if class_annos:
        b.attributes.append(b.annotations_attribute(class_annos))

    instance_inits = [f for f in sym.fields.values() if f.init_tokens and not f.is_static]
    static_inits = [f for f in sym.fields.values() if f.init_tokens and f.is_static]

    for msym in sym.methods:
        if msym.name == "<init>":
            _compile_ctor(unit, sym, msym, b, instance_inits, cm)
        else:
            _compile_method(unit, sym, msym, b)

    if static_inits:
        asm = CodeAssembler()
        clinit = MethodSym("<clinit>", "()V", True)
        gen = _Gen(unit, sym, clinit, asm, b)
        for f in static_inits:
            asm.line(f.line)
            cur = _Cur(list(f.init_tokens), unit.path)
            node = _ExprParser(cur, unit).parse()
            gen._expect_consumed(cur)
            src = gen.expr(node)
            gen.convert(src, f.descriptor, f.line)
            asm.emit("putstatic", b.fieldref(sym.binary, f.name, f.descriptor))
        asm.line(cm.line_span[1])
        asm.emit("return")
        b.add_method(ACC_STATIC, "<clinit>", "()V", asm)

    return write_classfile(b.build())


def _compile_ctor(unit, sym, msym, b, instance_inits, cm):
    m = msym.source
    line = m.line_span[0] if m else cm.line_span[0]
    close_line = m.body_close_line if m and m.body_close_line > 0 else line
    asm = CodeAssembler(max_locals=1)
    gen = _Gen(unit, sym, MethodSym(msym.name, msym.descriptor, False), asm, b)
    gen.next_slot = 1
    if m:
        for (t, pname) in m.params:
            desc = unit.resolve_type_text(t, line)
            slot = gen.alloc(pname, desc, declare=False)
            asm.declare_local(slot, pname, desc)
    asm.reserve(gen.next_slot)

    body = list(m.body) if m and m.body else []
    asm.line(line)
    consumed = 0
    if body and body[0].tokens and body[0].tokens[0].text == "super":
        toks = list(body[0].tokens)
        asm.line(toks[0].line)
        asm.var_op("aload", 0)
        cur = _Cur(toks[1:-1], unit.path)
        parser = _ExprParser(cur, unit)
        cur.expect("(")
        args = []
        while not cur.at(")"):
            args.append(parser.parse())
            if cur.at(","):
                cur.adv()
        cur.expect(")")
        sup = sym.superclass or "java/lang/Object"
        candidates = [
            (owner, ms)
            for owner, ms in unit.world.find_methods(sup, "<init>")
            if owner == sup
        ] or [(sup, MethodSym("<init>", "()V", False))]
        arg_descs = [gen.dry_type(a) for a in args]
        owner, picked = gen._pick(candidates, arg_descs, toks[0].line, "super")
        gen._emit_args(args, arg_descs, _param_descs(picked.descriptor), toks[0].line)
        asm.emit("invokespecial", b.methodref(sup, "<init>", picked.descriptor))
        consumed = 1
    else:
        asm.var_op("aload", 0)
        sup = sym.superclass or "java/lang/Object"
        asm.emit("invokespecial", b.methodref(sup, "<init>", "()V"))

    for f in instance_inits:
        asm.line(f.line)
        asm.var_op("aload", 0)
        cur = _Cur(list(f.init_tokens), unit.path)
        node = _ExprParser(cur, unit).parse()
        gen._expect_consumed(cur)
        src = gen.expr(node)
        gen.convert(src, f.descriptor, f.line)
        asm.emit("putfield", b.fieldref(sym.binary, f.name, f.descriptor))

    gen.compile_body(body[consumed:])
    asm.line(close_line)
    asm.emit("return")
    annos = [unit.resolve_annotation(a, line) for a in (m.annotations if m else [])]
    b.add_method(_access_flags(m.modifiers if m else ["public"], 0) or ACC_PUBLIC,
                 "<init>", msym.descriptor, asm, annotations=annos)


def _compile_method(unit, sym, msym, b):
    m = msym.source
    access = _access_flags(m.modifiers)
    if sym.is_interface:
        access |= ACC_PUBLIC | ACC_ABSTRACT
    annos = [unit.resolve_annotation(a, m.line_span[0]) for a in m.annotations]
    if m.body is None:
        b.add_method(access | ACC_ABSTRACT, msym.name, msym.descriptor, None, annotations=annos)
        return
    asm = CodeAssembler()
    gen = _Gen(unit, sym, msym, asm, b)
    if not msym.is_static:
        gen.next_slot = 1
    for (t, pname) in m.params:
        desc = unit.resolve_type_text(t, m.line_span[0])
        slot = gen.alloc(pname, desc, declare=False)
        asm.declare_local(slot, pname, desc)
    asm.reserve(gen.next_slot)
    gen.compile_body(m.body)
    ret = _return_desc(msym.descriptor)
    close_line = m.body_close_line if m.body_close_line > 0 else m.line_span[1]
    last = m.body[-1] if m.body else None
    if ret == "V":
        asm.line(close_line)
        asm.emit("return")
    elif last is not None and last.tokens[0].text == "return":
        pass
    elif last is not None and (last.has_control_flow or last.tokens[0].text == "throw"):
        # fall-through safety net for bodies ending in a branch or throw
        asm.line(close_line)
        _emit_default_return(asm, ret, b)
    else:
        raise CompileError(unit.path, close_line, "missing return statement")
    b.add_method(access, msym.name, msym.descriptor, asm, annotations=annos)


def _emit_default_return(asm, ret, b):
    if ret in ("I", "Z", "C"):
        asm.emit("iconst_0")
        asm.emit("ireturn")
    elif ret == "J":
        asm.emit("lconst_0")
        asm.emit("lreturn")
    elif ret == "D":
        asm.emit("dconst_0")
        asm.emit("dreturn")
    else:
        asm.emit("aconst_null")
        asm.emit("areturn")
