"""Value-level classfile interpreter with built-in platform and JUnit support.

Runs classfiles produced by the bundled compiler (or any compiler emitting the
same subset of instructions).  Built-in classes are backed by intrinsics; user
classes are executed from their bytecode.  Entry points mirror the `java`
launcher: run_main for an ordinary main class, and an org.junit.runner.JUnitCore
intrinsic implementing the JUnit 4 console runner protocol.
"""

from __future__ import annotations

import math
import os
import sys

from ..jclass import parse_classfile
from . import stdlib
from .compiler import Classpath, _param_descs, _return_desc

INT_MASK = 0xFFFFFFFF
LONG_MASK = 0xFFFFFFFFFFFFFFFF

W2 = ("<w2>",)  # second stack word of a long/double

MAX_FRAMES = 768


def i32(v):
    return ((v + 0x80000000) & INT_MASK) - 0x80000000


def i64(v):
    return ((v + 0x8000000000000000) & LONG_MASK) - 0x8000000000000000


def _jdiv(a, b):
    q = abs(a) // abs(b)
    return -q if (a < 0) != (b < 0) else q


def _jrem(a, b):
    return a - _jdiv(a, b) * b


def _ddiv(a, b):
    if b == 0.0:
        if a == 0.0 or math.isnan(a):
            return math.nan
        sign = math.copysign(1.0, a) * math.copysign(1.0, b)
        return math.inf * sign
    return a / b


def _drem(a, b):
    if b == 0.0 or math.isnan(a) or math.isnan(b) or math.isinf(a):
        return math.nan
    if math.isinf(b):
        return a
    return math.fmod(a, b)


def _d2i(v, lo, hi):
    if math.isnan(v):
        return 0
    if v >= hi:
        return hi
    if v <= lo:
        return lo
    return int(v)


class JObject:
    __slots__ = ("cls", "fields", "payload")

    def __init__(self, cls, payload=None):
        self.cls = cls
        self.fields = {}
        self.payload = payload


class JArray:
    __slots__ = ("elem", "data")

    def __init__(self, elem, data):
        self.elem = elem
        self.data = data


class JThrow(Exception):
    """A Java throwable propagating through interpreter frames."""

    def __init__(self, obj):
        super().__init__(obj.cls)
        self.obj = obj


class SysExit(Exception):
    def __init__(self, code):
        super().__init__(code)
        self.code = code


class VMError(Exception):
    """Internal interpreter failure (unsupported or malformed input)."""


def _default_value(desc):
    if desc in ("I", "Z", "C", "B", "S", "J"):
        return 0
    if desc in ("D", "F"):
        return 0.0
    return None


def _dstr(v):
    """Double -> string following java.lang.Double.toString conventions."""
    if math.isnan(v):
        return "NaN"
    if math.isinf(v):
        return "Infinity" if v > 0 else "-Infinity"
    if v == 0.0:
        return "-0.0" if math.copysign(1.0, v) < 0 else "0.0"
    a = abs(v)
    if 1e-3 <= a < 1e7:
        s = repr(v)
        if "." not in s and "e" not in s:
            s += ".0"
        return s
    neg = v < 0
    s = repr(a)
    if "e" in s:
        mant, exp = s.split("e")
        exp = int(exp)
        if "." not in mant:
            mant += ".0"
    else:
        intpart, _, frac = s.partition(".")
        digits = (intpart + frac).lstrip("0") or "0"
        stripped = intpart.lstrip("0")
        if stripped:
            exp = len(stripped) - 1
        else:
            lead = len(frac) - len(frac.lstrip("0"))
            exp = -(lead + 1)
        digits = digits.rstrip("0") or "0"
        mant = digits[0] + "." + (digits[1:] or "0")
    return ("-" if neg else "") + mant + "E" + str(exp)


class Machine:
    def __init__(self, classpath_entries, stdout=None, stderr=None):
        self.classpath = Classpath(list(classpath_entries))
        self.classes = {}
        self.statics = {}
        self.initialized = set()
        self.stdout = stdout if stdout is not None else sys.stdout
        self.stderr = stderr if stderr is not None else sys.stderr
        self.frames = []  # [binary, method, source file, line]
        self._sys_streams = {
            "out": JObject("java/io/PrintStream", payload="out"),
            "err": JObject("java/io/PrintStream", payload="err"),
        }

    # -- class loading -------------------------------------------------

    def try_load(self, binary):
        if binary in self.classes:
            return self.classes[binary]
        data = self.classpath.read(binary)
        if data is None:
            self.classes[binary] = None
            return None
        cf = parse_classfile(data)
        self.classes[binary] = cf
        return cf

    def superclass_of(self, binary):
        cf = self.try_load(binary)
        if cf is not None:
            return cf.superclass
        return stdlib.superclass(binary)

    def interfaces_of(self, binary):
        cf = self.try_load(binary)
        if cf is not None:
            return list(cf.interfaces)
        return list(stdlib.interfaces_of(binary))

    def is_subclass(self, cls, target):
        work, seen = [cls], set()
        while work:
            cur = work.pop()
            if cur is None or cur in seen:
                continue
            if cur == target:
                return True
            seen.add(cur)
            sup = self.superclass_of(cur)
            if sup:
                work.append(sup)
            work.extend(self.interfaces_of(cur))
        return False

    def ensure_init(self, binary):
        if binary in self.initialized:
            return
        self.initialized.add(binary)
        cf = self.try_load(binary)
        if cf is None:
            return
        if cf.superclass:
            self.ensure_init(cf.superclass)
        self.statics[binary] = {
            f.name: _default_value(f.descriptor) for f in cf.fields if f.is_static
        }
        clinit = cf.method("<clinit>", "()V")
        if clinit is not None and clinit.code is not None:
            self.exec_method(binary, cf, clinit, [])

    def new_instance(self, binary):
        cf = self.try_load(binary)
        if cf is None:
            if not stdlib.is_known(binary):
                self.throw("java/lang/NoClassDefFoundError", binary.replace("/", "."))
            return JObject(binary)
        self.ensure_init(binary)
        obj = JObject(binary)
        cur = binary
        while cur:
            c = self.try_load(cur)
            if c is None:
                break
            for f in c.fields:
                if not f.is_static and f.name not in obj.fields:
                    obj.fields[f.name] = _default_value(f.descriptor)
            cur = c.superclass
        return obj

    # -- throwing --------------------------------------------------------

    def _raise(self, obj):
        if "__trace" not in obj.fields:
            obj.fields["__trace"] = [tuple(f) for f in reversed(self.frames)]
        raise JThrow(obj)

    def throw(self, cls, msg=None):
        obj = JObject(cls)
        obj.fields["__msg"] = msg
        self._raise(obj)

    # -- string/equality views --------------------------------------------

    def to_string(self, value):
        if value is None:
            return "null"
        if isinstance(value, str):
            return value
        if isinstance(value, JObject):
            return self.invoke_virtual(value, "toString", "()Ljava/lang/String;", [])
        if isinstance(value, JArray):
            return f"[{value.elem}@{id(value) & 0xFFFFFF:x}"
        return str(value)

    def j_equals(self, a, b):
        if a is None or b is None:
            return a is b
        if isinstance(a, str):
            return isinstance(b, str) and a == b
        if isinstance(a, JObject):
            return bool(self.invoke_virtual(a, "equals", "(Ljava/lang/Object;)Z", [b]))
        return a is b

    def runtime_class(self, value):
        if isinstance(value, str):
            return "java/lang/String"
        if isinstance(value, JObject):
            return value.cls
        if isinstance(value, JArray):
            return "[" + value.elem
        raise VMError(f"no runtime class for {value!r}")

    def instance_of(self, value, type_name):
        if value is None:
            return False
        if type_name.startswith("["):
            if not isinstance(value, JArray):
                return False
            want = type_name[1:]
            if value.elem == want:
                return True
            if want.startswith("L") and value.elem.startswith("L"):
                return self.is_subclass(value.elem[1:-1], want[1:-1])
            return False
        if isinstance(value, JArray):
            return type_name == "java/lang/Object"
        return self.is_subclass(self.runtime_class(value), type_name)

    # -- invocation --------------------------------------------------------

    def invoke_static(self, owner, name, desc, args):
        self.ensure_init(owner)
        cur = owner
        while cur:
            cf = self.try_load(cur)
            if cf is not None:
                m = cf.method(name, desc)
                if m is not None and m.code is not None:
                    return self.exec_method(cur, cf, m, args)
                cur = cf.superclass
                continue
            fn = _INTRINSICS.get((cur, name, desc))
            if fn is not None:
                return fn(self, None, args)
            cur = stdlib.superclass(cur)
        raise VMError(f"unresolved static {owner}.{name}{desc}")

    def invoke_virtual(self, recv, name, desc, args):
        if recv is None:
            self.throw("java/lang/NullPointerException",
                       f"cannot invoke {name}() on null")
        cls = self.runtime_class(recv)
        cur = "java/lang/Object" if isinstance(recv, JArray) else cls
        while cur:
            cf = self.try_load(cur)
            if cf is not None:
                m = cf.method(name, desc)
                if m is not None and m.code is not None:
                    return self.exec_method(cur, cf, m, [recv] + args)
                cur = cf.superclass
                continue
            fn = _INTRINSICS.get((cur, name, desc))
            if fn is not None:
                return fn(self, recv, args)
            cur = stdlib.superclass(cur)
        raise VMError(f"unresolved method {cls}.{name}{desc}")

    def invoke_special(self, owner, name, desc, recv, args):
        if recv is None:
            self.throw("java/lang/NullPointerException",
                       f"cannot invoke {name}() on null")
        cur = owner
        while cur:
            cf = self.try_load(cur)
            if cf is not None:
                m = cf.method(name, desc)
                if m is not None and m.code is not None:
                    return self.exec_method(cur, cf, m, [recv] + args)
                cur = cf.superclass
                continue
            fn = _INTRINSICS.get((cur, name, desc))
            if fn is not None:
                return fn(self, recv, args)
            cur = stdlib.superclass(cur)
        raise VMError(f"unresolved special {owner}.{name}{desc}")

    # -- frame execution ---------------------------------------------------

    def exec_method(self, binary, cf, m, args):
        if len(self.frames) >= MAX_FRAMES:
            self.throw("java/lang/StackOverflowError")
        code = m.code
        lo = [None] * code.max_locals
        slot = 0
        vals = list(args)
        if not m.is_static:
            lo[slot] = vals.pop(0)
            slot += 1
        for p, v in zip(_param_descs(m.descriptor), vals):
            lo[slot] = v
            slot += 2 if p in ("J", "D") else 1
        entry = [binary, m.name, cf.source_name or "Unknown", 0]
        self.frames.append(entry)
        try:
            return self._run(cf, code, lo, entry)
        finally:
            self.frames.pop()

    def _run(self, cf, code, lo, entry):
        pool = cf.pool
        instructions = code.instructions
        index = {ins.offset: k for k, ins in enumerate(instructions)}
        stack = []
        k = 0
        while True:
            ins = instructions[k]
            line = code.line_at(ins.offset)
            if line >= 0:
                entry[3] = line
            try:
                result = self._step(ins, stack, lo, pool, index)
            except JThrow as t:
                target = self._handler(code, ins.offset, t.obj)
                if target is None:
                    raise
                del stack[:]
                stack.append(t.obj)
                k = index[target]
                continue
            if result is None:
                k += 1
            elif result[0] == "jump":
                k = index[result[1]]
            else:  # ("return", value)
                return result[1]

    def _handler(self, code, pc, obj):
        for start, end, handler, catch in code.exception_table:
            if start <= pc < end:
                if catch is None or self.is_subclass(obj.cls, catch):
                    return handler
        return None

    def _step(self, ins, stack, lo, pool, index):
        m = ins.mnemonic
        push = stack.append
        pop = stack.pop

        if m == "nop":
            return None
        # ---- constants ----
        if m == "aconst_null":
            push(None)
            return None
        if m.startswith("iconst_"):
            push(-1 if m.endswith("m1") else int(m[-1]))
            return None
        if m.startswith("lconst_"):
            push(int(m[-1]))
            push(W2)
            return None
        if m.startswith("dconst_"):
            push(float(m[-1]))
            push(W2)
            return None
        if m in ("bipush", "sipush"):
            push(ins.operands[0])
            return None
        if m in ("ldc", "ldc_w"):
            push(self._ldc(pool, ins.operands[0]))
            return None
        if m == "ldc2_w":
            e = pool.entry(ins.operands[0])
            push(e.value)
            push(W2)
            return None
        # ---- locals ----
        if m.startswith(("iload", "aload", "lload", "dload", "fload")):
            slot = ins.operands[0] if ins.operands else int(m[-1])
            push(lo[slot])
            if m[0] in ("l", "d"):
                push(W2)
            return None
        if m.startswith(("istore", "astore", "lstore", "dstore", "fstore")):
            slot = ins.operands[0] if ins.operands else int(m[-1])
            if m[0] in ("l", "d"):
                pop()
            lo[slot] = pop()
            return None
        if m == "iinc":
            slot, delta = ins.operands
            lo[slot] = i32(lo[slot] + delta)
            return None
        # ---- arrays ----
        if m == "newarray":
            n = pop()
            if n < 0:
                self.throw("java/lang/NegativeArraySizeException", str(n))
            elem = {4: "Z", 5: "C", 6: "F", 7: "D", 8: "B", 9: "S", 10: "I", 11: "J"}[ins.operands[0]]
            fill = 0.0 if elem in ("F", "D") else 0
            push(JArray(elem, [fill] * n))
            return None
        if m == "anewarray":
            n = pop()
            if n < 0:
                self.throw("java/lang/NegativeArraySizeException", str(n))
            name = pool.class_name(ins.operands[0])
            elem = name if name.startswith("[") else f"L{name};"
            push(JArray(elem, [None] * n))
            return None
        if m == "arraylength":
            arr = pop()
            if arr is None:
                self.throw("java/lang/NullPointerException", "array is null")
            push(len(arr.data))
            return None
        if m.endswith("aload") and m[0] in "ilfdabcs":
            idx = pop()
            arr = pop()
            self._check_array(arr, idx)
            push(arr.data[idx])
            if m[0] in ("l", "d"):
                push(W2)
            return None
        if m.endswith("astore") and m[0] in "ilfdabcs":
            if m[0] in ("l", "d"):
                pop()
            v = pop()
            idx = pop()
            arr = pop()
            self._check_array(arr, idx)
            arr.data[idx] = v
            return None
        # ---- stack shuffles (word-accurate thanks to W2 sentinels) ----
        if m == "pop":
            pop()
            return None
        if m == "pop2":
            pop()
            pop()
            return None
        if m == "dup":
            push(stack[-1])
            return None
        if m == "dup_x1":
            v1, v2 = pop(), pop()
            stack.extend((v1, v2, v1))
            return None
        if m == "dup_x2":
            v1, v2, v3 = pop(), pop(), pop()
            stack.extend((v1, v3, v2, v1))
            return None
        if m == "dup2":
            stack.extend((stack[-2], stack[-1]))
            return None
        if m == "dup2_x1":
            v1, v2, v3 = pop(), pop(), pop()
            stack.extend((v2, v1, v3, v2, v1))
            return None
        if m == "dup2_x2":
            v1, v2, v3, v4 = pop(), pop(), pop(), pop()
            stack.extend((v2, v1, v4, v3, v2, v1))
            return None
        if m == "swap":
            stack[-1], stack[-2] = stack[-2], stack[-1]
            return None
        # ---- arithmetic ----
        if m[0] == "i" and m[1:] in ("add", "sub", "mul", "div", "rem", "shl",
                                     "shr", "ushr", "and", "or", "xor", "neg"):
            return self._int_arith(m[1:], stack, 32)
        if m[0] == "l" and m[1:] in ("add", "sub", "mul", "div", "rem", "shl",
                                     "shr", "ushr", "and", "or", "xor", "neg"):
            return self._int_arith(m[1:], stack, 64)
        if m[0] == "d" and m[1:] in ("add", "sub", "mul", "div", "rem", "neg"):
            if m[1:] == "neg":
                pop()
                v = pop()
                push(-v)
                push(W2)
                return None
            pop()
            b = pop()
            pop()
            a = pop()
            op = m[1:]
            if op == "add":
                r = a + b
            elif op == "sub":
                r = a - b
            elif op == "mul":
                r = a * b
            elif op == "div":
                r = _ddiv(a, b)
            else:
                r = _drem(a, b)
            push(r)
            push(W2)
            return None
        # ---- conversions ----
        if m in ("i2l", "i2d", "l2i", "l2d", "d2i", "d2l", "i2c", "i2b", "i2s", "l2f", "i2f", "d2f", "f2i", "f2l", "f2d"):
            return self._convert(m, stack)
        # ---- comparisons ----
        if m == "lcmp":
            pop()
            b = pop()
            pop()
            a = pop()
            push((a > b) - (a < b))
            return None
        if m in ("dcmpl", "dcmpg"):
            pop()
            b = pop()
            pop()
            a = pop()
            if math.isnan(a) or math.isnan(b):
                push(-1 if m == "dcmpl" else 1)
            else:
                push((a > b) - (a < b))
            return None
        # ---- branches ----
        if m in ("goto", "goto_w"):
            return ("jump", ins.offset + ins.operands[0])
        if m.startswith("if_icmp"):
            b = pop()
            a = pop()
            return self._branch(_COMPARES[m[7:]](a, b), ins)
        if m in ("if_acmpeq", "if_acmpne"):
            b = pop()
            a = pop()
            same = (a is b) or (isinstance(a, str) and isinstance(b, str) and a == b)
            return self._branch(same == (m == "if_acmpeq"), ins)
        if m == "ifnull":
            return self._branch(pop() is None, ins)
        if m == "ifnonnull":
            return self._branch(pop() is not None, ins)
        if m.startswith("if"):
            v = pop()
            return self._branch(_COMPARES[m[2:]](v, 0), ins)
        if m == "tableswitch":
            v = pop()
            _, default, low, high, offsets = ins.switch
            delta = offsets[v - low] if low <= v <= high else default
            return ("jump", ins.offset + delta)
        if m == "lookupswitch":
            v = pop()
            _, default, pairs = ins.switch
            delta = dict(pairs).get(v, default)
            return ("jump", ins.offset + delta)
        # ---- fields ----
        if m == "getstatic":
            cls, name, desc = pool.member_ref(ins.operands[0])
            push(self._get_static(cls, name, desc))
            if desc in ("J", "D"):
                push(W2)
            return None
        if m == "putstatic":
            cls, name, desc = pool.member_ref(ins.operands[0])
            if desc in ("J", "D"):
                pop()
            self._put_static(cls, name, pop())
            return None
        if m == "getfield":
            cls, name, desc = pool.member_ref(ins.operands[0])
            obj = pop()
            if obj is None:
                self.throw("java/lang/NullPointerException", f"cannot read field {name}")
            if name not in obj.fields:
                obj.fields[name] = _default_value(desc)
            push(obj.fields[name])
            if desc in ("J", "D"):
                push(W2)
            return None
        if m == "putfield":
            cls, name, desc = pool.member_ref(ins.operands[0])
            if desc in ("J", "D"):
                pop()
            v = pop()
            obj = pop()
            if obj is None:
                self.throw("java/lang/NullPointerException", f"cannot write field {name}")
            obj.fields[name] = v
            return None
        # ---- invocation ----
        if m in ("invokevirtual", "invokeinterface", "invokespecial", "invokestatic"):
            cls, name, desc = pool.member_ref(ins.operands[0])
            params = _param_descs(desc)
            args = []
            for p in reversed(params):
                if p in ("J", "D"):
                    pop()
                args.append(pop())
            args.reverse()
            if m == "invokestatic":
                ret = self.invoke_static(cls, name, desc, args)
            else:
                recv = pop()
                if m == "invokespecial":
                    ret = self.invoke_special(cls, name, desc, recv, args)
                else:
                    ret = self.invoke_virtual(recv, name, desc, args)
            rd = _return_desc(desc)
            if rd != "V":
                if rd == "Z" and isinstance(ret, bool):
                    ret = int(ret)
                push(ret)
                if rd in ("J", "D"):
                    push(W2)
            return None
        # ---- objects ----
        if m == "new":
            push(self.new_instance(pool.class_name(ins.operands[0])))
            return None
        if m == "checkcast":
            name = pool.class_name(ins.operands[0])
            v = stack[-1]
            if v is not None and not self.instance_of(v, name):
                self.throw(
                    "java/lang/ClassCastException",
                    f"class {self.runtime_class(v).replace('/', '.')} cannot be cast "
                    f"to class {name.replace('/', '.')}",
                )
            return None
        if m == "instanceof":
            name = pool.class_name(ins.operands[0])
            push(1 if self.instance_of(pop(), name) else 0)
            return None
        if m == "athrow":
            obj = pop()
            if obj is None:
                self.throw("java/lang/NullPointerException", "throwing null")
            self._raise(obj)
        if m in ("monitorenter", "monitorexit"):
            pop()
            return None
        # ---- returns ----
        if m == "return":
            return ("return", None)
        if m in ("ireturn", "areturn", "freturn"):
            return ("return", pop())
        if m in ("lreturn", "dreturn"):
            pop()
            return ("return", pop())
        raise VMError(f"unsupported instruction {m} at {ins.offset}")

    def _ldc(self, pool, idx):
        e = pool.entry(idx)
        if e.tag == 8:  # String
            return pool.utf8(e.ref1)
        if e.tag in (3, 4):  # Integer / Float
            return e.value
        if e.tag == 7:
            raise VMError("ldc of class constants is unsupported")
        raise VMError(f"ldc of cp tag {e.tag}")

    def _check_array(self, arr, idx):
        if arr is None:
            self.throw("java/lang/NullPointerException", "array is null")
        if idx < 0 or idx >= len(arr.data):
            self.throw(
                "java/lang/ArrayIndexOutOfBoundsException",
                f"Index {idx} out of bounds for length {len(arr.data)}",
            )

    def _int_arith(self, op, stack, bits):
        pop = stack.pop
        wide = bits == 64
        mask = i64 if wide else i32
        shift_mask = 63 if wide else 31
        if op == "neg":
            if wide:
                pop()
            v = pop()
            stack.append(mask(-v))
            if wide:
                stack.append(W2)
            return None
        if op in ("shl", "shr", "ushr"):
            s = pop() & shift_mask  # shift count is always a category-1 int
            if wide:
                pop()
            a = pop()
        else:
            if wide:
                pop()
            b = pop()
            if wide:
                pop()
            a = pop()
        if op == "add":
            r = a + b
        elif op == "sub":
            r = a - b
        elif op == "mul":
            r = a * b
        elif op in ("div", "rem"):
            if b == 0:
                self.throw("java/lang/ArithmeticException", "/ by zero")
            r = _jdiv(a, b) if op == "div" else _jrem(a, b)
        elif op == "and":
            r = a & b
        elif op == "or":
            r = a | b
        elif op == "xor":
            r = a ^ b
        elif op == "shl":
            r = a << s
        elif op == "shr":
            r = a >> s
        elif op == "ushr":
            r = (a & (LONG_MASK if wide else INT_MASK)) >> s
        stack.append(mask(r))
        if wide:
            stack.append(W2)
        return None

    def _convert(self, m, stack):
        pop = stack.pop
        if m[0] in ("l", "d"):
            pop()
        v = pop()
        if m == "i2l":
            stack.append(v)
            stack.append(W2)
        elif m == "i2d":
            stack.append(float(v))
            stack.append(W2)
        elif m == "l2i":
            stack.append(i32(v))
        elif m == "l2d":
            stack.append(float(v))
            stack.append(W2)
        elif m == "d2i":
            stack.append(_d2i(v, -(2 ** 31), 2 ** 31 - 1))
        elif m == "d2l":
            stack.append(_d2i(v, -(2 ** 63), 2 ** 63 - 1))
            stack.append(W2)
        elif m == "i2c":
            stack.append(v & 0xFFFF)
        elif m == "i2b":
            stack.append(((v & 0xFF) + 0x80) % 0x100 - 0x80)
        elif m == "i2s":
            stack.append(((v & 0xFFFF) + 0x8000) % 0x10000 - 0x8000)
        else:
            raise VMError(f"unsupported conversion {m}")
        return None

    def _branch(self, taken, ins):
        if taken:
            return ("jump", ins.offset + ins.operands[0])
        return None

    def _get_static(self, cls, name, desc):
        cur = cls
        while cur:
            cf = self.try_load(cur)
            if cf is not None:
                self.ensure_init(cur)
                if cur in self.statics and name in self.statics[cur]:
                    return self.statics[cur][name]
                cur = cf.superclass
                continue
            if cur == "java/lang/System" and name in self._sys_streams:
                return self._sys_streams[name]
            hit = stdlib.fields_of(cur).get(name)
            if hit is not None:
                return _STDLIB_STATICS[(cur, name)]
            cur = stdlib.superclass(cur)
        raise VMError(f"unresolved static field {cls}.{name}")

    def _put_static(self, cls, name, value):
        cur = cls
        while cur:
            cf = self.try_load(cur)
            if cf is None:
                break
            self.ensure_init(cur)
            if cur in self.statics and name in self.statics[cur]:
                self.statics[cur][name] = value
                return
            cur = cf.superclass
        raise VMError(f"unresolved static field {cls}.{name}")

    def _stream(self, recv):
        return self.stdout if recv.payload == "out" else self.stderr

    # -- entry points ------------------------------------------------------

    def run_main(self, main_class, args=()):
        binary = main_class.replace(".", "/")
        argv = JArray("Ljava/lang/String;", [str(a) for a in args])
        cf = self.try_load(binary)
        intrinsic = _INTRINSICS.get((binary, "main", "([Ljava/lang/String;)V"))
        if cf is None and intrinsic is None:
            self.stderr.write(f"Error: Could not find or load main class {main_class}\n")
            return 1
        if cf is not None:
            m = cf.method("main", "([Ljava/lang/String;)V")
            if m is None or not m.is_static:
                self.stderr.write(f"Error: Main method not found in class {main_class}\n")
                return 1
        try:
            if cf is not None:
                self.ensure_init(binary)
                self.invoke_static(binary, "main", "([Ljava/lang/String;)V", [argv])
            else:
                intrinsic(self, None, [argv])
            return 0
        except SysExit as e:
            return e.code
        except JThrow as t:
            self.print_uncaught(t.obj)
            return 1
        except RecursionError:
            self.stderr.write('Exception in thread "main" java.lang.StackOverflowError\n')
            return 1

    def print_uncaught(self, obj):
        self.stderr.write('Exception in thread "main" ' + self.throwable_str(obj) + "\n")
        for binary, method, source, line in obj.fields.get("__trace", []):
            where = f"{source}:{line}" if line > 0 else source
            self.stderr.write(f"\tat {binary.replace('/', '.')}.{method}({where})\n")

    def throwable_str(self, obj):
        return self.invoke_virtual(obj, "toString", "()Ljava/lang/String;", [])


_COMPARES = {
    "eq": lambda a, b: a == b,
    "ne": lambda a, b: a != b,
    "lt": lambda a, b: a < b,
    "le": lambda a, b: a <= b,
    "gt": lambda a, b: a > b,
    "ge": lambda a, b: a >= b,
}

_STDLIB_STATICS = {
    ("java/lang/Integer", "MAX_VALUE"): 2 ** 31 - 1,
    ("java/lang/Integer", "MIN_VALUE"): -(2 ** 31),
    ("java/lang/Long", "MAX_VALUE"): 2 ** 63 - 1,
    ("java/lang/Long", "MIN_VALUE"): -(2 ** 63),
}


# ---------------------------------------------------------------------------
# intrinsics
# ---------------------------------------------------------------------------

_INTRINSICS = {}

_S = "Ljava/lang/String;"
_O = "Ljava/lang/Object;"
_SB = "Ljava/lang/StringBuilder;"


def _reg(owner, name, desc, fn):
    _INTRINSICS[(owner, name, desc)] = fn


def _default_to_string(vm, r, a):
    cls = vm.runtime_class(r)
    return f"{cls.replace('/', '.')}@{id(r) & 0xFFFFFFF:x}"


def _num_format(vm, value, desc):
    if desc == "D":
        return _dstr(value)
    if desc == "Z":
        return "true" if value else "false"
    if desc == "C":
        return chr(value & 0xFFFF)
    if desc in ("I", "J"):
        return str(value)
    return vm.to_string(value)


def _parse_int_like(vm, s, bits):
    if s is None:
        vm.throw("java/lang/NumberFormatException", "null")
    try:
        if "_" in s:  # int() tolerates underscores, Java does not
            raise ValueError
        v = int(s, 10)
    except ValueError:
        vm.throw("java/lang/NumberFormatException", f'For input string: "{s}"')
    lo, hi = -(2 ** (bits - 1)), 2 ** (bits - 1) - 1
    if not lo <= v <= hi:
        vm.throw("java/lang/NumberFormatException", f'For input string: "{s}"')
    return v


def _assert_error(vm, msg):
    obj = JObject("java/lang/AssertionError")
    obj.fields["__msg"] = msg
    vm._raise(obj)


def _mismatch(vm, message, expected, actual):
    prefix = f"{message} " if message else ""
    _assert_error(vm, f"{prefix}expected:<{expected}> but was:<{actual}>")


def _build_intrinsics():
    O, S = "java/lang/Object", "java/lang/String"

    _reg(O, "<init>", "()V", lambda vm, r, a: None)
    _reg(O, "toString", f"(){_S}", _default_to_string)
    _reg(O, "equals", f"({_O})Z", lambda vm, r, a: 1 if r is a[0] else 0)
    _reg(O, "hashCode", "()I", lambda vm, r, a: id(r) & 0x7FFFFFFF)

    # String (receiver is a Python str)
    _reg(S, "length", "()I", lambda vm, r, a: len(r))
    _reg(S, "isEmpty", "()Z", lambda vm, r, a: 1 if not r else 0)
    _reg(S, "charAt", "(I)C", _string_char_at)
    _reg(S, "indexOf", f"({_S})I", lambda vm, r, a: r.find(a[0]))
    _reg(S, "contains", "(Ljava/lang/CharSequence;)Z",
         lambda vm, r, a: 1 if a[0] in r else 0)
    _reg(S, "concat", f"({_S}){_S}", lambda vm, r, a: r + a[0])
    _reg(S, "substring", f"(I){_S}", _string_substring1)
    _reg(S, "substring", f"(II){_S}", _string_substring2)
    _reg(S, "equals", f"({_O})Z",
         lambda vm, r, a: 1 if isinstance(a[0], str) and r == a[0] else 0)
    _reg(S, "startsWith", f"({_S})Z", lambda vm, r, a: 1 if r.startswith(a[0]) else 0)
    _reg(S, "endsWith", f"({_S})Z", lambda vm, r, a: 1 if r.endswith(a[0]) else 0)
    _reg(S, "trim", f"(){_S}", lambda vm, r, a: r.strip())
    _reg(S, "toUpperCase", f"(){_S}", lambda vm, r, a: r.upper())
    _reg(S, "toLowerCase", f"(){_S}", lambda vm, r, a: r.lower())
    _reg(S, "replace", f"(CC){_S}",
         lambda vm, r, a: r.replace(chr(a[0] & 0xFFFF), chr(a[1] & 0xFFFF)))
    _reg(S, "toString", f"(){_S}", lambda vm, r, a: r)
    _reg(S, "hashCode", "()I", _string_hash)
    for d, fmt in (("I", "I"), ("J", "J"), ("D", "D"), ("Z", "Z"), ("C", "C")):
        _reg(S, "valueOf", f"({d}){_S}",
             (lambda f: lambda vm, r, a: _num_format(vm, a[0], f))(fmt))
    _reg(S, "valueOf", f"({_O}){_S}", lambda vm, r, a: vm.to_string(a[0]))

    # StringBuilder (payload is a list of string pieces)
    SB = "java/lang/StringBuilder"
    _reg(SB, "<init>", "()V", _sb_init_empty)
    _reg(SB, "<init>", f"({_S})V", _sb_init_str)
    for d in ("I", "J", "D", "Z", "C"):
        _reg(SB, "append", f"({d}){_SB}",
             (lambda f: lambda vm, r, a: _sb_append(vm, r, _num_format(vm, a[0], f)))(d))
    _reg(SB, "append", f"({_S}){_SB}",
         lambda vm, r, a: _sb_append(vm, r, a[0] if a[0] is not None else "null"))
    _reg(SB, "append", f"({_O}){_SB}",
         lambda vm, r, a: _sb_append(vm, r, vm.to_string(a[0])))
    _reg(SB, "toString", f"(){_S}", lambda vm, r, a: "".join(r.payload))

    # Math
    M = "java/lang/Math"
    _reg(M, "abs", "(I)I", lambda vm, r, a: i32(abs(a[0])))
    _reg(M, "abs", "(J)J", lambda vm, r, a: i64(abs(a[0])))
    _reg(M, "abs", "(D)D", lambda vm, r, a: abs(a[0]))
    _reg(M, "max", "(II)I", lambda vm, r, a: max(a[0], a[1]))
    _reg(M, "max", "(JJ)J", lambda vm, r, a: max(a[0], a[1]))
    _reg(M, "max", "(DD)D", lambda vm, r, a: _dmax(a[0], a[1]))
    _reg(M, "min", "(II)I", lambda vm, r, a: min(a[0], a[1]))
    _reg(M, "min", "(JJ)J", lambda vm, r, a: min(a[0], a[1]))
    _reg(M, "min", "(DD)D", lambda vm, r, a: _dmin(a[0], a[1]))
    _reg(M, "sqrt", "(D)D", lambda vm, r, a: math.sqrt(a[0]) if a[0] >= 0 else math.nan)
    _reg(M, "pow", "(DD)D", _math_pow)
    _reg(M, "floor", "(D)D", lambda vm, r, a: float(math.floor(a[0])) if math.isfinite(a[0]) else a[0])
    _reg(M, "ceil", "(D)D", lambda vm, r, a: float(math.ceil(a[0])) if math.isfinite(a[0]) else a[0])

    # System
    SYS = "java/lang/System"
    _reg(SYS, "exit", "(I)V", _system_exit)
    _reg(SYS, "currentTimeMillis", "()J", lambda vm, r, a: 0)
    _reg(SYS, "nanoTime", "()J", lambda vm, r, a: 0)
    _reg(SYS, "lineSeparator", f"(){_S}", lambda vm, r, a: "\n")

    # boxed-type statics
    _reg("java/lang/Integer", "parseInt", f"({_S})I",
         lambda vm, r, a: _parse_int_like(vm, a[0], 32))
    _reg("java/lang/Integer", "toString", f"(I){_S}", lambda vm, r, a: str(a[0]))
    _reg("java/lang/Long", "parseLong", f"({_S})J",
         lambda vm, r, a: _parse_int_like(vm, a[0], 64))
    _reg("java/lang/Long", "toString", f"(J){_S}", lambda vm, r, a: str(a[0]))
    _reg("java/lang/Double", "parseDouble", f"({_S})D", _parse_double)
    _reg("java/lang/Double", "toString", f"(D){_S}", lambda vm, r, a: _dstr(a[0]))
    _reg("java/lang/Double", "isNaN", "(D)Z", lambda vm, r, a: 1 if math.isnan(a[0]) else 0)
    _reg("java/lang/Boolean", "parseBoolean", f"({_S})Z",
         lambda vm, r, a: 1 if a[0] is not None and a[0].lower() == "true" else 0)
    _reg("java/lang/Boolean", "toString", f"(Z){_S}",
         lambda vm, r, a: "true" if a[0] else "false")

    # PrintStream
    PS = "java/io/PrintStream"
    _reg(PS, "println", "()V", lambda vm, r, a: vm._stream(r).write("\n"))
    for d in ("I", "J", "D", "Z", "C"):
        _reg(PS, "println", f"({d})V",
             (lambda f: lambda vm, r, a: vm._stream(r).write(_num_format(vm, a[0], f) + "\n"))(d))
        _reg(PS, "print", f"({d})V",
             (lambda f: lambda vm, r, a: vm._stream(r).write(_num_format(vm, a[0], f)))(d))
    _reg(PS, "println", f"({_S})V",
         lambda vm, r, a: vm._stream(r).write(("null" if a[0] is None else a[0]) + "\n"))
    _reg(PS, "print", f"({_S})V",
         lambda vm, r, a: vm._stream(r).write("null" if a[0] is None else a[0]))
    _reg(PS, "println", f"({_O})V",
         lambda vm, r, a: vm._stream(r).write(vm.to_string(a[0]) + "\n"))
    _reg(PS, "print", f"({_O})V",
         lambda vm, r, a: vm._stream(r).write(vm.to_string(a[0])))
    _reg(PS, "flush", "()V", lambda vm, r, a: None)

    # File (payload is the path string)
    F = "java/io/File"
    _reg(F, "<init>", f"({_S})V", _file_init)
    _reg(F, "getPath", f"(){_S}", lambda vm, r, a: r.payload)
    _reg(F, "getName", f"(){_S}", lambda vm, r, a: os.path.basename(r.payload))
    _reg(F, "exists", "()Z", lambda vm, r, a: 1 if os.path.exists(r.payload) else 0)
    _reg(F, "isFile", "()Z", lambda vm, r, a: 1 if os.path.isfile(r.payload) else 0)
    _reg(F, "isDirectory", "()Z", lambda vm, r, a: 1 if os.path.isdir(r.payload) else 0)
    _reg(F, "toString", f"(){_S}", lambda vm, r, a: r.payload)

    # ArrayList (payload is a Python list)
    AL = "java/util/ArrayList"
    _reg(AL, "<init>", "()V", _list_init)
    _reg(AL, "add", f"({_O})Z", _list_add)
    _reg(AL, "get", f"(I){_O}", _list_get)
    _reg(AL, "size", "()I", lambda vm, r, a: len(r.payload))
    _reg(AL, "isEmpty", "()Z", lambda vm, r, a: 1 if not r.payload else 0)
    _reg(AL, "contains", f"({_O})Z",
         lambda vm, r, a: 1 if any(vm.j_equals(x, a[0]) for x in r.payload) else 0)
    _reg(AL, "clear", "()V", lambda vm, r, a: r.payload.clear())
    _reg(AL, "remove", f"(I){_O}", _list_remove)
    _reg(AL, "set", f"(I{_O}){_O}", _list_set)
    _reg(AL, "toString", f"(){_S}",
         lambda vm, r, a: "[" + ", ".join(vm.to_string(x) for x in r.payload) + "]")

    # Throwable family
    T = "java/lang/Throwable"
    _reg(T, "<init>", "()V", _throwable_init0)
    _reg(T, "<init>", f"({_S})V", _throwable_init1)
    _reg(T, "getMessage", f"(){_S}", lambda vm, r, a: r.fields.get("__msg"))
    _reg(T, "toString", f"(){_S}", _throwable_to_string)
    AE = "java/lang/AssertionError"
    _reg(AE, "<init>", "()V", _throwable_init0)
    _reg(AE, "<init>", f"({_O})V",
         lambda vm, r, a: r.fields.__setitem__("__msg", vm.to_string(a[0])))

    _build_junit()


def _string_char_at(vm, r, a):
    i = a[0]
    if i < 0 or i >= len(r):
        vm.throw("java/lang/IndexOutOfBoundsException",
                 f"index {i}, length {len(r)}")
    return ord(r[i])


def _string_substring1(vm, r, a):
    i = a[0]
    if i < 0 or i > len(r):
        vm.throw("java/lang/IndexOutOfBoundsException", f"begin {i}, length {len(r)}")
    return r[i:]


def _string_substring2(vm, r, a):
    i, j = a
    if i < 0 or j > len(r) or i > j:
        vm.throw("java/lang/IndexOutOfBoundsException",
                 f"begin {i}, end {j}, length {len(r)}")
    return r[i:j]


def _string_hash(vm, r, a):
    h = 0
    for ch in r:
        h = i32(31 * h + ord(ch))
    return h


def _sb_init_empty(vm, r, a):
    r.payload = []


def _sb_init_str(vm, r, a):
    r.payload = [a[0] if a[0] is not None else "null"]


def _sb_append(vm, r, piece):
    r.payload.append(piece)
    return r


def _dmax(a, b):
    if math.isnan(a) or math.isnan(b):
        return math.nan
    return max(a, b)


def _dmin(a, b):
    if math.isnan(a) or math.isnan(b):
        return math.nan
    return min(a, b)


def _math_pow(vm, r, a):
    base, exp = a
    try:
        v = math.pow(base, exp)
    except (ValueError, OverflowError):
        return math.nan
    return v


def _system_exit(vm, r, a):
    raise SysExit(a[0])


def _parse_double(vm, r, a):
    s = a[0]
    if s is None:
        vm.throw("java/lang/NullPointerException")
    try:
        if "_" in s:
            raise ValueError
        return float(s.strip())
    except ValueError:
        vm.throw("java/lang/NumberFormatException", f'For input string: "{s}"')


def _file_init(vm, r, a):
    if a[0] is None:
        vm.throw("java/lang/NullPointerException")
    r.payload = a[0]


def _list_init(vm, r, a):
    r.payload = []


def _list_add(vm, r, a):
    r.payload.append(a[0])
    return 1


def _list_get(vm, r, a):
    i = a[0]
    if i < 0 or i >= len(r.payload):
        vm.throw("java/lang/IndexOutOfBoundsException",
                 f"Index {i} out of bounds for length {len(r.payload)}")
    return r.payload[i]


def _list_remove(vm, r, a):
    i = a[0]
    if i < 0 or i >= len(r.payload):
        vm.throw("java/lang/IndexOutOfBoundsException",
                 f"Index {i} out of bounds for length {len(r.payload)}")
    return r.payload.pop(i)


def _list_set(vm, r, a):
    i, v = a
    if i < 0 or i >= len(r.payload):
        vm.throw("java/lang/IndexOutOfBoundsException",
                 f"Index {i} out of bounds for length {len(r.payload)}")
    old = r.payload[i]
    r.payload[i] = v
    return old


def _throwable_init0(vm, r, a):
    r.fields.setdefault("__msg", None)


def _throwable_init1(vm, r, a):
    r.fields["__msg"] = a[0]


def _throwable_to_string(vm, r, a):
    name = r.cls.replace("/", ".")
    msg = r.fields.get("__msg")
    return f"{name}: {msg}" if msg is not None else name


# ---------------------------------------------------------------------------
# JUnit 4 assertions and console runner
# ---------------------------------------------------------------------------


def _fmt_ref(vm, v):
    return vm.to_string(v) if v is not None else "null"


def _assert_true(vm, message, cond):
    if not cond:
        _assert_error(vm, message)


def _junit_assert_equals_obj(vm, message, expected, actual):
    if not vm.j_equals(expected, actual):
        _mismatch(vm, message, _fmt_ref(vm, expected), _fmt_ref(vm, actual))


def _junit_assert_equals_long(vm, message, expected, actual):
    if expected != actual:
        _mismatch(vm, message, expected, actual)


def _junit_assert_equals_double(vm, message, expected, actual, delta):
    if math.isnan(expected) and math.isnan(actual):
        return
    if expected == actual:
        return
    if abs(expected - actual) <= delta:
        return
    _mismatch(vm, message, _dstr(expected), _dstr(actual))


def _build_junit():
    A = "org/junit/Assert"
    _reg(A, "assertTrue", "(Z)V", lambda vm, r, a: _assert_true(vm, None, a[0]))
    _reg(A, "assertTrue", f"({_S}Z)V", lambda vm, r, a: _assert_true(vm, a[0], a[1]))
    _reg(A, "assertFalse", "(Z)V", lambda vm, r, a: _assert_true(vm, None, not a[0]))
    _reg(A, "assertFalse", f"({_S}Z)V", lambda vm, r, a: _assert_true(vm, a[0], not a[1]))
    _reg(A, "assertEquals", f"({_O}{_O})V",
         lambda vm, r, a: _junit_assert_equals_obj(vm, None, a[0], a[1]))
    _reg(A, "assertEquals", f"({_S}{_O}{_O})V",
         lambda vm, r, a: _junit_assert_equals_obj(vm, a[0], a[1], a[2]))
    _reg(A, "assertEquals", "(JJ)V",
         lambda vm, r, a: _junit_assert_equals_long(vm, None, a[0], a[1]))
    _reg(A, "assertEquals", "(DD)V",
         lambda vm, r, a: _assert_error(
             vm, "Use assertEquals(expected, actual, delta) to compare floating-point numbers"))
    _reg(A, "assertEquals", "(DDD)V",
         lambda vm, r, a: _junit_assert_equals_double(vm, None, a[0], a[1], a[2]))
    _reg(A, "assertNotNull", f"({_O})V",
         lambda vm, r, a: _assert_true(vm, None, a[0] is not None))
    _reg(A, "assertNotNull", f"({_S}{_O})V",
         lambda vm, r, a: _assert_true(vm, a[0], a[1] is not None))
    _reg(A, "assertNull", f"({_O})V",
         lambda vm, r, a: a[0] is None or _mismatch(vm, None, "null", _fmt_ref(vm, a[0])))
    _reg(A, "assertNull", f"({_S}{_O})V",
         lambda vm, r, a: a[1] is None or _mismatch(vm, a[0], "null", _fmt_ref(vm, a[1])))
    _reg(A, "assertSame", f"({_O}{_O})V",
         lambda vm, r, a: _assert_true(vm, None, a[0] is a[1]))
    _reg(A, "fail", "()V", lambda vm, r, a: _assert_error(vm, None))
    _reg(A, "fail", f"({_S})V", lambda vm, r, a: _assert_error(vm, a[0]))

    J5 = "org/junit/jupiter/api/Assertions"
    _reg(J5, "assertTrue", "(Z)V", lambda vm, r, a: _assert_true(vm, None, a[0]))
    _reg(J5, "assertFalse", "(Z)V", lambda vm, r, a: _assert_true(vm, None, not a[0]))
    _reg(J5, "assertEquals", f"({_O}{_O})V",
         lambda vm, r, a: _junit_assert_equals_obj(vm, None, a[0], a[1]))
    _reg(J5, "assertEquals", "(JJ)V",
         lambda vm, r, a: _junit_assert_equals_long(vm, None, a[0], a[1]))
    _reg(J5, "assertEquals", "(DD)V",
         lambda vm, r, a: _junit_assert_equals_double(vm, None, a[0], a[1], 0.0))
    _reg(J5, "assertEquals", "(DDD)V",
         lambda vm, r, a: _junit_assert_equals_double(vm, None, a[0], a[1], a[2]))
    _reg(J5, "assertNotNull", f"({_O})V",
         lambda vm, r, a: _assert_true(vm, None, a[0] is not None))
    _reg(J5, "assertNull", f"({_O})V",
         lambda vm, r, a: _assert_true(vm, None, a[0] is None))
    _reg(J5, "fail", "()V", lambda vm, r, a: _assert_error(vm, None))
    _reg(J5, "fail", f"({_S})V", lambda vm, r, a: _assert_error(vm, a[0]))

    _reg("org/junit/runner/JUnitCore", "main", f"([{_S})V", _junit_core_main)


def _has_annotation(method_info, binary):
    return f"L{binary};" in method_info.annotations


def _collect_hooks(vm, binary, annotation, static, super_first):
    chain = []
    cur = binary
    while cur:
        cf = vm.try_load(cur)
        if cf is None:
            break
        chain.append(cf)
        cur = cf.superclass
    if super_first:
        chain.reverse()
    hooks = []
    for cf in chain:
        for m in cf.methods:
            if m.is_static == static and _has_annotation(m, annotation):
                hooks.append((cf.binary_name, m))
    return hooks


def _junit_core_main(vm, _recv, args):
    names = [n for n in args[0].data]
    out = vm.stdout
    out.write("JUnit version 4.13.2\n")
    total, failures = 0, []
    for dotted in names:
        binary = dotted.replace(".", "/")
        cf = vm.try_load(binary)
        if cf is None:
            failures.append((f"initializationError({dotted})",
                             f"java.lang.ClassNotFoundException: {dotted}"))
            out.write("E")
            total += 1
            continue
        tests = [
            m for m in cf.methods
            if not m.is_static
            and _has_annotation(m, "org/junit/Test")
            and not _has_annotation(m, "org/junit/Ignore")
        ]
        befores = _collect_hooks(vm, binary, "org/junit/Before", False, super_first=True)
        afters = _collect_hooks(vm, binary, "org/junit/After", False, super_first=False)
        before_classes = _collect_hooks(vm, binary, "org/junit/BeforeClass", True, super_first=True)
        after_classes = _collect_hooks(vm, binary, "org/junit/AfterClass", True, super_first=False)
        try:
            vm.ensure_init(binary)
            for owner, hook in before_classes:
                vm.invoke_static(owner, hook.name, hook.descriptor, [])
        except JThrow as t:
            total += 1
            out.write("E")
            failures.append((f"{dotted}", vm.throwable_str(t.obj)))
            continue
        for m in tests:
            total += 1
            out.write(".")
            label = f"{m.name}({dotted})"
            failed = None
            instance = None
            try:
                instance = vm.new_instance(binary)
                vm.invoke_special(binary, "<init>", "()V", instance, [])
                for owner, hook in befores:
                    vm.invoke_virtual(instance, hook.name, hook.descriptor, [])
                vm.invoke_virtual(instance, m.name, m.descriptor, [])
            except JThrow as t:
                failed = t
            if instance is not None:
                try:
                    for owner, hook in afters:
                        vm.invoke_virtual(instance, hook.name, hook.descriptor, [])
                except JThrow as t:
                    failed = failed or t
            if failed is not None:
                out.write("E")
                failures.append((label, vm.throwable_str(failed.obj)))
        try:
            for owner, hook in after_classes:
                vm.invoke_static(owner, hook.name, hook.descriptor, [])
        except JThrow as t:
            failures.append((dotted, vm.throwable_str(t.obj)))
    out.write("\nTime: 0\n")
    if failures:
        noun = "failure" if len(failures) == 1 else "failures"
        out.write(f"There {'was' if len(failures) == 1 else 'were'} {len(failures)} {noun}:\n")
        for i, (label, text) in enumerate(failures, 1):
            out.write(f"{i}) {label}\n{text}\n")
        out.write(f"\nFAILURES!!!\nTests run: {total},  Failures: {len(failures)}\n")
        raise SysExit(1)
    out.write(f"\nOK ({total} test{'s' if total != 1 else ''})\n")
    raise SysExit(0)


_build_intrinsics()
