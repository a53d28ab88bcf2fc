"""Classfile serialization and construction helpers."""

from __future__ import annotations

import struct

from .descriptors import parse_method_descriptor
from .model import (
    ACC_SUPER,
    ACC_PUBLIC,
    Attribute,
    ClassFile,
    ConstantPool,
    CpEntry,
    CP_CLASS,
    CP_DOUBLE,
    CP_FIELDREF,
    CP_FLOAT,
    CP_INTEGER,
    CP_INTERFACE_METHODREF,
    CP_INVOKE_DYNAMIC,
    CP_DYNAMIC,
    CP_LONG,
    CP_METHOD_HANDLE,
    CP_METHOD_TYPE,
    CP_METHODREF,
    CP_MODULE,
    CP_NAME_AND_TYPE,
    CP_PACKAGE,
    CP_STRING,
    CP_UTF8,
    FieldInfo,
    MalformedBytecode,
    MethodInfo,
)
from .opcodes import MNEMONIC_TO_CODE, OPCODES
from .parser import MAGIC, decode_instructions


def write_classfile(cf):
    """Serialize a ClassFile; inverse of parse_classfile on the modeled fields."""
    utf8_index = {}
    for i, e in enumerate(cf.pool.entries):
        if e is not None and e.tag == CP_UTF8 and e.value not in utf8_index:
            utf8_index[e.value] = i
    buf = bytearray()
    buf += struct.pack(">IHH", MAGIC, cf.minor, cf.major)
    buf += _pool_bytes(cf.pool)
    buf += struct.pack(">HHH", cf.access_flags, cf.this_index, cf.super_index)
    buf += struct.pack(">H", len(cf.interface_indices))
    for idx in cf.interface_indices:
        buf += struct.pack(">H", idx)
    for members in (cf.fields, cf.methods):
        buf += struct.pack(">H", len(members))
        for m in members:
            buf += struct.pack(
                ">HHH", m.access_flags, utf8_index[m.name], utf8_index[m.descriptor]
            )
            buf += _attr_bytes(m.attributes, utf8_index)
    buf += _attr_bytes(cf.attributes, utf8_index)
    return bytes(buf)


def _pool_bytes(pool):
    buf = bytearray(struct.pack(">H", len(pool.entries)))
    skip = False
    for i, e in enumerate(pool.entries):
        if i == 0:
            continue
        if skip:
            skip = False
            continue
        buf.append(e.tag)
        if e.tag == CP_UTF8:
            raw = e.value.encode("utf-8", "surrogateescape")
            buf += struct.pack(">H", len(raw)) + raw
        elif e.tag == CP_INTEGER:
            buf += struct.pack(">i", e.value)
        elif e.tag == CP_FLOAT:
            buf += struct.pack(">f", e.value)
        elif e.tag == CP_LONG:
            buf += struct.pack(">q", e.value)
            skip = True
        elif e.tag == CP_DOUBLE:
            buf += struct.pack(">d", e.value)
            skip = True
        elif e.tag in (CP_CLASS, CP_STRING, CP_METHOD_TYPE, CP_MODULE, CP_PACKAGE):
            buf += struct.pack(">H", e.ref1)
        elif e.tag == CP_METHOD_HANDLE:
            buf += struct.pack(">BH", e.ref1, e.ref2)
        elif e.tag in (
            CP_FIELDREF, CP_METHODREF, CP_INTERFACE_METHODREF,
            CP_NAME_AND_TYPE, CP_DYNAMIC, CP_INVOKE_DYNAMIC,
        ):
            buf += struct.pack(">HH", e.ref1, e.ref2)
        else:
            raise MalformedBytecode(f"cannot serialize constant pool tag {e.tag}")
    return bytes(buf)


def _attr_bytes(attrs, utf8_index):
    buf = bytearray(struct.pack(">H", len(attrs)))
    for a in attrs:
        buf += struct.pack(">HI", utf8_index[a.name], len(a.payload))
        buf += a.payload
    return bytes(buf)


class ClassFileBuilder:
    """Incrementally assemble a ClassFile with an interned constant pool."""

    def __init__(self, binary_name, superclass="java/lang/Object", major=49,
                 access=ACC_PUBLIC | ACC_SUPER, interfaces=()):
        self.entries = [None]
        self._interned = {}
        self.major = major
        self.access = access
        self.fields = []
        self.methods = []
        self.attributes = []
        self.this_index = self.klass(binary_name)
        self.super_index = self.klass(superclass) if superclass else 0
        self.interface_indices = tuple(self.klass(i) for i in interfaces)
        self.binary_name = binary_name
        self.superclass = superclass
        self.interfaces = list(interfaces)

    def _intern(self, key, make):
        idx = self._interned.get(key)
        if idx is None:
            entry, wide = make()
            idx = len(self.entries)
            self.entries.append(entry)
            if wide:
                self.entries.append(None)
            self._interned[key] = idx
        return idx

    def utf8(self, s):
        return self._intern(("u", s), lambda: (CpEntry(CP_UTF8, value=s), False))

    def klass(self, name):
        return self._intern(("c", name), lambda: (CpEntry(CP_CLASS, ref1=self.utf8(name)), False))

    def string(self, s):
        return self._intern(("s", s), lambda: (CpEntry(CP_STRING, ref1=self.utf8(s)), False))

    def integer(self, v):
        return self._intern(("i", v), lambda: (CpEntry(CP_INTEGER, value=v), False))

    def float_(self, v):
        return self._intern(("f", struct.pack(">f", v)), lambda: (CpEntry(CP_FLOAT, value=v), False))

    def long_(self, v):
        return self._intern(("j", v), lambda: (CpEntry(CP_LONG, value=v), True))

    def double_(self, v):
        return self._intern(("d", struct.pack(">d", v)), lambda: (CpEntry(CP_DOUBLE, value=v), True))

    def name_and_type(self, name, desc):
        return self._intern(
            ("nt", name, desc),
            lambda: (CpEntry(CP_NAME_AND_TYPE, ref1=self.utf8(name), ref2=self.utf8(desc)), False),
        )

    def _member(self, tag, key, cls, name, desc):
        return self._intern(
            (key, cls, name, desc),
            lambda: (CpEntry(tag, ref1=self.klass(cls), ref2=self.name_and_type(name, desc)), False),
        )

    def fieldref(self, cls, name, desc):
        return self._member(CP_FIELDREF, "fr", cls, name, desc)

    def methodref(self, cls, name, desc):
        return self._member(CP_METHODREF, "mr", cls, name, desc)

    def interface_methodref(self, cls, name, desc):
        return self._member(CP_INTERFACE_METHODREF, "ir", cls, name, desc)

    def add_field(self, access, name, desc):
        self.utf8(name)
        self.utf8(desc)
        self.fields.append(FieldInfo(access, name, desc, []))

    def annotations_attribute(self, type_descs):
        payload = bytearray(struct.pack(">H", len(type_descs)))
        for td in type_descs:
            payload += struct.pack(">HH", self.utf8(td), 0)
        self.utf8("RuntimeVisibleAnnotations")
        return Attribute("RuntimeVisibleAnnotations", bytes(payload))

    def source_file_attribute(self, filename):
        self.utf8("SourceFile")
        return Attribute("SourceFile", struct.pack(">H", self.utf8(filename)))

    def add_method(self, access, name, desc, asm=None, annotations=()):
        self.utf8(name)
        self.utf8(desc)
        attrs = []
        if asm is not None:
            attrs.append(asm.to_attribute(self))
        if annotations:
            attrs.append(self.annotations_attribute(list(annotations)))
        m = MethodInfo(access, name, desc, None, list(annotations), attrs)
        self.methods.append(m)
        return m

    def build(self):
        from .parser import parse_classfile  # round-trip to fill decoded views

        cf = ClassFile(
            minor=0,
            major=self.major,
            pool=ConstantPool(self.entries),
            access_flags=self.access,
            binary_name=self.binary_name,
            superclass=self.superclass,
            interfaces=list(self.interfaces),
            fields=self.fields,
            methods=self.methods,
            attributes=self.attributes,
            this_index=self.this_index,
            super_index=self.super_index,
            interface_indices=self.interface_indices,
        )
        return parse_classfile(write_classfile(cf), max_major=max(self.major, 69))


class Label:
    def __init__(self):
        self.offset = None
        self.patch_sites = []  # (operand offset in code, branch base offset, width)


class CodeAssembler:
    """Emit bytecode with labels, a line table, and local-variable records."""

    def __init__(self, max_locals=0):
        self.code = bytearray()
        self.max_locals = max_locals
        self.lines = []  # (pc, source line)
        self.locals = []  # (slot, name, desc, start_pc)
        self.exceptions = []  # (start, end, handler, class name or None) as Labels/ints

    @property
    def pc(self):
        return len(self.code)

    def line(self, n):
        if not self.lines or self.lines[-1][1] != n or self.lines[-1][0] != self.pc:
            self.lines.append((self.pc, n))

    def declare_local(self, slot, name, desc):
        self.locals.append((slot, name, desc, self.pc))
        self.max_locals = max(self.max_locals, slot + (2 if desc in ("J", "D") else 1))

    def reserve(self, slots):
        self.max_locals = max(self.max_locals, slots)

    def mark(self, label):
        label.offset = self.pc
        for site, base, width in label.patch_sites:
            self._patch(site, label.offset - base, width)
        label.patch_sites.clear()
        return label

    def _patch(self, site, delta, width):
        fmt = ">h" if width == 2 else ">i"
        struct.pack_into(fmt, self.code, site, delta)

    def emit(self, mnemonic, *operands):
        code = MNEMONIC_TO_CODE[mnemonic]
        _, spec = OPCODES[code]
        base = self.pc
        self.code.append(code)
        for kind, val in zip(spec, operands):
            if kind in ("u1", "i1"):
                self.code += struct.pack(">B" if kind == "u1" else ">b", val)
            elif kind in ("u2", "cp2"):
                self.code += struct.pack(">H", val)
            elif kind == "i2":
                self.code += struct.pack(">h", val)
            elif kind in ("br2", "br4"):
                width = 2 if kind == "br2" else 4
                if isinstance(val, Label):
                    if val.offset is not None:
                        self.code += struct.pack(">h" if width == 2 else ">i", val.offset - base)
                    else:
                        val.patch_sites.append((self.pc, base, width))
                        self.code += b"\x00" * width
                else:
                    self.code += struct.pack(">h" if width == 2 else ">i", val)
        return base

    # convenience emitters used by the compiler
    def load_const_int(self, v, builder):
        if -1 <= v <= 5:
            self.emit(f"iconst_{v}" if v >= 0 else "iconst_m1")
        elif -128 <= v <= 127:
            self.emit("bipush", v)
        elif -32768 <= v <= 32767:
            self.emit("sipush", v)
        else:
            self.emit("ldc_w", builder.integer(v))

    def var_op(self, base, slot):
        """base in {iload, lload, fload, dload, aload, istore, ...}; picks short forms."""
        if 0 <= slot <= 3:
            self.emit(f"{base}_{slot}")
        else:
            self.emit(base, slot)

    def to_attribute(self, builder):
        instructions = decode_instructions(bytes(self.code))
        max_stack = compute_max_stack(
            instructions, ConstantPool(builder.entries), len(self.code),
            handler_offsets=[_off(h) for _s, _e, h, _c in self.exceptions],
        )
        payload = bytearray()
        payload += struct.pack(">HHI", max_stack, self.max_locals, len(self.code))
        payload += self.code
        payload += struct.pack(">H", len(self.exceptions))
        for start, end, handler, cls in self.exceptions:
            cidx = builder.klass(cls) if cls else 0
            payload += struct.pack(">HHHH", _off(start), _off(end), _off(handler), cidx)
        sub = []
        if self.lines:
            body = struct.pack(">H", len(self.lines))
            for pc, ln in self.lines:
                body += struct.pack(">HH", pc, ln)
            builder.utf8("LineNumberTable")
            sub.append(Attribute("LineNumberTable", body))
        if self.locals:
            body = struct.pack(">H", len(self.locals))
            for slot, name, desc, start_pc in self.locals:
                body += struct.pack(
                    ">HHHHH", start_pc, len(self.code) - start_pc,
                    builder.utf8(name), builder.utf8(desc), slot,
                )
            builder.utf8("LocalVariableTable")
            sub.append(Attribute("LocalVariableTable", body))
        payload += struct.pack(">H", len(sub))
        for a in sub:
            payload += struct.pack(">HI", builder.utf8(a.name), len(a.payload)) + a.payload
        builder.utf8("Code")
        return Attribute("Code", bytes(payload))


def _off(x):
    return x.offset if isinstance(x, Label) else x


def compute_max_stack(instructions, pool, code_len, handler_offsets=()):
    """Worklist word-depth simulation; long/double count as two words.

    Exception handlers are extra entry points reached with one word (the
    thrown reference) on the stack.
    """
    if not instructions:
        return 0
    index = {ins.offset: ins for ins in instructions}
    order = sorted(index)
    follow = {a: b for a, b in zip(order, order[1:])}
    best = {0: 0}
    work = [0]
    for h in handler_offsets:
        if h in index and best.get(h, -1) < 1:
            best[h] = 1
            work.append(h)
    peak = 0
    while work:
        off = work.pop()
        ins = index[off]
        pops, pushes = _word_effect(ins, pool)
        if best[off] - pops < 0:
            raise MalformedBytecode(f"stack underflow at offset {off}")
        depth = best[off] - pops + pushes
        peak = max(peak, best[off], depth)
        succs, falls = _successors(ins, code_len)
        if falls and off in follow:
            succs = list(succs) + [follow[off]]
        for s in succs:
            if s not in index:
                continue
            if s not in best or best[s] < depth:
                best[s] = depth
                work.append(s)
    return peak


def _successors(ins, code_len):
    """(branch target offsets, does it fall through)."""
    m = ins.mnemonic
    if m in ("goto", "goto_w"):
        return [ins.offset + ins.operands[0]], False
    if m in ("jsr", "jsr_w"):
        return [ins.offset + ins.operands[0]], True
    if m.startswith("if") or m in ("ifnull", "ifnonnull"):
        return [ins.offset + ins.operands[0]], True
    if m == "tableswitch":
        _, default, _lo, _hi, offs = ins.switch
        return [ins.offset + default] + [ins.offset + o for o in offs], False
    if m == "lookupswitch":
        _, default, pairs = ins.switch
        return [ins.offset + default] + [ins.offset + o for _m, o in pairs], False
    if m in ("ireturn", "lreturn", "freturn", "dreturn", "areturn", "return", "athrow", "ret"):
        return [], False
    return [], True


def _invoke_words(pool, cp_index, has_receiver):
    _cls, _name, desc = pool.member_ref(cp_index)
    params, ret = parse_method_descriptor(desc)
    pops = sum(2 if p.is_wide else 1 for p in params) + (1 if has_receiver else 0)
    if ret is None:
        return pops, 0
    return pops, 2 if ret.is_wide else 1


_FIXED_EFFECT = {
    "nop": (0, 0), "aconst_null": (0, 1),
    "arraylength": (1, 1), "athrow": (1, 0),
    "monitorenter": (1, 0), "monitorexit": (1, 0),
    "pop": (1, 0), "pop2": (2, 0), "swap": (2, 2),
    "dup": (1, 2), "dup_x1": (2, 3), "dup_x2": (3, 4),
    "dup2": (2, 4), "dup2_x1": (3, 5), "dup2_x2": (4, 6),
    "iinc": (0, 0), "ret": (0, 0), "goto": (0, 0), "goto_w": (0, 0),
    "jsr": (0, 1), "jsr_w": (0, 1),
    "tableswitch": (1, 0), "lookupswitch": (1, 0),
    "checkcast": (1, 1), "instanceof": (1, 1),
    "new": (0, 1), "newarray": (1, 1), "anewarray": (1, 1),
    "ireturn": (1, 0), "freturn": (1, 0), "areturn": (1, 0),
    "lreturn": (2, 0), "dreturn": (2, 0), "return": (0, 0),
    "lcmp": (4, 1), "fcmpl": (2, 1), "fcmpg": (2, 1), "dcmpl": (4, 1), "dcmpg": (4, 1),
}


def _word_effect(ins, pool):
    m = ins.mnemonic
    if m in _FIXED_EFFECT:
        return _FIXED_EFFECT[m]
    if m.startswith("iconst") or m in ("bipush", "sipush", "ldc", "ldc_w") or m.startswith("fconst"):
        return 0, 1
    if m.startswith("lconst") or m.startswith("dconst") or m == "ldc2_w":
        return 0, 2
    if m.startswith(("iload", "fload", "aload")):
        return 0, 1
    if m.startswith(("lload", "dload")):
        return 0, 2
    if m.startswith(("istore", "fstore", "astore")):
        return 1, 0
    if m.startswith(("lstore", "dstore")):
        return 2, 0
    if m in ("iaload", "faload", "aaload", "baload", "caload", "saload"):
        return 2, 1
    if m in ("laload", "daload"):
        return 2, 2
    if m in ("iastore", "fastore", "aastore", "bastore", "castore", "sastore"):
        return 3, 0
    if m in ("lastore", "dastore"):
        return 4, 0
    if m in ("iadd", "isub", "imul", "idiv", "irem", "ishl", "ishr", "iushr", "iand", "ior", "ixor",
             "fadd", "fsub", "fmul", "fdiv", "frem"):
        return 2, 1
    if m in ("ladd", "lsub", "lmul", "ldiv", "lrem", "land", "lor", "lxor",
             "dadd", "dsub", "dmul", "ddiv", "drem"):
        return 4, 2
    if m in ("lshl", "lshr", "lushr"):
        return 3, 2
    if m in ("ineg", "fneg", "i2f", "f2i", "i2b", "i2c", "i2s"):
        return 1, 1
    if m in ("lneg", "dneg", "l2d", "d2l"):
        return 2, 2
    if m in ("i2l", "i2d", "f2l", "f2d"):
        return 1, 2
    if m in ("l2i", "l2f", "d2i", "d2f"):
        return 2, 1
    if m.startswith("if"):
        return (2, 0) if m.startswith("if_") else (1, 0)
    if m == "getstatic":
        return 0, _field_words(pool, ins)
    if m == "putstatic":
        return _field_words(pool, ins), 0
    if m == "getfield":
        return 1, _field_words(pool, ins)
    if m == "putfield":
        return 1 + _field_words(pool, ins), 0
    if m in ("invokevirtual", "invokespecial", "invokeinterface"):
        return _invoke_words(pool, ins.operands[0], True)
    if m == "invokestatic":
        return _invoke_words(pool, ins.operands[0], False)
    if m == "invokedynamic":
        return 0, 1  # not emitted by the bundled compiler; degrade
    if m == "multianewarray":
        return ins.operands[1], 1
    raise MalformedBytecode(f"no stack effect for {m}")


def _field_words(pool, ins):
    _cls, _name, desc = pool.member_ref(ins.operands[0])
    return 2 if desc in ("J", "D") else 1
