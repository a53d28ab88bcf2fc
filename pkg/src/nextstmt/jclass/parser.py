"""Classfile binary reader."""

from __future__ import annotations

import struct

from .model import (
    Attribute,
    BadMagic,
    ClassFile,
    CodeAttr,
    ConstantPool,
    CpEntry,
    CP_CLASS,
    CP_DOUBLE,
    CP_DYNAMIC,
    CP_FIELDREF,
    CP_FLOAT,
    CP_INTEGER,
    CP_INTERFACE_METHODREF,
    CP_INVOKE_DYNAMIC,
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
    Instruction,
    MalformedBytecode,
    MethodInfo,
    TruncatedInput,
    UnsupportedVersion,
)
from .opcodes import OPCODES

MAGIC = 0xCAFEBABE
# Default ceiling: major version 69 (the most recent LTS release line).
DEFAULT_MAX_MAJOR = 69


class _Reader:
    def __init__(self, data):
        self.data = data
        self.pos = 0

    def need(self, n):
        if self.pos + n > len(self.data):
            raise TruncatedInput(
                f"need {n} bytes at offset {self.pos}, have {len(self.data) - self.pos}"
            )

    def u1(self):
        self.need(1)
        v = self.data[self.pos]
        self.pos += 1
        return v

    def u2(self):
        self.need(2)
        v = struct.unpack_from(">H", self.data, self.pos)[0]
        self.pos += 2
        return v

    def u4(self):
        self.need(4)
        v = struct.unpack_from(">I", self.data, self.pos)[0]
        self.pos += 4
        return v

    def raw(self, n):
        self.need(n)
        v = self.data[self.pos : self.pos + n]
        self.pos += n
        return v


def parse_classfile(data, max_major=DEFAULT_MAX_MAJOR):
    """Decode a classfile image into a ClassFile."""
    r = _Reader(bytes(data))
    if len(r.data) < 4:
        raise TruncatedInput(f"input of length {len(r.data)} is not a classfile")
    if r.u4() != MAGIC:
        raise BadMagic("first four bytes are not the classfile magic")
    minor = r.u2()
    major = r.u2()
    if major > max_major:
        raise UnsupportedVersion(f"classfile major version {major} exceeds ceiling {max_major}")
    pool = _read_pool(r)
    access = r.u2()
    this_index = r.u2()
    super_index = r.u2()
    binary_name = pool.class_name(this_index)
    superclass = pool.class_name(super_index) if super_index else None
    iface_count = r.u2()
    interface_indices = tuple(r.u2() for _ in range(iface_count))
    interfaces = [pool.class_name(i) for i in interface_indices]
    fields = [_read_field(r, pool) for _ in range(r.u2())]
    methods = [_read_method(r, pool) for _ in range(r.u2())]
    attributes = _read_attributes(r, pool)
    if r.pos != len(r.data):
        raise TruncatedInput(f"{len(r.data) - r.pos} trailing bytes after class attributes")
    cf = ClassFile(
        minor=minor,
        major=major,
        pool=pool,
        access_flags=access,
        binary_name=binary_name,
        superclass=superclass,
        interfaces=interfaces,
        fields=fields,
        methods=methods,
        attributes=attributes,
        this_index=this_index,
        super_index=super_index,
        interface_indices=interface_indices,
    )
    cf.annotations = _find_annotations(attributes, pool)
    return cf


def _read_pool(r):
    count = r.u2()
    entries = [None] * count
    i = 1
    while i < count:
        tag = r.u1()
        if tag == CP_UTF8:
            length = r.u2()
            entries[i] = CpEntry(tag, value=r.raw(length).decode("utf-8", "surrogateescape"))
        elif tag == CP_INTEGER:
            entries[i] = CpEntry(tag, value=struct.unpack(">i", r.raw(4))[0])
        elif tag == CP_FLOAT:
            entries[i] = CpEntry(tag, value=struct.unpack(">f", r.raw(4))[0])
        elif tag == CP_LONG:
            entries[i] = CpEntry(tag, value=struct.unpack(">q", r.raw(8))[0])
        elif tag == CP_DOUBLE:
            entries[i] = CpEntry(tag, value=struct.unpack(">d", r.raw(8))[0])
        elif tag in (CP_CLASS, CP_STRING, CP_METHOD_TYPE, CP_MODULE, CP_PACKAGE):
            entries[i] = CpEntry(tag, ref1=r.u2())
        elif tag in (
            CP_FIELDREF,
            CP_METHODREF,
            CP_INTERFACE_METHODREF,
            CP_NAME_AND_TYPE,
            CP_DYNAMIC,
            CP_INVOKE_DYNAMIC,
        ):
            entries[i] = CpEntry(tag, ref1=r.u2(), ref2=r.u2())
        elif tag == CP_METHOD_HANDLE:
            entries[i] = CpEntry(tag, ref1=r.u1(), ref2=r.u2())
        else:
            raise MalformedBytecode(f"unknown constant pool tag {tag} at index {i}")
        if tag in (CP_LONG, CP_DOUBLE):
            i += 2  # wide entries take two pool slots
        else:
            i += 1
    return ConstantPool(entries)


def _read_attributes(r, pool):
    out = []
    for _ in range(r.u2()):
        name = pool.utf8(r.u2())
        length = r.u4()
        out.append(Attribute(name, bytes(r.raw(length))))
    return out


def _read_field(r, pool):
    access = r.u2()
    name = pool.utf8(r.u2())
    desc = pool.utf8(r.u2())
    attrs = _read_attributes(r, pool)
    return FieldInfo(access, name, desc, attrs)


def _read_method(r, pool):
    access = r.u2()
    name = pool.utf8(r.u2())
    desc = pool.utf8(r.u2())
    attrs = _read_attributes(r, pool)
    code = None
    for a in attrs:
        if a.name == "Code":
            code = _decode_code(a.payload, pool)
            break
    return MethodInfo(access, name, desc, code, _find_annotations(attrs, pool), attrs)


def _decode_code(payload, pool):
    r = _Reader(payload)
    max_stack = r.u2()
    max_locals = r.u2()
    code_len = r.u4()
    code = bytes(r.raw(code_len))
    exc = []
    for _ in range(r.u2()):
        start_pc, end_pc, handler_pc, catch_idx = r.u2(), r.u2(), r.u2(), r.u2()
        exc.append((start_pc, end_pc, handler_pc, pool.class_name(catch_idx) if catch_idx else None))
    sub_attrs = _read_attributes(r, pool)
    lines = []
    lvt = []
    for a in sub_attrs:
        if a.name == "LineNumberTable":
            ar = _Reader(a.payload)
            for _ in range(ar.u2()):
                lines.append((ar.u2(), ar.u2()))
        elif a.name == "LocalVariableTable":
            ar = _Reader(a.payload)
            for _ in range(ar.u2()):
                start_pc, length = ar.u2(), ar.u2()
                lname, ldesc = pool.utf8(ar.u2()), pool.utf8(ar.u2())
                lvt.append((start_pc, length, lname, ldesc, ar.u2()))
    return CodeAttr(
        max_stack=max_stack,
        max_locals=max_locals,
        code=code,
        instructions=decode_instructions(code),
        exception_table=exc,
        line_number_table=lines,
        local_variable_table=lvt,
        attributes=sub_attrs,
    )


def decode_instructions(code):
    """Decode raw bytecode into Instruction records."""

    def take(pos, fmt, width):
        if pos + width > len(code):
            raise MalformedBytecode(f"operands at {pos} run past end of code")
        return struct.unpack_from(fmt, code, pos)

    out = []
    pos = 0
    n = len(code)
    while pos < n:
        start = pos
        op = code[pos]
        pos += 1
        if op not in OPCODES:
            raise MalformedBytecode(f"unknown opcode 0x{op:02x} at {start}")
        mnemonic, spec = OPCODES[op]
        wide = False
        operands = []
        switch = None
        if mnemonic == "wide":
            wide = True
            (op,) = take(pos, ">B", 1)
            pos += 1
            if op not in OPCODES:
                raise MalformedBytecode(f"bad wide opcode 0x{op:02x} at {start}")
            mnemonic, _ = OPCODES[op]
            if mnemonic == "iinc":
                operands = list(take(pos, ">Hh", 4))
                pos += 4
            else:
                operands = list(take(pos, ">H", 2))
                pos += 2
        elif mnemonic == "tableswitch":
            pos += (4 - pos % 4) % 4
            default, low, high = take(pos, ">iii", 12)
            pos += 12
            count = high - low + 1
            if count < 0:
                raise MalformedBytecode(f"tableswitch range inverted at {start}")
            offsets = list(take(pos, f">{count}i", 4 * count))
            pos += 4 * count
            switch = ("table", default, low, high, offsets)
        elif mnemonic == "lookupswitch":
            pos += (4 - pos % 4) % 4
            default, npairs = take(pos, ">ii", 8)
            pos += 8
            if npairs < 0:
                raise MalformedBytecode(f"lookupswitch pair count negative at {start}")
            pairs = []
            for _ in range(npairs):
                pairs.append(tuple(take(pos, ">ii", 8)))
                pos += 8
            switch = ("lookup", default, pairs)
        else:
            for kind in spec:
                if kind == "u1":
                    operands.extend(take(pos, ">B", 1))
                    pos += 1
                elif kind == "i1":
                    operands.extend(take(pos, ">b", 1))
                    pos += 1
                elif kind in ("u2", "cp2"):
                    operands.extend(take(pos, ">H", 2))
                    pos += 2
                elif kind in ("i2", "br2"):
                    operands.extend(take(pos, ">h", 2))
                    pos += 2
                elif kind == "br4":
                    operands.extend(take(pos, ">i", 4))
                    pos += 4
        if pos > n:
            raise MalformedBytecode(f"instruction at {start} runs past end of code")
        out.append(
            Instruction(
                offset=start,
                opcode=op,
                mnemonic=mnemonic,
                operands=tuple(operands),
                switch=switch,
                wide=wide,
                size=pos - start,
            )
        )
    return out


def _find_annotations(attributes, pool):
    """Annotation type descriptors from RuntimeVisibleAnnotations, if present."""
    for a in attributes:
        if a.name == "RuntimeVisibleAnnotations":
            return _decode_annotations(a.payload, pool)
    return []


def _decode_annotations(payload, pool):
    r = _Reader(payload)
    out = []
    for _ in range(r.u2()):
        out.append(_decode_annotation(r, pool))
    return out


def _decode_annotation(r, pool):
    type_desc = pool.utf8(r.u2())
    for _ in range(r.u2()):
        r.u2()  # element name
        _skip_element_value(r, pool)
    return type_desc


def _skip_element_value(r, pool):
    tag = chr(r.u1())
    if tag in "BCDFIJSZs":
        r.u2()
    elif tag == "e":
        r.u2()
        r.u2()
    elif tag == "c":
        r.u2()
    elif tag == "@":
        _decode_annotation(r, pool)
    elif tag == "[":
        for _ in range(r.u2()):
            _skip_element_value(r, pool)
    else:
        raise MalformedBytecode(f"bad element_value tag {tag!r}")
