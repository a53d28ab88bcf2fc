"""Structural model of a parsed classfile.

Attribute payloads are kept verbatim so reserialization is lossless; decoded
views (code, line tables, annotations) are parsed from those payloads on
demand by the parser and stored alongside.
"""

from __future__ import annotations

from dataclasses import dataclass, field

# constant pool tags
CP_UTF8 = 1
CP_INTEGER = 3
CP_FLOAT = 4
CP_LONG = 5
CP_DOUBLE = 6
CP_CLASS = 7
CP_STRING = 8
CP_FIELDREF = 9
CP_METHODREF = 10
CP_INTERFACE_METHODREF = 11
CP_NAME_AND_TYPE = 12
CP_METHOD_HANDLE = 15
CP_METHOD_TYPE = 16
CP_DYNAMIC = 17
CP_INVOKE_DYNAMIC = 18
CP_MODULE = 19
CP_PACKAGE = 20

ACC_PUBLIC = 0x0001
ACC_PRIVATE = 0x0002
ACC_PROTECTED = 0x0004
ACC_STATIC = 0x0008
ACC_FINAL = 0x0010
ACC_SUPER = 0x0020
ACC_SYNCHRONIZED = 0x0020
ACC_VOLATILE = 0x0040
ACC_TRANSIENT = 0x0080
ACC_NATIVE = 0x0100
ACC_INTERFACE = 0x0200
ACC_ABSTRACT = 0x0400
ACC_STRICT = 0x0800
ACC_SYNTHETIC = 0x1000
ACC_ANNOTATION = 0x2000
ACC_ENUM = 0x4000


class BadMagic(ValueError):
    pass


class UnsupportedVersion(ValueError):
    pass


class TruncatedInput(ValueError):
    pass


class MalformedBytecode(ValueError):
    pass


class UnresolvableType(ValueError):
    pass


class AmbiguousLineMapping(ValueError):
    pass


@dataclass(frozen=True)
class CpEntry:
    tag: int
    value: object = None  # Utf8 str / Integer / Float / Long / Double payloads
    ref1: int = 0
    ref2: int = 0


class ConstantPool:
    """1-based constant pool; long/double entries occupy two indices."""

    def __init__(self, entries=None):
        self.entries = entries if entries is not None else [None]

    def __len__(self):
        return len(self.entries)

    def entry(self, index):
        if not 1 <= index < len(self.entries) or self.entries[index] is None:
            raise UnresolvableType(f"constant pool index {index} out of range")
        return self.entries[index]

    def utf8(self, index):
        e = self.entry(index)
        if e.tag != CP_UTF8:
            raise UnresolvableType(f"cp[{index}] is not Utf8 (tag {e.tag})")
        return e.value

    def class_name(self, index):
        e = self.entry(index)
        if e.tag != CP_CLASS:
            raise UnresolvableType(f"cp[{index}] is not Class (tag {e.tag})")
        return self.utf8(e.ref1)

    def name_and_type(self, index):
        e = self.entry(index)
        if e.tag != CP_NAME_AND_TYPE:
            raise UnresolvableType(f"cp[{index}] is not NameAndType (tag {e.tag})")
        return self.utf8(e.ref1), self.utf8(e.ref2)

    def member_ref(self, index):
        """Fieldref/Methodref/InterfaceMethodref -> (class name, member name, descriptor)."""
        e = self.entry(index)
        if e.tag not in (CP_FIELDREF, CP_METHODREF, CP_INTERFACE_METHODREF):
            raise UnresolvableType(f"cp[{index}] is not a member ref (tag {e.tag})")
        name, desc = self.name_and_type(e.ref2)
        return self.class_name(e.ref1), name, desc


@dataclass
class Attribute:
    name: str
    payload: bytes


@dataclass
class Instruction:
    offset: int
    opcode: int
    mnemonic: str
    operands: tuple = ()
    switch: object = None  # (default, pairs) for lookupswitch / (default, low, high, offsets) for tableswitch
    wide: bool = False
    size: int = 0

    @property
    def end(self):
        return self.offset + self.size


@dataclass
class CodeAttr:
    max_stack: int
    max_locals: int
    code: bytes
    instructions: list
    exception_table: list  # (start_pc, end_pc, handler_pc, catch_type name or None)
    line_number_table: list  # (start_pc, line)
    local_variable_table: list  # (start_pc, length, name, descriptor, slot)
    attributes: list = field(default_factory=list)  # raw sub-attributes, order preserved

    def instruction_at(self, offset):
        for ins in self.instructions:
            if ins.offset == offset:
                return ins
        raise MalformedBytecode(f"no instruction at offset {offset}")

    def boundaries(self):
        offs = {ins.offset for ins in self.instructions}
        offs.add(len(self.code))
        return offs

    def line_at(self, offset):
        """Source line attributed to the instruction at offset, or -1."""
        best_pc, best_line = -1, -1
        for start_pc, line in self.line_number_table:
            if start_pc <= offset and start_pc >= best_pc:
                best_pc, best_line = start_pc, line
        return best_line


@dataclass
class FieldInfo:
    access_flags: int
    name: str
    descriptor: str
    attributes: list = field(default_factory=list)

    @property
    def is_static(self):
        return bool(self.access_flags & ACC_STATIC)


@dataclass
class MethodInfo:
    access_flags: int
    name: str
    descriptor: str
    code: CodeAttr | None = None
    annotations: list = field(default_factory=list)  # annotation type descriptors
    attributes: list = field(default_factory=list)

    @property
    def is_static(self):
        return bool(self.access_flags & ACC_STATIC)

    @property
    def is_abstract(self):
        return bool(self.access_flags & ACC_ABSTRACT)


@dataclass
class ClassFile:
    minor: int
    major: int
    pool: ConstantPool
    access_flags: int
    binary_name: str  # internal form, e.g. org/example/Foo
    superclass: str | None  # internal form; None only for java/lang/Object
    interfaces: list
    fields: list
    methods: list
    attributes: list = field(default_factory=list)
    annotations: list = field(default_factory=list)
    # raw index fields kept for lossless reserialization
    this_index: int = 0
    super_index: int = 0
    interface_indices: tuple = ()

    def method(self, name, descriptor=None):
        for m in self.methods:
            if m.name == name and (descriptor is None or m.descriptor == descriptor):
                return m
        return None

    @property
    def source_name(self):
        """Filename from the SourceFile attribute, or None."""
        for a in self.attributes:
            if a.name == "SourceFile" and len(a.payload) == 2:
                try:
                    return self.pool.utf8(int.from_bytes(a.payload, "big"))
                except UnresolvableType:
                    break
        return None
