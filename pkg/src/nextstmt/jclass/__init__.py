"""Classfile parsing, writing, and type-level bytecode interpretation."""

from .descriptors import (
    NULL,
    NULL_NAME,
    TOP,
    TypeDesc,
    array_of,
    field_type,
    obj,
    parse_field_descriptor,
    parse_method_descriptor,
    source_to_descriptor,
)
from .interp import (
    infer_local_types,
    initial_locals,
    join_types,
    map_statements_to_instructions,
)
from .model import (
    AmbiguousLineMapping,
    Attribute,
    BadMagic,
    ClassFile,
    CodeAttr,
    ConstantPool,
    FieldInfo,
    Instruction,
    MalformedBytecode,
    MethodInfo,
    TruncatedInput,
    UnresolvableType,
    UnsupportedVersion,
)
from .parser import DEFAULT_MAX_MAJOR, decode_instructions, parse_classfile
from .writer import ClassFileBuilder, CodeAssembler, Label, write_classfile

__all__ = [
    "AmbiguousLineMapping",
    "Attribute",
    "BadMagic",
    "ClassFile",
    "ClassFileBuilder",
    "CodeAssembler",
    "CodeAttr",
    "ConstantPool",
    "DEFAULT_MAX_MAJOR",
    "FieldInfo",
    "Instruction",
    "Label",
    "MalformedBytecode",
    "MethodInfo",
    "NULL",
    "NULL_NAME",
    "TOP",
    "TruncatedInput",
    "TypeDesc",
    "UnresolvableType",
    "UnsupportedVersion",
    "array_of",
    "decode_instructions",
    "field_type",
    "infer_local_types",
    "initial_locals",
    "join_types",
    "map_statements_to_instructions",
    "obj",
    "parse_classfile",
    "parse_field_descriptor",
    "parse_method_descriptor",
    "source_to_descriptor",
    "write_classfile",
]
