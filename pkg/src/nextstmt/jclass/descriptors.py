"""Field/method descriptor parsing and the TypeDesc lattice element."""

from __future__ import annotations

from dataclasses import dataclass

PRIMITIVES = {
    "B": "byte", "C": "char", "D": "double", "F": "float",
    "I": "int", "J": "long", "S": "short", "Z": "boolean", "V": "void",
}
_PRIM_CODE = {v: k for k, v in PRIMITIVES.items()}

# Distinguished bottom-like reference type for null constants: assignable to
# any reference slot, joins to the other operand.
NULL_NAME = "<null>"


class BadDescriptor(ValueError):
    pass


@dataclass(frozen=True)
class TypeDesc:
    kind: str  # primitive | object | array | uninitialized | top
    name: str = ""  # primitive name, internal class name, or new-site tag
    element: "TypeDesc | None" = None

    def __post_init__(self):
        if self.kind == "primitive" and self.name not in _PRIM_CODE:
            raise ValueError(f"not a JVM primitive: {self.name!r}")
        if self.kind == "array" and (self.element is None or self.element.kind == "top"):
            raise ValueError("array element must be a concrete type")

    @property
    def is_wide(self):
        return self.kind == "primitive" and self.name in ("long", "double")

    @property
    def is_reference(self):
        return self.kind in ("object", "array")

    @property
    def is_null(self):
        return self.kind == "object" and self.name == NULL_NAME

    def to_descriptor(self):
        if self.kind == "primitive":
            return _PRIM_CODE[self.name]
        if self.kind == "object":
            return f"L{self.name};"
        if self.kind == "array":
            return "[" + self.element.to_descriptor()
        raise ValueError(f"{self.kind} has no descriptor form")

    def to_source(self):
        """Java source spelling: internal separators become dots."""
        if self.kind == "primitive":
            return self.name
        if self.kind == "object":
            return "null" if self.is_null else self.name.replace("/", ".").replace("$", ".")
        if self.kind == "array":
            return self.element.to_source() + "[]"
        return self.kind

    def simple_name(self):
        if self.kind == "array":
            return self.element.simple_name() + "[]"
        if self.kind == "object" and not self.is_null:
            return self.name.rsplit("/", 1)[-1].rsplit("$", 1)[-1]
        return self.to_source()


TOP = TypeDesc("top")
INT = TypeDesc("primitive", "int")
LONG = TypeDesc("primitive", "long")
FLOAT = TypeDesc("primitive", "float")
DOUBLE = TypeDesc("primitive", "double")
NULL = TypeDesc("object", NULL_NAME)


def obj(name):
    return TypeDesc("object", name)


def array_of(element):
    return TypeDesc("array", element=element)


def parse_field_descriptor(desc, pos=0):
    """Parse one field descriptor starting at pos; returns (TypeDesc, next pos)."""
    if pos >= len(desc):
        raise BadDescriptor(f"truncated descriptor: {desc!r}")
    c = desc[pos]
    if c in PRIMITIVES:
        if c == "V":
            raise BadDescriptor("void is not a field type")
        return TypeDesc("primitive", PRIMITIVES[c]), pos + 1
    if c == "L":
        end = desc.find(";", pos)
        if end < 0:
            raise BadDescriptor(f"unterminated class type: {desc!r}")
        return TypeDesc("object", desc[pos + 1 : end]), end + 1
    if c == "[":
        elem, nxt = parse_field_descriptor(desc, pos + 1)
        return TypeDesc("array", element=elem), nxt
    raise BadDescriptor(f"bad descriptor char {c!r} in {desc!r}")


def field_type(desc):
    t, end = parse_field_descriptor(desc)
    if end != len(desc):
        raise BadDescriptor(f"trailing junk in {desc!r}")
    return t


def parse_method_descriptor(desc):
    """Returns (param TypeDescs, return TypeDesc or None for void)."""
    if not desc.startswith("("):
        raise BadDescriptor(f"not a method descriptor: {desc!r}")
    pos = 1
    params = []
    while pos < len(desc) and desc[pos] != ")":
        t, pos = parse_field_descriptor(desc, pos)
        params.append(t)
    if pos >= len(desc):
        raise BadDescriptor(f"unterminated parameter list: {desc!r}")
    pos += 1
    if desc[pos:] == "V":
        return params, None
    ret, end = parse_field_descriptor(desc, pos)
    if end != len(desc):
        raise BadDescriptor(f"trailing junk in {desc!r}")
    return params, ret


def slot_width(t):
    return 2 if t.is_wide else 1


def param_slot_count(desc, static):
    params, _ = parse_method_descriptor(desc)
    return sum(slot_width(p) for p in params) + (0 if static else 1)


def source_to_descriptor(type_text, resolver=None):
    """Best-effort source type text -> descriptor; resolver maps simple names to internal names."""
    text = type_text.strip()
    dims = 0
    while text.endswith("[]"):
        dims += 1
        text = text[:-2].strip()
    if text in _PRIM_CODE:
        base = _PRIM_CODE[text]
    else:
        internal = resolver(text) if resolver else text.replace(".", "/")
        base = f"L{internal};"
    return "[" * dims + base
