"""JVM opcode table: mnemonics and operand encodings.

Operand spec codes: u1/u2 unsigned, i1/i2 signed, cp2 constant-pool index,
br2/br4 signed branch offsets.  tableswitch, lookupswitch, and wide carry
variable-length encodings handled specially by the decoder.
"""

_T = {}


def _op(code, mnemonic, *operands):
    _T[code] = (mnemonic, operands)


_op(0x00, "nop")
_op(0x01, "aconst_null")
for _i, _m in enumerate(["iconst_m1", "iconst_0", "iconst_1", "iconst_2", "iconst_3", "iconst_4", "iconst_5"]):
    _op(0x02 + _i, _m)
_op(0x09, "lconst_0"); _op(0x0A, "lconst_1")
_op(0x0B, "fconst_0"); _op(0x0C, "fconst_1"); _op(0x0D, "fconst_2")
_op(0x0E, "dconst_0"); _op(0x0F, "dconst_1")
_op(0x10, "bipush", "i1")
_op(0x11, "sipush", "i2")
_op(0x12, "ldc", "u1")
_op(0x13, "ldc_w", "cp2")
_op(0x14, "ldc2_w", "cp2")
for _i, _m in enumerate(["iload", "lload", "fload", "dload", "aload"]):
    _op(0x15 + _i, _m, "u1")
for _base, _m in [(0x1A, "iload"), (0x1E, "lload"), (0x22, "fload"), (0x26, "dload"), (0x2A, "aload")]:
    for _n in range(4):
        _op(_base + _n, f"{_m}_{_n}")
for _i, _m in enumerate(["iaload", "laload", "faload", "daload", "aaload", "baload", "caload", "saload"]):
    _op(0x2E + _i, _m)
for _i, _m in enumerate(["istore", "lstore", "fstore", "dstore", "astore"]):
    _op(0x36 + _i, _m, "u1")
for _base, _m in [(0x3B, "istore"), (0x3F, "lstore"), (0x43, "fstore"), (0x47, "dstore"), (0x4B, "astore")]:
    for _n in range(4):
        _op(_base + _n, f"{_m}_{_n}")
for _i, _m in enumerate(["iastore", "lastore", "fastore", "dastore", "aastore", "bastore", "castore", "sastore"]):
    _op(0x4F + _i, _m)
for _i, _m in enumerate(["pop", "pop2", "dup", "dup_x1", "dup_x2", "dup2", "dup2_x1", "dup2_x2", "swap"]):
    _op(0x57 + _i, _m)
for _i, _m in enumerate(
    ["iadd", "ladd", "fadd", "dadd", "isub", "lsub", "fsub", "dsub",
     "imul", "lmul", "fmul", "dmul", "idiv", "ldiv", "fdiv", "ddiv",
     "irem", "lrem", "frem", "drem", "ineg", "lneg", "fneg", "dneg",
     "ishl", "lshl", "ishr", "lshr", "iushr", "lushr",
     "iand", "land", "ior", "lor", "ixor", "lxor"]
):
    _op(0x60 + _i, _m)
_op(0x84, "iinc", "u1", "i1")
for _i, _m in enumerate(
    ["i2l", "i2f", "i2d", "l2i", "l2f", "l2d", "f2i", "f2l", "f2d", "d2i", "d2l", "d2f", "i2b", "i2c", "i2s"]
):
    _op(0x85 + _i, _m)
for _i, _m in enumerate(["lcmp", "fcmpl", "fcmpg", "dcmpl", "dcmpg"]):
    _op(0x94 + _i, _m)
for _i, _m in enumerate(
    ["ifeq", "ifne", "iflt", "ifge", "ifgt", "ifle",
     "if_icmpeq", "if_icmpne", "if_icmplt", "if_icmpge", "if_icmpgt", "if_icmple",
     "if_acmpeq", "if_acmpne"]
):
    _op(0x99 + _i, _m, "br2")
_op(0xA7, "goto", "br2")
_op(0xA8, "jsr", "br2")
_op(0xA9, "ret", "u1")
_op(0xAA, "tableswitch")
_op(0xAB, "lookupswitch")
for _i, _m in enumerate(["ireturn", "lreturn", "freturn", "dreturn", "areturn", "return"]):
    _op(0xAC + _i, _m)
_op(0xB2, "getstatic", "cp2")
_op(0xB3, "putstatic", "cp2")
_op(0xB4, "getfield", "cp2")
_op(0xB5, "putfield", "cp2")
_op(0xB6, "invokevirtual", "cp2")
_op(0xB7, "invokespecial", "cp2")
_op(0xB8, "invokestatic", "cp2")
_op(0xB9, "invokeinterface", "cp2", "u1", "u1")
_op(0xBA, "invokedynamic", "cp2", "u1", "u1")
_op(0xBB, "new", "cp2")
_op(0xBC, "newarray", "u1")
_op(0xBD, "anewarray", "cp2")
_op(0xBE, "arraylength")
_op(0xBF, "athrow")
_op(0xC0, "checkcast", "cp2")
_op(0xC1, "instanceof", "cp2")
_op(0xC2, "monitorenter")
_op(0xC3, "monitorexit")
_op(0xC4, "wide")
_op(0xC5, "multianewarray", "cp2", "u1")
_op(0xC6, "ifnull", "br2")
_op(0xC7, "ifnonnull", "br2")
_op(0xC8, "goto_w", "br4")
_op(0xC9, "jsr_w", "br4")

OPCODES = _T
MNEMONIC_TO_CODE = {m: c for c, (m, _) in _T.items()}

# newarray atype operand values
ATYPE = {
    4: "boolean", 5: "char", 6: "float", 7: "double",
    8: "byte", 9: "short", 10: "int", 11: "long",
}
ATYPE_CODE = {v: k for k, v in ATYPE.items()}

BRANCHES = frozenset(
    m for _c, (m, spec) in _T.items() if any(s.startswith("br") for s in spec)
)
UNCONDITIONAL = frozenset(["goto", "goto_w", "athrow", "ret",
                           "ireturn", "lreturn", "freturn", "dreturn", "areturn", "return",
                           "tableswitch", "lookupswitch"])
RETURNS = frozenset(["ireturn", "lreturn", "freturn", "dreturn", "areturn", "return"])
