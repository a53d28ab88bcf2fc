"""Type-level abstract interpretation of method bytecode.

Tracks types, never values: the operand stack and local slots hold TypeDesc
entries (category-2 values occupy one stack entry plus a padding local slot).
Used to recover local variable types at a statement boundary and to map
statements to instruction ranges via the line-number table.
"""

from __future__ import annotations

from .descriptors import (
    DOUBLE,
    FLOAT,
    INT,
    LONG,
    NULL,
    TOP,
    TypeDesc,
    array_of,
    field_type,
    obj,
    parse_method_descriptor,
)
from .model import AmbiguousLineMapping, MalformedBytecode, UnresolvableType

OBJECT = obj("java/lang/Object")
STRING = obj("java/lang/String")
CLASS = obj("java/lang/Class")

_ATYPE_PRIM = {
    4: "boolean", 5: "char", 6: "float", 7: "double",
    8: "byte", 9: "short", 10: "int", 11: "long",
}


def initial_locals(method, class_ctx):
    """Parameter slots at method entry; `this` occupies slot 0 when non-static."""
    locals_ = {}
    slot = 0
    if not method.is_static:
        locals_[0] = obj(class_ctx.binary_name)
        slot = 1
    params, _ = parse_method_descriptor(method.descriptor)
    for p in params:
        locals_[slot] = p
        if p.is_wide:
            locals_[slot + 1] = TOP
            slot += 2
        else:
            slot += 1
    return locals_


def join_types(a, b, hierarchy=None):
    """Least upper bound; reference chains implicitly root at java/lang/Object."""
    if a == b:
        return a
    if a.kind == "top" or b.kind == "top":
        return TOP
    if a.is_null and b.is_reference:
        return b
    if b.is_null and a.is_reference:
        return a
    if a.kind == "array" and b.kind == "array":
        elem = join_types(a.element, b.element, hierarchy)
        if elem.is_reference:
            return array_of(elem)
        return OBJECT
    if a.is_reference and b.is_reference:
        if a.kind == "object" and b.kind == "object":
            return _common_superclass(a.name, b.name, hierarchy)
        return OBJECT
    return TOP


def _ancestry(name, hierarchy):
    chain = [name]
    seen = {name}
    while hierarchy is not None:
        sup = hierarchy(chain[-1])
        if sup is None or sup in seen:
            break
        chain.append(sup)
        seen.add(sup)
    if chain[-1] != "java/lang/Object":
        chain.append("java/lang/Object")
    return chain

def _common_superclass(a, b, hierarchy):
    chain_a = _ancestry(a, hierarchy)
    in_a = set(chain_a)
    for name in _ancestry(b, hierarchy):
        if name in in_a:
            return obj(name)
    return OBJECT


class _Frame:
    __slots__ = ("locals", "stack")

    def __init__(self, locals_, stack):
        self.locals = dict(locals_)
        self.stack = list(stack)

    def copy(self):
        return _Frame(self.locals, self.stack)

    def push(self, t):
        self.stack.append(t)

    def pop(self, n=1):
        if len(self.stack) < n:
            raise MalformedBytecode("operand stack underflow")
        if n == 1:
            return self.stack.pop()
        vals = self.stack[-n:]
        del self.stack[-n:]
        return vals

    def store(self, slot, t):
        # writing a slot invalidates a wide value spilling into it from below
        below = self.locals.get(slot - 1)
        if below is not None and below.is_wide:
            self.locals[slot - 1] = TOP
        self.locals[slot] = t
        if t.is_wide:
            self.locals[slot + 1] = TOP

    def merge(self, other, hierarchy):
        """Join in place; returns True when anything changed."""
        if len(self.stack) != len(other.stack):
            raise MalformedBytecode("inconsistent stack heights at merge point")
        changed = False
        for i, (x, y) in enumerate(zip(self.stack, other.stack)):
            j = join_types(x, y, hierarchy)
            if j != x:
                self.stack[i] = j
                changed = True
        for slot in list(self.locals):
            if slot not in other.locals:
                del self.locals[slot]
                changed = True
                continue
            j = join_types(self.locals[slot], other.locals[slot], hierarchy)
            if j != self.locals[slot]:
                self.locals[slot] = j
                changed = True
        return changed


def infer_local_types(method, class_ctx, upto=None, hierarchy=None):
    """Types of local slots at the instruction boundary `upto`.

    Runs a worklist fixpoint over all instructions strictly before `upto`;
    the result is the join of every frame flowing into the boundary.  With
    upto=None the boundary is the end of the code array.
    """
    if method.code is None:
        raise MalformedBytecode(f"{method.name} has no code attribute")
    code = method.code
    if upto is None:
        upto = len(code.code)
    if upto != len(code.code) and not any(i.offset == upto for i in code.instructions):
        raise MalformedBytecode(f"offset {upto} is not an instruction boundary")

    entry = _Frame(initial_locals(method, class_ctx), [])
    if upto == 0:
        return dict(entry.locals)

    index = {ins.offset: ins for ins in code.instructions}
    order = sorted(index)
    follow = {a: b for a, b in zip(order, order[1:])}
    pool = class_ctx.pool

    states = {0: entry}
    boundary = None
    last_out = {}
    work = [0]
    while work:
        off = work.pop()
        if off >= upto:
            continue
        ins = index[off]
        frame = states[off].copy()
        try:
            cont = _step(frame, ins, pool, class_ctx)
        except UnresolvableType:
            cont = True  # degrade below, keep walking
            frame.push(TOP)
        last_out[off] = frame
        succs = []
        if cont:
            targets, falls = _branch_targets(ins)
            succs.extend(targets)
            if falls:
                nxt = follow.get(off, len(code.code))
                succs.append(nxt)
        for s in succs:
            if s == upto:
                if boundary is None:
                    boundary = frame.copy()
                else:
                    boundary.merge(frame, hierarchy)
                continue
            if s >= upto or s not in index:
                continue
            if s not in states:
                states[s] = frame.copy()
                work.append(s)
            elif states[s].merge(frame, hierarchy):
                work.append(s)
    if boundary is None:
        # defensive: boundary never reached; report the latest reachable frame
        prior = [o for o in last_out if o < upto]
        if not prior:
            return dict(entry.locals)
        boundary = last_out[max(prior)]
    return dict(boundary.locals)


def _branch_targets(ins):
    m = ins.mnemonic
    if m in ("goto", "goto_w"):
        return [ins.offset + ins.operands[0]], False
    if m in ("jsr", "jsr_w"):
        return [ins.offset + ins.operands[0]], False
    if m.startswith("if"):
        return [ins.offset + ins.operands[0]], True
    if m == "tableswitch":
        _, default, _lo, _hi, offs = ins.switch
        return [ins.offset + default] + [ins.offset + o for o in offs], False
    if m == "lookupswitch":
        _, default, pairs = ins.switch
        return [ins.offset + default] + [ins.offset + o for _m, o in pairs], False
    return [], True


def _step(frame, ins, pool, class_ctx):
    """Apply one instruction's type effect; False when control does not continue."""
    m = ins.mnemonic

    if m in ("nop", "iinc", "goto", "goto_w"):
        return True
    if m == "aconst_null":
        frame.push(NULL)
        return True
    if m.startswith("iconst") or m in ("bipush", "sipush"):
        frame.push(INT)
        return True
    if m.startswith("lconst"):
        frame.push(LONG)
        return True
    if m.startswith("fconst"):
        frame.push(FLOAT)
        return True
    if m.startswith("dconst"):
        frame.push(DOUBLE)
        return True
    if m in ("ldc", "ldc_w", "ldc2_w"):
        frame.push(_ldc_type(pool, ins.operands[0]))
        return True

    if m.startswith("iload"):
        frame.push(INT)
        return True
    if m.startswith("lload"):
        frame.push(LONG)
        return True
    if m.startswith("fload"):
        frame.push(FLOAT)
        return True
    if m.startswith("dload"):
        frame.push(DOUBLE)
        return True
    if m.startswith("aload"):
        slot = _var_slot(m, ins)
        frame.push(frame.locals.get(slot, TOP))
        return True

    if m.startswith("istore"):
        frame.pop()
        frame.store(_var_slot(m, ins), INT)
        return True
    if m.startswith("fstore"):
        frame.pop()
        frame.store(_var_slot(m, ins), FLOAT)
        return True
    if m.startswith("lstore"):
        frame.pop()
        frame.store(_var_slot(m, ins), LONG)
        return True
    if m.startswith("dstore"):
        frame.pop()
        frame.store(_var_slot(m, ins), DOUBLE)
        return True
    if m.startswith("astore"):
        val = frame.pop()
        frame.store(_var_slot(m, ins), val)
        return True

    if m in ("iaload", "baload", "caload", "saload"):
        frame.pop(2)
        frame.push(INT)
        return True
    if m in ("laload", "daload", "faload"):
        frame.pop(2)
        frame.push({"l": LONG, "d": DOUBLE, "f": FLOAT}[m[0]])
        return True
    if m == "aaload":
        _idx = frame.pop()
        arr = frame.pop()
        frame.push(arr.element if arr.kind == "array" else TOP)
        return True
    if m in ("iastore", "lastore", "fastore", "dastore", "aastore", "bastore", "castore", "sastore"):
        frame.pop(3)
        return True

    if m == "pop":
        frame.pop()
        return True
    if m == "pop2":
        top = frame.pop()
        if not top.is_wide:
            frame.pop()
        return True
    if m == "dup":
        top = frame.pop()
        frame.push(top)
        frame.push(top)
        return True
    if m == "dup_x1":
        v1, v2 = frame.pop(), frame.pop()
        frame.push(v1)
        frame.push(v2)
        frame.push(v1)
        return True
    if m == "dup_x2":
        v1 = frame.pop()
        v2 = frame.pop()
        if v2.is_wide:
            frame.push(v1)
            frame.push(v2)
            frame.push(v1)
        else:
            v3 = frame.pop()
            frame.push(v1)
            frame.push(v3)
            frame.push(v2)
            frame.push(v1)
        return True
    if m == "dup2":
        v1 = frame.pop()
        if v1.is_wide:
            frame.push(v1)
            frame.push(v1)
        else:
            v2 = frame.pop()
            frame.push(v2)
            frame.push(v1)
            frame.push(v2)
            frame.push(v1)
        return True
    if m in ("dup2_x1", "dup2_x2"):
        v1 = frame.pop()
        group = [v1] if v1.is_wide else [frame.pop(), v1]
        below = [frame.pop()]
        if m == "dup2_x2" and not below[0].is_wide:
            below.insert(0, frame.pop())
        for t in group + below + group:
            frame.push(t)
        return True
    if m == "swap":
        v1, v2 = frame.pop(), frame.pop()
        frame.push(v1)
        frame.push(v2)
        return True

    if m in ("iadd", "isub", "imul", "idiv", "irem", "iand", "ior", "ixor", "ishl", "ishr", "iushr"):
        frame.pop(2)
        frame.push(INT)
        return True
    if m in ("ladd", "lsub", "lmul", "ldiv", "lrem", "land", "lor", "lxor"):
        frame.pop(2)
        frame.push(LONG)
        return True
    if m in ("lshl", "lshr", "lushr"):
        frame.pop(2)
        frame.push(LONG)
        return True
    if m in ("fadd", "fsub", "fmul", "fdiv", "frem"):
        frame.pop(2)
        frame.push(FLOAT)
        return True
    if m in ("dadd", "dsub", "dmul", "ddiv", "drem"):
        frame.pop(2)
        frame.push(DOUBLE)
        return True
    if m in ("ineg", "lneg", "fneg", "dneg"):
        return True
    if m in ("i2b", "i2c", "i2s"):
        return True
    if m[0] in "ilfd" and len(m) == 3 and m[1] == "2":
        frame.pop()
        frame.push({"i": INT, "l": LONG, "f": FLOAT, "d": DOUBLE}[m[2]])
        return True
    if m in ("lcmp", "fcmpl", "fcmpg", "dcmpl", "dcmpg"):
        frame.pop(2)
        frame.push(INT)
        return True

    if m.startswith("if_"):
        frame.pop(2)
        return True
    if m in ("ifeq", "ifne", "iflt", "ifge", "ifgt", "ifle", "ifnull", "ifnonnull"):
        frame.pop()
        return True
    if m in ("tableswitch", "lookupswitch"):
        frame.pop()
        return True
    if m in ("ireturn", "lreturn", "freturn", "dreturn", "areturn"):
        frame.pop()
        return False
    if m == "return":
        return False
    if m == "athrow":
        frame.pop()
        return False
    if m in ("jsr", "jsr_w"):
        frame.push(TOP)
        return True
    if m == "ret":
        return False

    if m == "getstatic":
        _cls, _name, desc = pool.member_ref(ins.operands[0])
        frame.push(field_type(desc))
        return True
    if m == "putstatic":
        frame.pop()
        return True
    if m == "getfield":
        _cls, _name, desc = pool.member_ref(ins.operands[0])
        frame.pop()
        frame.push(field_type(desc))
        return True
    if m == "putfield":
        frame.pop(2)
        return True

    if m in ("invokevirtual", "invokespecial", "invokestatic", "invokeinterface"):
        cls, name, desc = pool.member_ref(ins.operands[0])
        params, ret = parse_method_descriptor(desc)
        for _ in params:
            frame.pop()
        if m != "invokestatic":
            receiver = frame.pop()
            if name == "<init>" and receiver.kind == "uninitialized":
                constructed = obj(receiver.name.split("@")[0])
                _replace_everywhere(frame, receiver, constructed)
        if ret is not None:
            frame.push(ret)
        return True
    if m == "invokedynamic":
        e = pool.entry(ins.operands[0])
        _name, desc = pool.name_and_type(e.ref2)
        params, ret = parse_method_descriptor(desc)
        for _ in params:
            frame.pop()
        frame.push(ret if ret is not None else TOP)
        return True

    if m == "new":
        cls = pool.class_name(ins.operands[0])
        frame.push(TypeDesc("uninitialized", f"{cls}@{ins.offset}"))
        return True
    if m == "newarray":
        frame.pop()
        frame.push(array_of(TypeDesc("primitive", _ATYPE_PRIM[ins.operands[0]])))
        return True
    if m == "anewarray":
        frame.pop()
        name = pool.class_name(ins.operands[0])
        elem = field_type(name) if name.startswith("[") else obj(name)
        frame.push(array_of(elem))
        return True
    if m == "multianewarray":
        for _ in range(ins.operands[1]):
            frame.pop()
        name = pool.class_name(ins.operands[0])
        frame.push(field_type(name) if name.startswith("[") else obj(name))
        return True
    if m == "arraylength":
        frame.pop()
        frame.push(INT)
        return True

    if m == "checkcast":
        frame.pop()
        name = pool.class_name(ins.operands[0])
        frame.push(field_type(name) if name.startswith("[") else obj(name))
        return True
    if m == "instanceof":
        frame.pop()
        frame.push(INT)
        return True
    if m in ("monitorenter", "monitorexit"):
        frame.pop()
        return True

    raise MalformedBytecode(f"unhandled opcode {m}")


def _ldc_type(pool, index):
    from .model import (
        CP_CLASS,
        CP_DOUBLE,
        CP_DYNAMIC,
        CP_FLOAT,
        CP_INTEGER,
        CP_LONG,
        CP_METHOD_HANDLE,
        CP_METHOD_TYPE,
        CP_STRING,
    )

    e = pool.entry(index)
    if e.tag == CP_INTEGER:
        return INT
    if e.tag == CP_FLOAT:
        return FLOAT
    if e.tag == CP_LONG:
        return LONG
    if e.tag == CP_DOUBLE:
        return DOUBLE
    if e.tag == CP_STRING:
        return STRING
    if e.tag == CP_CLASS:
        return CLASS
    if e.tag == CP_METHOD_TYPE:
        return obj("java/lang/invoke/MethodType")
    if e.tag == CP_METHOD_HANDLE:
        return obj("java/lang/invoke/MethodHandle")
    if e.tag == CP_DYNAMIC:
        return TOP
    raise UnresolvableType(f"ldc of unsupported constant tag {e.tag}")


def _var_slot(mnemonic, ins):
    if "_" in mnemonic and mnemonic[-1].isdigit():
        return int(mnemonic[-1])
    return ins.operands[0]


def _replace_everywhere(frame, old, new):
    frame.stack = [new if t == old else t for t in frame.stack]
    for slot, t in frame.locals.items():
        if t == old:
            frame.locals[slot] = new


def map_statements_to_instructions(method, statements):
    """Map statements to contiguous, non-overlapping instruction offset ranges.

    Returns [(statement index, (start offset, end offset))] with end exclusive;
    statements contributing no instructions get an empty range at their
    position.  Raises AmbiguousLineMapping when statements share source lines
    or their instructions interleave.
    """
    if method.code is None:
        raise MalformedBytecode(f"{method.name} has no code attribute")
    code = method.code
    if not code.line_number_table:
        raise AmbiguousLineMapping(f"{method.name} has no line number table")

    spans = [s.line_span for s in statements]
    claimed = {}
    for k, (lo, hi) in enumerate(spans):
        for line in range(lo, hi + 1):
            if line in claimed:
                raise AmbiguousLineMapping(
                    f"statements {claimed[line]} and {k} share source line {line}"
                )
            claimed[line] = k

    owner = {}
    for ins in code.instructions:
        line = code.line_at(ins.offset)
        if line in claimed:
            owner[ins.offset] = claimed[line]

    ranges = {}
    for ins in code.instructions:
        k = owner.get(ins.offset)
        if k is None:
            continue
        start, end = ranges.get(k, (ins.offset, ins.end))
        ranges[k] = (min(start, ins.offset), max(end, ins.end))

    # contiguity: no instruction inside a statement's range may belong elsewhere
    for k, (start, end) in ranges.items():
        for ins in code.instructions:
            if start <= ins.offset < end and owner.get(ins.offset, k) != k:
                raise AmbiguousLineMapping(
                    f"instructions of statement {k} interleave with statement {owner[ins.offset]}"
                )

    out = []
    cursor = 0
    for k in range(len(statements)):
        if k in ranges:
            out.append((k, ranges[k]))
            cursor = ranges[k][1]
        else:
            out.append((k, (cursor, cursor)))
    for (_, (s1, e1)), (_, (s2, e2)) in zip(out, out[1:]):
        if s2 < e1:
            raise AmbiguousLineMapping("statement instruction ranges out of order")
    return out
