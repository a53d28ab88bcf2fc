"""Java source handling: lexing, statement splitting, masking, subtokenization.

This is deliberately a lexer plus a shallow structural parser, not a full Java
front end: the corpora this toolkit targets are filtered down to straight-line
test bodies and plain class/method structure, so expression-level parsing is
never needed.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace

KEYWORDS = frozenset(
    """abstract assert boolean break byte case catch char class const continue
    default do double else enum extends final finally float for goto if
    implements import instanceof int interface long native new package private
    protected public return short static strictfp super switch synchronized
    this throw throws transient try void volatile while var record sealed
    permits yield true false null""".split()
)

# Longest-match-first operator/separator table.  `::`, `...` and `@` follow the
# JLS separator list; everything else symbolic is an operator.
SEPARATORS = frozenset(["(", ")", "{", "}", "[", "]", ";", ",", ".", "...", "@", "::"])
_SYMBOLS = [
    ">>>=", "<<=", ">>=", ">>>", "...", "->", "::", "==", "!=", "<=", ">=",
    "&&", "||", "++", "--", "+=", "-=", "*=", "/=", "&=", "|=", "^=", "%=",
    "<<", ">>", "=", ">", "<", "!", "~", "?", ":", "+", "-", "*", "/", "&",
    "|", "^", "%", "(", ")", "{", "}", "[", "]", ";", ",", ".", "@",
]

_NUMBER_RE = re.compile(
    r"""
    0[xX][0-9a-fA-F_]+(\.[0-9a-fA-F_]*)?([pP][+-]?[0-9]+)?[lLfFdD]?
    | 0[bB][01_]+[lL]?
    | [0-9][0-9_]*\.[0-9_]*([eE][+-]?[0-9]+)?[fFdD]?
    | \.[0-9][0-9_]*([eE][+-]?[0-9]+)?[fFdD]?
    | [0-9][0-9_]*([eE][+-]?[0-9]+)?[lLfFdD]?
    """,
    re.VERBOSE,
)

_IDENT_START = re.compile(r"[A-Za-z_$]")
_IDENT_RE = re.compile(r"[A-Za-z_$][A-Za-z0-9_$]*")


class LexError(ValueError):
    """Base for lexer failures; carries the offending line."""

    def __init__(self, message, line):
        super().__init__(f"{message} (line {line})")
        self.line = line


class UnterminatedLiteral(LexError):
    pass


class UnterminatedComment(LexError):
    pass


class UnbalancedBraces(ValueError):
    pass


@dataclass(frozen=True)
class Token:
    kind: str  # identifier | keyword | literal-string | literal-char | literal-number | operator | separator
    text: str
    line: int
    start: int = -1  # char offset into the original source, -1 if synthetic

    def __post_init__(self):
        if not self.text:
            raise ValueError("token text must be non-empty")
        if self.line < 1:
            raise ValueError("token line must be >= 1")


@dataclass(frozen=True)
class Statement:
    tokens: tuple
    line_span: tuple  # (first line, last line)
    has_control_flow: bool = False
    has_lambda: bool = False

    @property
    def texts(self):
        return [t.text for t in self.tokens]


def lex(text):
    """Lex Java source into tokens, dropping comments and whitespace.

    String/char literals are kept as single tokens, quotes included; unicode
    escapes inside them are passed through undecoded.
    """
    tokens = []
    i, n, line = 0, len(text), 1
    while i < n:
        c = text[i]
        if c == "\n":
            line += 1
            i += 1
            continue
        if c in " \t\r\f":
            i += 1
            continue
        if text.startswith("//", i):
            j = text.find("\n", i)
            i = n if j < 0 else j
            continue
        if text.startswith("/*", i):
            j = text.find("*/", i + 2)
            if j < 0:
                raise UnterminatedComment("unterminated comment", line)
            line += text.count("\n", i, j)
            i = j + 2
            continue
        if c == '"' or c == "'":
            j = i + 1
            while j < n:
                if text[j] == "\\":
                    j += 2
                    continue
                if text[j] == c:
                    break
                if text[j] == "\n":
                    j = n
                    break
                j += 1
            if j >= n:
                raise UnterminatedLiteral("unterminated literal", line)
            kind = "literal-string" if c == '"' else "literal-char"
            tokens.append(Token(kind, text[i : j + 1], line, i))
            i = j + 1
            continue
        if c.isdigit() or (c == "." and i + 1 < n and text[i + 1].isdigit()):
            m = _NUMBER_RE.match(text, i)
            tokens.append(Token("literal-number", m.group(), line, i))
            i = m.end()
            continue
        if _IDENT_START.match(c):
            m = _IDENT_RE.match(text, i)
            word = m.group()
            kind = "keyword" if word in KEYWORDS else "identifier"
            tokens.append(Token(kind, word, line, i))
            i = m.end()
            continue
        for sym in _SYMBOLS:
            if text.startswith(sym, i):
                kind = "separator" if sym in SEPARATORS else "operator"
                tokens.append(Token(kind, sym, line, i))
                i += len(sym)
                break
        else:
            raise LexError(f"unexpected character {c!r}", line)
    return tokens


def print_tokens(tokens):
    """Render tokens separated by single spaces; lex(print_tokens(ts)) == ts."""
    return " ".join(t.text for t in tokens)


CONTROL_KEYWORDS = frozenset(["if", "for", "while", "do", "switch", "try"])
_OPENERS = {"(": ")", "[": "]", "{": "}"}


def split_statements(body_tokens):
    """Split a balanced method-body token sequence into top-level statements.

    Control constructs (and their else/catch/finally chains) are consumed as a
    single statement and flagged; bare blocks and synchronized blocks are also
    flagged since they carry nested scope.  Lambda arrows and method
    references flag has_lambda.
    """
    tokens = list(body_tokens)
    stmts = []
    i = 0
    while i < len(tokens):
        start = i
        control = False
        tok = tokens[i]
        if tok.kind == "keyword" and tok.text in CONTROL_KEYWORDS:
            control = True
            i = _consume_control(tokens, i)
        elif tok.kind == "keyword" and tok.text == "synchronized":
            control = True
            i = _skip_group(tokens, i + 1, "(")
            i = _skip_group(tokens, i, "{")
        elif tok.text == "{":
            control = True
            i = _skip_group(tokens, i, "{")
        else:
            i = _consume_simple(tokens, i)
        span = tokens[start:i]
        stmts.append(
            Statement(
                tokens=tuple(span),
                line_span=(span[0].line, span[-1].line),
                has_control_flow=control,
                has_lambda=any(t.text in ("->", "::") for t in span),
            )
        )
    return stmts


def _consume_simple(tokens, i):
    depth = 0
    while i < len(tokens):
        t = tokens[i]
        if t.text in _OPENERS:
            depth += 1
        elif t.text in (")", "]", "}"):
            depth -= 1
            if depth < 0:
                raise UnbalancedBraces(f"unmatched {t.text!r} at line {t.line}")
        elif t.text == ";" and depth == 0:
            return i + 1
        i += 1
    raise UnbalancedBraces("statement runs past end of body")


def _skip_group(tokens, i, opener):
    """Skip a balanced opener..closer group starting at i; no-op if absent."""
    if i >= len(tokens) or tokens[i].text != opener:
        return i
    depth = 0
    while i < len(tokens):
        t = tokens[i]
        if t.text in _OPENERS:
            depth += 1
        elif t.text in (")", "]", "}"):
            depth -= 1
            if depth == 0:
                return i + 1
            if depth < 0:
                raise UnbalancedBraces(f"unmatched {t.text!r} at line {t.line}")
        i += 1
    raise UnbalancedBraces("unterminated group")


def _consume_block_or_statement(tokens, i):
    if i < len(tokens) and tokens[i].text == "{":
        return _skip_group(tokens, i, "{")
    if i < len(tokens) and tokens[i].kind == "keyword" and tokens[i].text in CONTROL_KEYWORDS:
        return _consume_control(tokens, i)
    return _consume_simple(tokens, i)


def _consume_control(tokens, i):
    kw = tokens[i].text
    i += 1
    if kw == "do":
        i = _consume_block_or_statement(tokens, i)
        if i < len(tokens) and tokens[i].text == "while":
            i = _skip_group(tokens, i + 1, "(")
            if i < len(tokens) and tokens[i].text == ";":
                i += 1
        return i
    if kw == "try":
        i = _skip_group(tokens, i, "(")  # try-with-resources header
        i = _skip_group(tokens, i, "{")
        while i < len(tokens) and tokens[i].text in ("catch", "finally"):
            if tokens[i].text == "catch":
                i = _skip_group(tokens, i + 1, "(")
            else:
                i += 1
            i = _skip_group(tokens, i, "{")
        return i
    i = _skip_group(tokens, i, "(")
    i = _consume_block_or_statement(tokens, i)
    if kw == "if":
        while i < len(tokens) and tokens[i].text == "else":
            i += 1
            if i < len(tokens) and tokens[i].text == "if":
                i = _skip_group(tokens, i + 1, "(")
            i = _consume_block_or_statement(tokens, i)
    return i


MASK_TOKEN = "STR"


def mask_strings(tokens):
    """Replace every string literal with the identifier token STR; idempotent."""
    return [
        replace(t, kind="identifier", text=MASK_TOKEN) if t.kind == "literal-string" else t
        for t in tokens
    ]


# Reversible subtokenization.  Split identifiers are wrapped in <w>...</w> with
# <hi> (capitalize next piece) / <up> (uppercase next piece) case markers and
# literal "_" separators; everything else passes through bare.
WORD_OPEN, WORD_CLOSE, CAP_MARK, UPPER_MARK = "<w>", "</w>", "<hi>", "<up>"
_PIECE_RE = re.compile(r"[0-9]+|[A-Z]+(?![a-z])|[A-Z][a-z]*|[a-z]+|\$+")
_RUN_RE = re.compile(r"_+|[^_]+")


def _split_identifier(name):
    """Yield (kind, value) units: ('_', count) for underscore runs, ('p', piece, case) otherwise."""
    units = []
    for run in _RUN_RE.findall(name):
        if run.startswith("_"):
            units.append(("_", len(run)))
            continue
        for piece in _PIECE_RE.findall(run):
            if piece.lower() == piece:
                case = "lower"
            elif len(piece) > 1 and piece.upper() == piece:
                case = "upper"
            else:
                case = "cap"
            units.append(("p", piece.lower(), case))
    return units


def subtokenize(tokens, markers=True):
    """Deterministically subtokenize a token (or lexeme) sequence.

    With markers=True the output round-trips through detokenize(); with
    markers=False the compact lowercase pieces are returned, as used for
    retrieval, metrics, and model-input assembly.
    """
    out = []
    for tok in tokens:
        kind = getattr(tok, "kind", None)
        text = tok.text if kind is not None else str(tok)
        if kind is None:
            kind = "identifier" if _IDENT_RE.fullmatch(text) else "other"
        if kind != "identifier":
            out.append(text)
            continue
        units = _split_identifier(text)
        trivial = len(units) == 1 and units[0][0] == "p" and units[0][2] == "lower"
        if trivial:
            out.append(units[0][1])
            continue
        if not markers:
            out.extend(u[1] for u in units if u[0] == "p")
            continue
        out.append(WORD_OPEN)
        for u in units:
            if u[0] == "_":
                out.extend(["_"] * u[1])
            else:
                _, piece, case = u
                if case == "cap":
                    out.append(CAP_MARK)
                elif case == "upper":
                    out.append(UPPER_MARK)
                out.append(piece)
        out.append(WORD_CLOSE)
    return out


def detokenize(subtokens):
    """Rebuild the original lexeme sequence from marker-bearing subtokens."""
    out = []
    i = 0
    while i < len(subtokens):
        st = subtokens[i]
        if st != WORD_OPEN:
            out.append(st)
            i += 1
            continue
        i += 1
        buf = []
        case = None
        while i < len(subtokens) and subtokens[i] != WORD_CLOSE:
            st = subtokens[i]
            if st == CAP_MARK:
                case = "cap"
            elif st == UPPER_MARK:
                case = "upper"
            elif st == "_":
                buf.append("_")
            else:
                if case == "cap":
                    st = st[:1].upper() + st[1:]
                elif case == "upper":
                    st = st.upper()
                buf.append(st)
                case = None
            i += 1
        if i >= len(subtokens):
            raise ValueError("unterminated word marker in subtoken stream")
        i += 1  # consume </w>
        out.append("".join(buf))
    return out


# ---------------------------------------------------------------------------
# Shallow structural parser: classes, fields, methods, annotations.
# ---------------------------------------------------------------------------

MODIFIERS = frozenset(
    "public protected private static final abstract native synchronized transient volatile strictfp default".split()
)


@dataclass
class FieldModel:
    name: str
    type_text: str
    has_initializer: bool
    modifiers: list
    annotations: list
    line: int
    init_tokens: tuple = ()


@dataclass
class MethodModel:
    name: str
    annotations: list  # raw annotation strings, e.g. "@Test" or "@org.junit.Test"
    modifiers: list
    params: list  # (type text, parameter name)
    return_type: str  # "" for constructors
    throws: list
    body: list | None  # Statements; None when there is no body
    raw_text: str
    line_span: tuple
    body_close_line: int = -1
    is_constructor: bool = False


@dataclass
class ClassModel:
    name: str
    binary_name: str
    extends_name: str | None
    annotations: list
    modifiers: list
    fields: list = field(default_factory=list)
    methods: list = field(default_factory=list)
    line_span: tuple = (1, 1)
    kind: str = "class"  # class | interface | enum
    implements_names: list = field(default_factory=list)


@dataclass
class SourceModel:
    path: str
    package: str
    imports: list  # (qualified name, is_static, is_wildcard)
    classes: list
    text: str

    def resolve_annotation(self, raw, known=()):
        """Resolve a raw annotation name against imports; returns a qualified name.

        Explicit single-type imports win; a wildcard import matches when the
        resulting name is in `known`; names containing dots are taken as
        already qualified.
        """
        name = raw.lstrip("@").split("(")[0].strip()
        if "." in name:
            return name
        for qual, is_static, is_wild in self.imports:
            if is_static:
                continue
            if not is_wild and qual.rsplit(".", 1)[-1] == name:
                return qual
            if is_wild and f"{qual}.{name}" in known:
                return f"{qual}.{name}"
        return name


def parse_source(text, path="<memory>"):
    """Parse one compilation unit into a SourceModel."""
    tokens = lex(text)
    parser = _UnitParser(tokens, text, path)
    return parser.parse()


class _UnitParser:
    def __init__(self, tokens, text, path):
        self.toks = tokens
        self.text = text
        self.path = path
        self.i = 0
        self.classes_out = []

    def peek(self, off=0):
        j = self.i + off
        return self.toks[j] if j < len(self.toks) else None

    def advance(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def parse(self):
        package = ""
        imports = []
        classes = []
        while self.i < len(self.toks):
            t = self.peek()
            if t.kind == "keyword" and t.text == "package":
                self.advance()
                package = self._qualified_name()
                self._expect(";")
            elif t.kind == "keyword" and t.text == "import":
                self.advance()
                is_static = False
                if self.peek() and self.peek().text == "static":
                    is_static = True
                    self.advance()
                name = self._qualified_name()
                is_wild = False
                if (
                    self.peek()
                    and self.peek().text == "."
                    and self.peek(1)
                    and self.peek(1).text == "*"
                ):
                    is_wild = True
                    self.advance()
                    self.advance()
                self._expect(";")
                imports.append((name, is_static, is_wild))
            else:
                decl = self._class_decl(package, outer=None)
                if decl is None:
                    self.advance()
        classes = self.classes_out
        return SourceModel(self.path, package, imports, classes, self.text)

    def _expect(self, text):
        t = self.peek()
        if t is None or t.text != text:
            where = t.line if t else "eof"
            raise UnbalancedBraces(f"expected {text!r} at {where} in {self.path}")
        return self.advance()

    def _qualified_name(self):
        parts = [self.advance().text]
        while self.peek() and self.peek().text == "." and self.peek(1) and self.peek(1).kind in ("identifier", "keyword"):
            self.advance()
            parts.append(self.advance().text)
        return ".".join(parts)

    def _collect_annotations_and_modifiers(self):
        annotations, modifiers = [], []
        while True:
            t = self.peek()
            if t is None:
                break
            if t.text == "@" and self.peek(1) and self.peek(1).text != "interface":
                start = self.i
                self.advance()
                self._qualified_name()
                if self.peek() and self.peek().text == "(":
                    self.i = _skip_group(self.toks, self.i, "(")
                annotations.append(print_tokens(self.toks[start : self.i]).replace("@ ", "@"))
            elif t.kind == "keyword" and t.text in MODIFIERS:
                modifiers.append(self.advance().text)
            else:
                break
        return annotations, modifiers

    def _type_ref(self):
        """Consume a type reference: qualified name, optional generics, array dims."""
        start = self.i
        t = self.peek()
        if t.kind == "keyword" and t.text in (
            "void", "int", "long", "short", "byte", "char", "boolean", "float", "double", "var",
        ):
            self.advance()
        else:
            self._qualified_name()
        if self.peek() and self.peek().text == "<":
            self._skip_angles()
        while self.peek() and self.peek().text == "[":
            self.advance()
            self._expect("]")
        return print_tokens(self.toks[start : self.i]).replace(" . ", ".").replace(" [ ]", "[]")

    def _skip_angles(self):
        depth = 0
        while self.i < len(self.toks):
            t = self.advance()
            if t.text == "<":
                depth += 1
            elif t.text == ">":
                depth -= 1
                if depth == 0:
                    return
            elif t.text == ">>":
                depth -= 2
                if depth <= 0:
                    return
            elif t.text == ">>>":
                depth -= 3
                if depth <= 0:
                    return

    def _class_decl(self, package, outer):
        annotations, modifiers = self._collect_annotations_and_modifiers()
        t = self.peek()
        if t is None or t.kind != "keyword" or t.text not in ("class", "interface", "enum"):
            return None
        kind = self.advance().text
        name_tok = self.advance()
        simple = name_tok.text
        binary = f"{outer}${simple}" if outer else (f"{package}.{simple}" if package else simple)
        if self.peek() and self.peek().text == "<":
            self._skip_angles()
        extends_name = None
        implements_names = []
        while self.peek() and self.peek().text != "{":
            if self.peek().text == "extends":
                self.advance()
                extends_name = self._type_ref()
            elif self.peek().text == "implements":
                self.advance()
                implements_names.append(self._type_ref())
                while self.peek() and self.peek().text == ",":
                    self.advance()
                    implements_names.append(self._type_ref())
            else:
                self.advance()
        open_tok = self._expect("{")
        model = ClassModel(
            name=simple, binary_name=binary, extends_name=extends_name,
            annotations=annotations, modifiers=modifiers, kind=kind,
            line_span=(name_tok.line, open_tok.line),
            implements_names=implements_names,
        )
        self.classes_out.append(model)
        self._class_body(model, package)
        return model

    def _class_body(self, model, package):
        while self.i < len(self.toks):
            t = self.peek()
            if t.text == "}":
                close = self.advance()
                model.line_span = (model.line_span[0], close.line)
                return
            if t.text == ";":
                self.advance()
                continue
            start = self.i
            annotations, modifiers = self._collect_annotations_and_modifiers()
            t = self.peek()
            if t is None:
                raise UnbalancedBraces(f"unterminated class body in {self.path}")
            if t.kind == "keyword" and t.text in ("class", "interface", "enum"):
                self.i = start
                self._class_decl(package, outer=model.binary_name)
                continue
            if t.text == "{":  # instance/static initializer block
                self.i = _skip_group(self.toks, self.i, "{")
                continue
            self._member(model, start, annotations, modifiers)

    def _member(self, model, start, annotations, modifiers):
        if self.peek() and self.peek().text == "<":  # generic method type params
            self._skip_angles()
        # constructor: Name (
        t = self.peek()
        if (
            t.kind == "identifier"
            and t.text == model.name
            and self.peek(1) is not None
            and self.peek(1).text == "("
        ):
            name_tok = self.advance()
            self._method_rest(model, start, annotations, modifiers, name_tok, return_type="", ctor=True)
            return
        type_text = self._type_ref()
        t = self.peek()
        if t is None:
            raise UnbalancedBraces(f"unterminated member in {self.path}")
        if self.peek(1) is not None and self.peek(1).text == "(":
            name_tok = self.advance()
            self._method_rest(model, start, annotations, modifiers, name_tok, return_type=type_text, ctor=False)
            return
        # field declaration, possibly with multiple declarators
        while True:
            name_tok = self.advance()
            while self.peek() and self.peek().text == "[":
                self.advance()
                self._expect("]")
            has_init = False
            init_tokens = ()
            if self.peek() and self.peek().text == "=":
                has_init = True
                init_tokens = self._skip_initializer()
            model.fields.append(
                FieldModel(
                    name_tok.text, type_text, has_init, list(modifiers),
                    list(annotations), name_tok.line, init_tokens,
                )
            )
            if self.peek() and self.peek().text == ",":
                self.advance()
                continue
            break
        self._expect(";")

    def _skip_initializer(self):
        self._expect("=")
        start = self.i
        depth = 0
        while self.i < len(self.toks):
            t = self.peek()
            if t.text in _OPENERS:
                depth += 1
            elif t.text in (")", "]", "}"):
                depth -= 1
            elif depth == 0 and t.text in (";", ","):
                return tuple(self.toks[start : self.i])
            self.advance()
        raise UnbalancedBraces(f"unterminated field initializer in {self.path}")

    def _method_rest(self, model, start, annotations, modifiers, name_tok, return_type, ctor):
        params = []
        self._expect("(")
        while self.peek() and self.peek().text != ")":
            if self.peek().text == ",":
                self.advance()
                continue
            p_ann, p_mods = self._collect_annotations_and_modifiers()
            p_type = self._type_ref()
            if self.peek() and self.peek().text == "...":
                self.advance()
                p_type += "[]"
            p_name = self.advance().text
            while self.peek() and self.peek().text == "[":
                self.advance()
                self._expect("]")
                p_type += "[]"
            params.append((p_type, p_name))
        self._expect(")")
        throws = []
        if self.peek() and self.peek().text == "throws":
            self.advance()
            throws.append(self._qualified_name())
            while self.peek() and self.peek().text == ",":
                self.advance()
                throws.append(self._qualified_name())
        body = None
        body_close_line = -1
        if self.peek() and self.peek().text == "{":
            body_start = self.i
            self.i = _skip_group(self.toks, self.i, "{")
            body_tokens = self.toks[body_start + 1 : self.i - 1]
            body_close_line = self.toks[self.i - 1].line
            body = split_statements(body_tokens)
        else:
            self._expect(";")
        end_tok = self.toks[self.i - 1]
        raw_start = self.toks[start].start
        raw_end = end_tok.start + len(end_tok.text)
        model.methods.append(
            MethodModel(
                name=name_tok.text,
                annotations=annotations,
                modifiers=modifiers,
                params=params,
                return_type=return_type,
                throws=throws,
                body=body,
                raw_text=self.text[raw_start:raw_end],
                line_span=(self.toks[start].line, end_tok.line),
                body_close_line=body_close_line,
                is_constructor=ctor,
            )
        )
