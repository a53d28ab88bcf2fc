"""Tests for lexing, statement splitting, masking, and subtokenization."""

import pytest
from hypothesis import given, strategies as st

from nextstmt.jsource import (
    KEYWORDS,
    Statement,
    Token,
    UnbalancedBraces,
    UnterminatedComment,
    UnterminatedLiteral,
    detokenize,
    lex,
    mask_strings,
    parse_source,
    print_tokens,
    split_statements,
    subtokenize,
)

FIG1_BODY = """
exception.expect(IllegalArgumentException.class);
sut.addImage((File) null);
"""


def kinds_texts(tokens):
    return [(t.kind, t.text) for t in tokens]


def test_lex_simple_declaration():
    assert kinds_texts(lex("int x = 1;")) == [
        ("keyword", "int"),
        ("identifier", "x"),
        ("operator", "="),
        ("literal-number", "1"),
        ("separator", ";"),
    ]


def test_lex_string_with_semicolon_stays_single_token():
    toks = lex('f("a;b");')
    assert [t.text for t in toks] == ["f", "(", '"a;b"', ")", ";"]
    assert toks[2].kind == "literal-string"


def test_lex_drops_comments_and_counts_lines():
    toks = lex("// first\n/* block\nspanning */ int x;\n")
    assert [t.text for t in toks] == ["int", "x", ";"]
    assert toks[0].line == 3


def test_lex_char_literal_and_escapes():
    toks = lex("char c = '\\n'; String s = \"q\\\"q\";")
    assert toks[3].kind == "literal-char"
    assert toks[3].text == "'\\n'"
    assert toks[8].kind == "literal-string"
    assert toks[8].text == '"q\\"q"'


def test_lex_unterminated_string_raises():
    with pytest.raises(UnterminatedLiteral):
        lex('"abc')
    with pytest.raises(UnterminatedLiteral):
        lex('s = "abc\nd";')


def test_lex_unterminated_comment_raises():
    with pytest.raises(UnterminatedComment):
        lex("/* never closed")


def test_lex_numbers():
    toks = lex("0x1F 0b10_1 3.14f 1_000L .5e-3 2d")
    assert [t.kind for t in toks] == ["literal-number"] * 6
    assert [t.text for t in toks] == ["0x1F", "0b10_1", "3.14f", "1_000L", ".5e-3", "2d"]


def test_lex_operators_maximal_munch():
    toks = lex("a >>>= b >>> c >> d -> e :: f ... g")
    texts = [t.text for t in toks]
    assert ">>>=" in texts and ">>>" in texts and ">>" in texts
    assert "->" in texts and "::" in texts and "..." in texts


_IDENT = st.from_regex(r"[A-Za-z][A-Za-z0-9_]{0,8}", fullmatch=True).filter(
    lambda s: s not in KEYWORDS
)
_TOKEN_TEXT = st.one_of(
    _IDENT,
    st.sampled_from(sorted(KEYWORDS)),
    st.sampled_from(["0", "42", "0x1F", "3.14", "1e3", "7L"]),
    st.from_regex(r'"[a-zA-Z0-9 ,.;]{0,6}"', fullmatch=True),
    st.sampled_from(["(", ")", "{", "}", ";", ",", ".", "=", "==", "+", "->", "::", "<", ">"]),
)


@given(st.lists(_TOKEN_TEXT, max_size=30))
def test_lex_print_fixpoint(texts):
    toks = lex(" ".join(texts))
    again = lex(print_tokens(toks))
    assert kinds_texts(again) == kinds_texts(toks)


def test_split_two_plain_statements():
    stmts = split_statements(lex(FIG1_BODY))
    assert len(stmts) == 2
    assert print_tokens(stmts[0].tokens) == "exception . expect ( IllegalArgumentException . class ) ;"
    assert print_tokens(stmts[1].tokens) == "sut . addImage ( ( File ) null ) ;"
    assert not any(s.has_control_flow or s.has_lambda for s in stmts)


def test_split_empty_body():
    assert split_statements([]) == []


def test_split_control_flow_flagged():
    stmts = split_statements(lex("int x = 0; if (x > 0) { x = 1; } else { x = 2; } f(x);"))
    assert len(stmts) == 3
    assert [s.has_control_flow for s in stmts] == [False, True, False]


def test_split_for_header_semicolons_do_not_split():
    stmts = split_statements(lex("for (int i = 0; i < n; i++) { g(i); } done();"))
    assert len(stmts) == 2
    assert stmts[0].has_control_flow


def test_split_try_catch_finally_is_one_statement():
    stmts = split_statements(lex("try { a(); } catch (Exception e) { b(); } finally { c(); }"))
    assert len(stmts) == 1
    assert stmts[0].has_control_flow


def test_split_do_while():
    stmts = split_statements(lex("do { a(); } while (x); b();"))
    assert len(stmts) == 2
    assert stmts[0].has_control_flow and not stmts[1].has_control_flow


def test_split_braceless_if_else_chain():
    stmts = split_statements(lex("if (a) x(); else if (b) y(); else z(); tail();"))
    assert len(stmts) == 2
    assert stmts[0].has_control_flow


def test_split_anonymous_class_is_one_statement():
    body = "Runnable r = new Runnable() { public void run() { } }; r.run();"
    stmts = split_statements(lex(body))
    assert len(stmts) == 2
    assert not stmts[0].has_control_flow


def test_split_lambda_and_method_reference_flagged():
    stmts = split_statements(lex("list.forEach(x -> f(x)); list.forEach(Obj::g); plain();"))
    assert [s.has_lambda for s in stmts] == [True, True, False]


def test_split_line_spans():
    stmts = split_statements(lex("a(\n  1,\n  2);\nb();"))
    assert stmts[0].line_span == (1, 3)
    assert stmts[1].line_span == (4, 4)


def test_split_unbalanced_raises():
    with pytest.raises(UnbalancedBraces):
        split_statements(lex("f(1;"))
    with pytest.raises(UnbalancedBraces):
        split_statements(lex("a()"))


@pytest.mark.parametrize(
    "body",
    [
        FIG1_BODY,
        "int x = 0; if (x > 0) { x = 1; } f(x);",
        "try { a(); } catch (E e) { b(); } c(); do { d(); } while (q);",
        "{ scoped(); } after();",
    ],
)
def test_split_preserves_token_multiset(body):
    toks = lex(body)
    stmts = split_statements(toks)
    flat = [t for s in stmts for t in s.tokens]
    assert kinds_texts(flat) == kinds_texts(toks)


def test_mask_strings_basic():
    toks = mask_strings(lex('assertEquals("expected", x)'))
    assert print_tokens(toks) == "assertEquals ( STR , x )"
    assert toks[2].kind == "identifier"


def test_mask_strings_leaves_char_literals():
    toks = mask_strings(lex("c = 'x'; s = \"x\";"))
    texts = [t.text for t in toks]
    assert "'x'" in texts and '"x"' not in texts and "STR" in texts


@given(st.lists(_TOKEN_TEXT, max_size=25))
def test_mask_strings_idempotent_and_length_preserving(texts):
    toks = lex(" ".join(texts))
    once = mask_strings(toks)
    assert len(once) == len(toks)
    assert kinds_texts(mask_strings(once)) == kinds_texts(once)
    for before, after in zip(toks, once):
        if before.kind != "literal-string":
            assert (before.kind, before.text) == (after.kind, after.text)


def test_subtokenize_known_splits():
    assert subtokenize(lex("addImage_ThrowsException"), markers=False) == [
        "add", "image", "throws", "exception",
    ]
    assert subtokenize(lex("x"), markers=False) == ["x"]
    assert subtokenize(lex("parseURL2"), markers=False) == ["parse", "url", "2"]
    assert subtokenize(lex("GMOperation"), markers=False) == ["gm", "operation"]


def test_subtokenize_non_identifiers_pass_through():
    out = subtokenize(lex('f("Hello World", 42);'))
    assert '"Hello World"' in out and "42" in out


def test_subtokenize_markers_round_trip_fig1():
    toks = lex("sut.addImage((File) null);")
    assert detokenize(subtokenize(toks)) == [t.text for t in toks]


_RT_IDENT = st.from_regex(r"[A-Za-z_$][A-Za-z0-9_$]{0,11}", fullmatch=True)


@given(st.lists(_RT_IDENT, min_size=1, max_size=40))
def test_subtokenize_round_trip_property(names):
    toks = [Token("identifier", n, 1) for n in names]
    assert detokenize(subtokenize(toks)) == names


def test_subtokenize_accepts_plain_strings():
    assert subtokenize(["fooBar", ";"], markers=False) == ["foo", "bar", ";"]


def test_parse_source_structure():
    src = """
package p.q;

import java.io.File;
import org.junit.*;
import static org.junit.Assert.assertTrue;

public class Widget extends Base {
    private int count = 3;
    protected File file;

    public Widget(int count) { this.count = count; }

    @Deprecated
    public int grow(int by) throws IllegalStateException {
        count = count + by;
        return count;
    }

    abstract int stub();
}
"""
    sm = parse_source(src, "Widget.java")
    assert sm.package == "p.q"
    assert ("java.io.File", False, False) in sm.imports
    assert ("org.junit", False, True) in sm.imports
    assert ("org.junit.Assert.assertTrue", True, False) in sm.imports
    (cls,) = sm.classes
    assert cls.name == "Widget"
    assert cls.binary_name == "p.q.Widget"
    assert cls.extends_name == "Base"
    assert [(f.name, f.type_text, f.has_initializer) for f in cls.fields] == [
        ("count", "int", True),
        ("file", "File", False),
    ]
    ctor, grow, stub = cls.methods
    assert ctor.is_constructor and ctor.name == "Widget" and ctor.params == [("int", "count")]
    assert grow.name == "grow"
    assert grow.annotations == ["@Deprecated"]
    assert grow.params == [("int", "by")]
    assert grow.return_type == "int"
    assert grow.throws == ["IllegalStateException"]
    assert len(grow.body) == 2
    assert stub.body is None


def test_parse_source_method_raw_text_verbatim():
    src = "class C {\n  void m() {\n    a(); // keep\n    b();\n  }\n}\n"
    sm = parse_source(src)
    m = sm.classes[0].methods[0]
    assert m.raw_text == "void m() {\n    a(); // keep\n    b();\n  }"
    assert src.find(m.raw_text) >= 0


def test_parse_source_nested_class_collected():
    src = "class Outer { class Inner { void f() {} } void g() {} }"
    sm = parse_source(src)
    names = [c.binary_name for c in sm.classes]
    assert names == ["Outer", "Outer$Inner"]
    assert [m.name for m in sm.classes[0].methods] == ["g"]
    assert [m.name for m in sm.classes[1].methods] == ["f"]


def test_resolve_annotation():
    src = "import org.junit.Test;\nimport org.junit.jupiter.api.*;\nclass T {}"
    sm = parse_source(src)
    assert sm.resolve_annotation("@Test") == "org.junit.Test"
    assert sm.resolve_annotation("@org.junit.Test") == "org.junit.Test"
    known = {"org.junit.jupiter.api.BeforeEach"}
    assert sm.resolve_annotation("@BeforeEach", known) == "org.junit.jupiter.api.BeforeEach"
    assert sm.resolve_annotation("@Unknown") == "Unknown"
