"""Tests for the bundled Java-subset toolchain (compiler + runtime + CLI)."""

import io
import subprocess
import sys

import pytest

from nextstmt.jclass import infer_local_types, map_statements_to_instructions, parse_classfile
from nextstmt.jsource import parse_source
from nextstmt.minijdk import CompileError, Machine, compile_sources

from oracles import scan_classfile


def build(tmp_path, sources, classpath=()):
    """sources: {relative path: text}.  Returns the output directory."""
    src_dir = tmp_path / "src"
    out_dir = tmp_path / "classes"
    paths = []
    for rel, text in sources.items():
        p = src_dir / rel
        p.parent.mkdir(parents=True, exist_ok=True)
        p.write_text(text)
        paths.append(str(p))
    compile_sources(paths, list(classpath), str(out_dir))
    return out_dir


def run_main(out_dir, main_class, args=(), classpath=()):
    out, err = io.StringIO(), io.StringIO()
    machine = Machine([str(out_dir)] + [str(c) for c in classpath], stdout=out, stderr=err)
    status = machine.run_main(main_class, args)
    return status, out.getvalue(), err.getvalue()


CALC = """
package demo;

public class Calc {
    private int base;
    public static int calls = 0;

    public Calc(int base) {
        this.base = base;
    }

    public int add(int x, int y) {
        calls++;
        return x + y + base;
    }

    public int safeDiv(int a, int b) {
        if (b == 0) {
            throw new IllegalArgumentException("zero divisor");
        }
        return a / b;
    }

    public String label(String name, int n) {
        return name + "=" + n;
    }
}
"""


class TestCompileRun:
    def test_arithmetic_and_strings(self, tmp_path):
        main = """
package demo;

public class Main {
    public static void main(String[] args) {
        Calc c = new Calc(10);
        System.out.println(c.add(1, 2));
        System.out.println(c.label("n", -4));
        long big = 4000000000L;
        System.out.println(big * 2);
        double d = 7.0;
        System.out.println(d / 2.0);
        System.out.println(Calc.calls);
    }
}
"""
        out_dir = build(tmp_path, {"demo/Calc.java": CALC, "demo/Main.java": main})
        status, out, err = run_main(out_dir, "demo.Main")
        assert status == 0, err
        assert out == "13\nn=-4\n8000000000\n3.5\n1\n"

    def test_int_overflow_wraps(self, tmp_path):
        main = """
public class Wrap {
    public static void main(String[] args) {
        int v = 2147483647;
        v = v + 1;
        System.out.println(v);
        System.out.println(-8 / 3);
        System.out.println(-8 % 3);
    }
}
"""
        out_dir = build(tmp_path, {"Wrap.java": main})
        status, out, _ = run_main(out_dir, "Wrap")
        assert status == 0
        assert out == "-2147483648\n-2\n-2\n"

    def test_control_flow_loops(self, tmp_path):
        main = """
public class Loops {
    public static void main(String[] args) {
        int total = 0;
        for (int i = 1; i <= 10; i++) {
            total += i;
        }
        while (total > 50) {
            total -= 3;
        }
        String tag = total % 2 == 0 ? "even" : "odd";
        System.out.println(total);
    }
}
"""
        # ternary is unsupported: expect a compile error naming the file/line
        with pytest.raises(CompileError):
            build(tmp_path, {"Loops.java": main})

    def test_loops_without_ternary(self, tmp_path):
        main = """
public class Loops {
    public static void main(String[] args) {
        int total = 0;
        for (int i = 1; i <= 10; i++) {
            total += i;
        }
        while (total > 50) {
            total -= 3;
        }
        if (total % 2 == 0) {
            System.out.println("even " + total);
        } else {
            System.out.println("odd " + total);
        }
    }
}
"""
        out_dir = build(tmp_path, {"Loops.java": main})
        status, out, _ = run_main(out_dir, "Loops")
        assert status == 0
        assert out == "odd 49\n"

    def test_inheritance_and_interfaces(self, tmp_path):
        files = {
            "shapes/Shape.java": """
package shapes;

public interface Shape {
    double area();
}
""",
            "shapes/Rect.java": """
package shapes;

public class Rect implements Shape {
    private double w;
    private double h;

    public Rect(double w, double h) {
        this.w = w;
        this.h = h;
    }

    public double area() {
        return w * h;
    }

    public String toString() {
        return "Rect(" + w + "x" + h + ")";
    }
}
""",
            "shapes/Square.java": """
package shapes;

public class Square extends Rect {
    public Square(double side) {
        super(side, side);
    }
}
""",
            "shapes/Main.java": """
package shapes;

public class Main {
    public static void main(String[] args) {
        Shape s = new Square(3.0);
        System.out.println(s.area());
        System.out.println(s instanceof Rect);
        Rect r = (Rect) s;
        System.out.println(r);
    }
}
""",
        }
        out_dir = build(tmp_path, files)
        status, out, _ = run_main(out_dir, "shapes.Main")
        assert status == 0
        assert out == "9.0\ntrue\nRect(3.0x3.0)\n"

    def test_try_catch(self, tmp_path):
        files = {
            "demo/Calc.java": CALC,
            "demo/Main.java": """
package demo;

public class Main {
    public static void main(String[] args) {
        Calc c = new Calc(0);
        try {
            c.safeDiv(1, 0);
            System.out.println("unreachable");
        } catch (IllegalArgumentException e) {
            System.out.println("caught: " + e.getMessage());
        }
        try {
            int[] a = new int[2];
            int v = a[5];
        } catch (ArrayIndexOutOfBoundsException e) {
            System.out.println("bounds");
        }
    }
}
""",
        }
        out_dir = build(tmp_path, files)
        status, out, _ = run_main(out_dir, "demo.Main")
        assert status == 0
        assert out == "caught: zero divisor\nbounds\n"

    def test_uncaught_exception_exits_1_with_trace(self, tmp_path):
        files = {
            "demo/Calc.java": CALC,
            "demo/Boom.java": """
package demo;

public class Boom {
    public static void main(String[] args) {
        new Calc(1).safeDiv(5, 0);
    }
}
""",
        }
        out_dir = build(tmp_path, files)
        status, out, err = run_main(out_dir, "demo.Boom")
        assert status == 1
        assert 'Exception in thread "main" java.lang.IllegalArgumentException: zero divisor' in err
        assert "at demo.Calc.safeDiv(Calc.java:" in err

    def test_null_pointer_and_cast_errors(self, tmp_path):
        main = """
public class Errs {
    public static void main(String[] args) {
        Object o = "text";
        String s = (String) o;
        System.out.println(s.length());
        String dead = null;
        System.out.println(dead.length());
    }
}
"""
        out_dir = build(tmp_path, {"Errs.java": main})
        status, out, err = run_main(out_dir, "Errs")
        assert status == 1
        assert out == "4\n"
        assert "java.lang.NullPointerException" in err

    def test_static_initializer_and_field_inits(self, tmp_path):
        main = """
public class Statics {
    public static int counter = 5;
    private String name = "abc";

    public static void main(String[] args) {
        System.out.println(counter);
        System.out.println(new Statics().name.length());
    }
}
"""
        out_dir = build(tmp_path, {"Statics.java": main})
        status, out, _ = run_main(out_dir, "Statics")
        assert status == 0
        assert out == "5\n3\n"


class TestCompileErrors:
    def test_undeclared_symbol_reports_file_and_line(self, tmp_path):
        src = tmp_path / "Bad.java"
        src.write_text(
            "public class Bad {\n  public int f() {\n    return undeclaredVar + 1;\n  }\n}\n"
        )
        with pytest.raises(CompileError) as exc:
            compile_sources([str(src)], [], str(tmp_path / "out"))
        assert exc.value.line == 3
        assert "undeclaredVar" in exc.value.message
        assert str(exc.value).startswith(str(src) + ":3: error:")

    def test_unknown_class_in_declaration(self, tmp_path):
        src = tmp_path / "Bad.java"
        src.write_text(
            "public class Bad {\n  public void f() {\n    Widget w = null;\n  }\n}\n"
        )
        with pytest.raises(CompileError) as exc:
            compile_sources([str(src)], [], str(tmp_path / "out"))
        assert "Widget" in exc.value.message

    def test_bad_argument_type(self, tmp_path):
        src = tmp_path / "Bad.java"
        src.write_text(
            'public class Bad {\n  public int f() {\n    return "x".substring("y").length();\n  }\n}\n'
        )
        with pytest.raises(CompileError) as exc:
            compile_sources([str(src)], [], str(tmp_path / "out"))
        assert "substring" in exc.value.message

    def test_missing_return(self, tmp_path):
        src = tmp_path / "Bad.java"
        src.write_text("public class Bad {\n  public int f() {\n    int x = 1;\n  }\n}\n")
        with pytest.raises(CompileError) as exc:
            compile_sources([str(src)], [], str(tmp_path / "out"))
        assert "return" in exc.value.message


class TestEmittedClassfiles:
    def test_parseable_and_scanner_consistent(self, tmp_path):
        out = compile_sources(
            [self._write(tmp_path, "demo/Calc.java", CALC)], [], None
        )
        data = out["demo/Calc"]
        cf = parse_classfile(data)
        raw = scan_classfile(data)
        assert raw["major"] == cf.major == 49
        assert raw["name"] == "demo/Calc"
        assert raw["super"] == "java/lang/Object"
        names = {(m["name"], m["descriptor"]) for m in raw["methods"]}
        assert ("add", "(II)I") in names
        assert ("<init>", "(I)V") in names

    def test_methods_carry_line_and_variable_tables(self, tmp_path):
        out = compile_sources(
            [self._write(tmp_path, "demo/Calc.java", CALC)], [], None
        )
        cf = parse_classfile(out["demo/Calc"])
        m = cf.method("safeDiv", "(II)I")
        assert m.code is not None
        assert m.code.line_number_table
        slots = {e[2]: e[3] for e in m.code.local_variable_table}
        assert slots.get("a") == "I" and slots.get("b") == "I"

    def test_interpreter_agrees_with_declared_types(self, tmp_path):
        src = """
package p;

public class T {
    public int go() {
        Object o = new java.io.File("x");
        int n = 3;
        return n;
    }
}
"""
        out = compile_sources([self._write(tmp_path, "p/T.java", src)], [], None)
        cf = parse_classfile(out["p/T"])
        m = cf.method("go", "()I")
        model = parse_source(src, "T.java")
        body = model.classes[0].methods[0].body
        ranges = dict(map_statements_to_instructions(m, body))
        boundary = m.code.instructions[ranges[0][1]].offset if ranges[0][1] < len(
            m.code.instructions
        ) else len(m.code.code)
        types = infer_local_types(m, cf, upto=boundary)
        # declared Object, constructed File: inference keeps the precise type
        assert types[1].name == "java/io/File"

    @staticmethod
    def _write(tmp_path, rel, text):
        p = tmp_path / rel
        p.parent.mkdir(parents=True, exist_ok=True)
        p.write_text(text)
        return str(p)


JUNIT_TEST = """
package demo;

import org.junit.Before;
import org.junit.Test;
import static org.junit.Assert.assertEquals;
import static org.junit.Assert.assertTrue;
import static org.junit.Assert.fail;

public class CalcTest {
    private Calc sut;

    @Before
    public void setUp() {
        sut = new Calc(0);
    }

    @Test
    public void add_TwoNumbers_ReturnsSum() {
        assertEquals(7L, sut.add(3, 4));
    }

    @Test
    public void safeDiv_Zero_Throws() {
        try {
            sut.safeDiv(1, 0);
            fail("expected exception");
        } catch (IllegalArgumentException e) {
            assertTrue(e.getMessage().contains("zero"));
        }
    }
}
"""


class TestJUnitRunner:
    def test_green_suite_exits_0(self, tmp_path):
        out_dir = build(tmp_path, {"demo/Calc.java": CALC, "demo/CalcTest.java": JUNIT_TEST})
        status, out, _ = run_main(out_dir, "org.junit.runner.JUnitCore", ["demo.CalcTest"])
        assert status == 0
        assert "OK (2 tests)" in out

    def test_failing_suite_exits_1(self, tmp_path):
        failing = """
package demo;

import org.junit.Test;
import static org.junit.Assert.assertEquals;

public class RedTest {
    @Test
    public void wrong() {
        assertEquals(1L, 2L);
    }
}
"""
        out_dir = build(tmp_path, {"demo/RedTest.java": failing})
        status, out, _ = run_main(out_dir, "org.junit.runner.JUnitCore", ["demo.RedTest"])
        assert status == 1
        assert "FAILURES!!!" in out
        assert "expected:<1> but was:<2>" in out

    def test_ignored_tests_are_skipped(self, tmp_path):
        src = """
package demo;

import org.junit.Ignore;
import org.junit.Test;

public class SkipTest {
    @Test
    public void runs() {
    }

    @Ignore
    @Test
    public void skipped() {
        throw new IllegalStateException("must not run");
    }
}
"""
        out_dir = build(tmp_path, {"demo/SkipTest.java": src})
        status, out, _ = run_main(out_dir, "org.junit.runner.JUnitCore", ["demo.SkipTest"])
        assert status == 0
        assert "OK (1 test)" in out

    def test_before_runs_per_test_and_super_hooks_first(self, tmp_path):
        src = """
package demo;

import org.junit.Before;
import org.junit.Test;
import static org.junit.Assert.assertEquals;

public class OrderTest extends BaseTest {
    @Before
    public void here() {
        log = log + "sub;";
    }

    @Test
    public void ordering() {
        assertEquals("base;sub;", log);
    }
}
"""
        base = """
package demo;

import org.junit.Before;

public class BaseTest {
    protected String log = "";

    @Before
    public void base() {
        log = log + "base;";
    }
}
"""
        out_dir = build(tmp_path, {"demo/BaseTest.java": base, "demo/OrderTest.java": src})
        status, out, _ = run_main(out_dir, "org.junit.runner.JUnitCore", ["demo.OrderTest"])
        assert status == 0, out


class TestCli:
    def test_javac_then_java_roundtrip(self, tmp_path):
        src = tmp_path / "Hello.java"
        src.write_text(
            'public class Hello {\n'
            '    public static void main(String[] args) {\n'
            '        System.out.println("hi " + args.length);\n'
            '    }\n'
            '}\n'
        )
        out_dir = tmp_path / "classes"
        r = subprocess.run(
            [sys.executable, "-m", "nextstmt.minijdk.cli", "javac", "-d", str(out_dir), str(src)],
            capture_output=True, text=True,
        )
        assert r.returncode == 0, r.stderr
        r = subprocess.run(
            [sys.executable, "-m", "nextstmt.minijdk.cli", "java", "-cp", str(out_dir), "Hello", "a", "b"],
            capture_output=True, text=True,
        )
        assert r.returncode == 0
        assert r.stdout == "hi 2\n"

    def test_javac_error_exit_code(self, tmp_path):
        src = tmp_path / "Nope.java"
        src.write_text("public class Nope {\n  void f() {\n    mystery();\n  }\n}\n")
        r = subprocess.run(
            [sys.executable, "-m", "nextstmt.minijdk.cli", "javac", "-d", str(tmp_path), str(src)],
            capture_output=True, text=True,
        )
        assert r.returncode == 1
        assert "error:" in r.stderr
