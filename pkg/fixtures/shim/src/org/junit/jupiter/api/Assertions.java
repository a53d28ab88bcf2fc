package org.junit.jupiter.api;

public class Assertions {
    private Assertions() {
    }

    public static void assertTrue(boolean condition) {
        if (!condition) {
            fail("expected true");
        }
    }

    public static void assertFalse(boolean condition) {
        if (condition) {
            fail("expected false");
        }
    }

    public static void assertEquals(Object expected, Object actual) {
        if (expected == null ? actual != null : !expected.equals(actual)) {
            fail("expected:<" + expected + "> but was:<" + actual + ">");
        }
    }

    public static void assertEquals(long expected, long actual) {
        if (expected != actual) {
            fail("expected:<" + expected + "> but was:<" + actual + ">");
        }
    }

    public static void assertEquals(double expected, double actual) {
        assertEquals(expected, actual, 0.0);
    }

    public static void assertEquals(double expected, double actual, double delta) {
        if (Double.compare(expected, actual) != 0 && !(Math.abs(expected - actual) <= delta)) {
            fail("expected:<" + expected + "> but was:<" + actual + ">");
        }
    }

    public static void assertNotNull(Object object) {
        if (object == null) {
            fail("expected not null");
        }
    }

    public static void assertNull(Object object) {
        if (object != null) {
            fail("expected null but was:<" + object + ">");
        }
    }

    public static void fail() {
        fail("");
    }

    public static void fail(String message) {
        throw new AssertionError(message == null ? "" : message);
    }
}
