package org.junit;

public class Assert {
    protected Assert() {
    }

    public static void assertTrue(boolean condition) {
        assertTrue("expected true", condition);
    }

    public static void assertTrue(String message, boolean condition) {
        if (!condition) {
            fail(message);
        }
    }

    public static void assertFalse(boolean condition) {
        assertFalse("expected false", condition);
    }

    public static void assertFalse(String message, boolean condition) {
        if (condition) {
            fail(message);
        }
    }

    public static void assertEquals(Object expected, Object actual) {
        assertEquals("", expected, actual);
    }

    public static void assertEquals(String message, Object expected, Object actual) {
        if (expected == null ? actual != null : !expected.equals(actual)) {
            fail(message + " expected:<" + expected + "> but was:<" + actual + ">");
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

    public static void assertSame(Object expected, Object actual) {
        if (expected != actual) {
            fail("expected same:<" + expected + "> was not:<" + actual + ">");
        }
    }

    public static void fail() {
        fail("");
    }

    public static void fail(String message) {
        throw new AssertionError(message == null ? "" : message);
    }
}
