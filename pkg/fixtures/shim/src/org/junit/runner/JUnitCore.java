package org.junit.runner;

import java.lang.reflect.InvocationTargetException;
import java.lang.reflect.Method;
import java.lang.reflect.Modifier;
import java.util.ArrayList;
import java.util.List;

public class JUnitCore {
    public static void main(String[] args) {
        System.out.println("JUnit version 4.13.2");
        int run = 0;
        int failures = 0;
        for (String name : args) {
            try {
                int[] counts = runClass(Class.forName(name));
                run += counts[0];
                failures += counts[1];
            } catch (Exception e) {
                System.out.print("E");
                failures += 1;
            }
        }
        System.out.println();
        if (failures == 0) {
            System.out.println("OK (" + run + (run == 1 ? " test)" : " tests)"));
            System.exit(0);
        }
        System.out.println("FAILURES!!!");
        System.out.println("Tests run: " + run + ",  Failures: " + failures);
        System.exit(1);
    }

    private static int[] runClass(Class<?> cls) throws Exception {
        List<Method> tests = new ArrayList<Method>();
        List<Method> befores = new ArrayList<Method>();
        List<Method> afters = new ArrayList<Method>();
        List<Method> beforeClass = new ArrayList<Method>();
        List<Method> afterClass = new ArrayList<Method>();
        for (Method m : cls.getMethods()) {
            if (m.getAnnotation(org.junit.Ignore.class) != null) {
                continue;
            }
            if (m.getAnnotation(org.junit.Test.class) != null && !Modifier.isStatic(m.getModifiers())) {
                tests.add(m);
            }
            if (m.getAnnotation(org.junit.Before.class) != null) {
                befores.add(m);
            }
            if (m.getAnnotation(org.junit.After.class) != null) {
                afters.add(m);
            }
            if (m.getAnnotation(org.junit.BeforeClass.class) != null) {
                beforeClass.add(m);
            }
            if (m.getAnnotation(org.junit.AfterClass.class) != null) {
                afterClass.add(m);
            }
        }
        int failures = 0;
        for (Method m : beforeClass) {
            m.invoke(null);
        }
        for (Method test : tests) {
            try {
                Object instance = cls.getDeclaredConstructor().newInstance();
                for (Method m : befores) {
                    m.invoke(instance);
                }
                try {
                    test.invoke(instance);
                } finally {
                    for (Method m : afters) {
                        m.invoke(instance);
                    }
                }
                System.out.print(".");
            } catch (InvocationTargetException e) {
                System.out.print("E");
                failures += 1;
            }
        }
        for (Method m : afterClass) {
            m.invoke(null);
        }
        return new int[] {tests.size(), failures};
    }
}
