"""Shared fixtures: a small compiled project exercising the full pipeline."""

import pytest

from nextstmt.elements import collect_project
from nextstmt.minijdk import compile_sources

GM_OPERATION = """\
package gm;

import java.io.File;
import java.util.ArrayList;
import java.util.List;

public class GMOperation {
    private final List images = new ArrayList();
    private String lastError;

    public void addImage(File file) {
        if (file == null) {
            throw new IllegalArgumentException("file must not be null");
        }
        images.add(file.getPath());
    }

    public int imageCount() {
        return images.size();
    }

    public void reset() {
        images.clear();
    }
}
"""

GM_TEST = """\
package gm;

import java.io.File;
import org.junit.Before;
import org.junit.Ignore;
import org.junit.Test;
import static org.junit.Assert.assertEquals;
import static org.junit.Assert.assertTrue;

public class GMOperationTest {
    private GMOperation sut;

    @Before
    public void setup() {
        sut = new GMOperation();
    }

    @Test
    public void addImage_NewFile_CountsIt() {
        File f = new File("a.png");
        sut.addImage(f);
        assertEquals(1L, sut.imageCount());
    }

    @Test
    public void reset_AfterAdd_Clears() {
        sut.addImage(png("b.png"));
        sut.reset();
        assertEquals(0L, sut.imageCount());
    }

    @Test
    public void test0() {
        sut.reset();
    }

    @Test
    public void addImage_Null_Throws() {
        boolean thrown = false;
        try {
            sut.addImage(null);
        } catch (IllegalArgumentException e) {
            thrown = true;
        }
        assertTrue(thrown);
    }

    @Ignore
    @Test
    public void skipped() {
        sut.reset();
    }

    @Test
    public int badReturn() {
        return sut.imageCount();
    }

    private File png(String name) {
        return new File(name);
    }
}
"""


def write_gm_project(root):
    main_dir = root / "src" / "main" / "java" / "gm"
    test_dir = root / "src" / "test" / "java" / "gm"
    main_dir.mkdir(parents=True)
    test_dir.mkdir(parents=True)
    op = main_dir / "GMOperation.java"
    tc = test_dir / "GMOperationTest.java"
    op.write_text(GM_OPERATION)
    tc.write_text(GM_TEST)
    compile_sources([str(op), str(tc)], [], str(root / "classes"))
    return root


@pytest.fixture(scope="session")
def gm_root(tmp_path_factory):
    return write_gm_project(tmp_path_factory.mktemp("gmop"))


@pytest.fixture(scope="session")
def gm_store(gm_root):
    return collect_project(str(gm_root))
