package dc;

import org.junit.After;
import org.junit.Before;
import org.junit.Test;
import static org.junit.Assert.assertEquals;

public class ChainTest {
    private Chain ch;

    @Before
    public void fresh() {
        ch = new Chain();
    }

    @After
    public void drop() {
        ch = null;
    }

    @Test
    public void go_Fresh_SetsShallow() {
        ch.go();
        assertEquals(1L, ch.shallow);
    }
}
