package calc;

import org.junit.jupiter.api.BeforeEach;
import org.junit.jupiter.api.Test;
import static org.junit.jupiter.api.Assertions.assertEquals;

public class CalculatorTest {
    private Calculator calc;

    @BeforeEach
    public void init() {
        calc = new Calculator();
    }

    @Test
    public void add_TwoSmallNumbers_Sums() {
        int got = calc.add(2, 3);
        assertEquals(5L, got);
    }

    @Test
    public void add_NegativeNumber_Subtracts() {
        int got = calc.add(10, -4);
        assertEquals(6L, got);
    }
}
