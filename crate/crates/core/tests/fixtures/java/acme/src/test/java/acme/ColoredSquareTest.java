package acme;

import org.junit.Test;

public class ColoredSquareTest {
    @Test
    public void describe() {
        ColoredSquare s = new ColoredSquare(1, "red");
        String d = s.describe();
        if (!d.startsWith("red")) {
            fail("bad " + d);
        }
    }
}
