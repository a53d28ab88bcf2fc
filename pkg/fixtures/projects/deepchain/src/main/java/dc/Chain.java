package dc;

public class Chain {
    public int shallow;
    public int deep;

    public void go() {
        a();
    }

    public void a() {
        b();
    }

    public void b() {
        c();
    }

    public void c() {
        shallow = 1;
        d();
    }

    public void d() {
        deep = 1;
    }
}
