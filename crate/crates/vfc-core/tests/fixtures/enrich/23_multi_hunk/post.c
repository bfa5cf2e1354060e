int two(int n) {
    int a = n + 1;
    pad1();
    pad2();
    pad3();
    pad4();
    pad5();
    pad6();
    pad7();
    int b = a + 2;
    return b;
}
