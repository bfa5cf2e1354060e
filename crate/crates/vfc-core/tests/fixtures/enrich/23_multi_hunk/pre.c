int two(int n) {
    int a = n;
    pad1();
    pad2();
    pad3();
    pad4();
    pad5();
    pad6();
    pad7();
    int b = a;
    return b;
}
