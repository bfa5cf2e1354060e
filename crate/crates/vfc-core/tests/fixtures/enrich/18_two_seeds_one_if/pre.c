void twice(int n) {
    if (n) {
        a1(n);
        b1(n);
    }
}
