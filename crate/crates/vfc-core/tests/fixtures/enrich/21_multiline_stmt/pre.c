int wide(int a, int b) {
    int r = a +
        b;
    return r;
}
