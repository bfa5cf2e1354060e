int f(int a) {
    int b = a;
    return b;
}
