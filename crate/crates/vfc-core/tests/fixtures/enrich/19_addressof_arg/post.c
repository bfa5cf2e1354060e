int setup(void) {
    int v;
    init2(&v);
    return use(v);
}
