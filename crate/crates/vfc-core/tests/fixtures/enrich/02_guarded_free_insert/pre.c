int handle(int n) {
    char *buf = malloc(n);
    if (n > 0) {
        use(buf);
    }
    return 0;
}
