int limit = 10;

int f(void) {
    return 1;
}
