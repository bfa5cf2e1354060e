void g(void) {
    int a = 1;
    finish();
}
