void g(void) {
    int a = 1;
    log_msg(a);
    finish();
}
