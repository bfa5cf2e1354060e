int check(int n) {
    int lim = 10;
    if (n > lim) {
        alert(n);
    }
    return 0;
}
