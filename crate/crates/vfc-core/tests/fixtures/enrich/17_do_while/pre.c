int spin(int n) {
    int k = 0;
    do {
        k = k + 1;
    } while (k < n);
    return k;
}
