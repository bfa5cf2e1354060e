int spin(int n) {
    int k = 0;
    do {
        k = k + 3;
    } while (k < n);
    return k;
}
