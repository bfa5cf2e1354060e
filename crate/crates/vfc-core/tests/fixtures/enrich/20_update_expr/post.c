int bump(int n) {
    int i = n;
    i--;
    return i;
}
