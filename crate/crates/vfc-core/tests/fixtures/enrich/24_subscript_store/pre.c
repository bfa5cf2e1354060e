void fill(int n) {
    int buf[4];
    int i = n;
    buf[i] = n;
    emit(buf);
}
