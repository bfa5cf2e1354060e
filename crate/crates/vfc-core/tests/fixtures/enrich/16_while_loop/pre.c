int drain(int n) {
    int count = 0;
    while (count < n) {
        count = count + 1;
    }
    return count;
}
