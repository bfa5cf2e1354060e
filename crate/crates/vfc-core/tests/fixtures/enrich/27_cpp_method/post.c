int Counter::add(int v) {
    total = total + v * 2;
    return total;
}
