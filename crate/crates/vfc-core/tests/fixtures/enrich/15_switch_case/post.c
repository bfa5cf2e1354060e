int dispatch(int op) {
    int r = 0;
    switch (op) {
    case 1:
        r = op + 2;
        break;
    }
    return r;
}
