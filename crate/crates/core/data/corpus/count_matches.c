int count_matches(int values[], int length, int wanted) {
    int found = 0;
    for (int i = 0; i < length; i++) {
        if (values[i] == wanted) {
            found = found + 1;
        }
    }
    return found;
}

int main(void) {
    int data[5] = {4, 4, 2, 4, 8};
    int hits = count_matches(data, 5, 4);
    return hits;
}
