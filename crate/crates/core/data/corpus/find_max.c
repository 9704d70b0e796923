int find_max(int values[], int length) {
    int best = 0;
    for (int i = 0; i < length; i++) {
        if (values[i] > best) {
            best = values[i];
        }
    }
    return best;
}

int main(void) {
    int data[6] = {5, 12, 8, 3, 10, 7};
    int largest = find_max(data, 6);
    int remainder = largest % 2;
    return remainder;
}
