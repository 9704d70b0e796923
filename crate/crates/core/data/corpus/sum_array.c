int sum_array(int values[], int length) {
    int total = 0;
    for (int i = 0; i < length; i++) {
        total = total + values[i];
    }
    return total;
}

int main(void) {
    int data[4] = {3, 7, 1, 9};
    int total = sum_array(data, 4);
    int average = total / 4;
    return average;
}
