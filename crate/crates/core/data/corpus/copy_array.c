void copy_array(int source[], int target[], int length) {
    for (int i = 0; i < length; i++) {
        target[i] = source[i];
    }
}

int count_copied(int source[], int target[], int length) {
    int same = 0;
    for (int i = 0; i < length; i++) {
        if (source[i] == target[i]) {
            same = same + 1;
        }
    }
    return same;
}

int main(void) {
    int source[4] = {2, 4, 6, 8};
    int target[4] = {0, 0, 0, 0};
    int length = 4;
    copy_array(source, target, length);
    int checked = count_copied(source, target, length);
    return checked;
}
