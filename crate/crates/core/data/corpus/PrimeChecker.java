interface NumberTest {
    boolean passes(int value);
    int countPassing(int[] values);
}

class PrimeChecker implements NumberTest {
    private int smallest;

    public PrimeChecker(int lowest) {
        smallest = lowest;
    }

    public boolean passes(int value) {
        if (value < 2) {
            return false;
        }
        for (int divisor = 2; divisor < value; divisor = divisor + 1) {
            if (value % divisor == 0) {
                return false;
            }
        }
        return true;
    }

    public int countPassing(int[] values) {
        int found = 0;
        for (int i = 0; i < values.length; i++) {
            if (passes(values[i]) && values[i] > smallest) {
                found = found + 1;
            }
        }
        return found;
    }

    public String describeLowest() {
        String text = String.valueOf(smallest);
        return text;
    }

    public boolean matchesLabel(String label) {
        String cleaned = label.trim();
        String wanted = describeLowest();
        if (wanted.equals(cleaned)) {
            return true;
        }
        return false;
    }
}
