interface Account {
    double balanceAfterFees();
    int countLargeDeposits(double threshold);
}

class BankAccount implements Account {
    private String ownerId;
    private double[] deposits;
    private double fee;

    public BankAccount(String id, double[] amounts) {
        ownerId = id;
        deposits = amounts;
        fee = 1.5;
    }

    public double balanceAfterFees() {
        double balance = 0.0;
        for (int i = 0; i < deposits.length; i++) {
            balance = balance + deposits[i] - fee;
        }
        return balance;
    }

    public int countLargeDeposits(double threshold) {
        int found = 0;
        for (int i = 0; i < deposits.length; i++) {
            if (deposits[i] >= threshold && deposits[i] > 0) {
                found = found + 1;
            }
        }
        return found;
    }

    public boolean sameOwner(String id) {
        String wanted = id.trim();
        if (wanted.equals(ownerId) == true) {
            return true;
        }
        return false;
    }

    public String report() {
        double total = balanceAfterFees();
        int big = countLargeDeposits(fee);
        String label = String.valueOf(total);
        return ownerId + " " + label + " large " + big;
    }
}
