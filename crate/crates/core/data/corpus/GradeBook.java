interface Gradable {
    double average();
    int highest();
}

class GradeBook implements Gradable {
    private String owner;
    private int[] scores;

    public GradeBook(String name, int[] values) {
        owner = name;
        scores = values;
    }

    public double average() {
        int total = 0;
        for (int i = 0; i < scores.length; i++) {
            total = total + scores[i];
        }
        if (scores.length == 0) {
            return 0.0;
        }
        return (double) total / scores.length;
    }

    public int highest() {
        int best = 0;
        for (int i = 0; i < scores.length; i++) {
            if (scores[i] > best && scores[i] > 0) {
                best = scores[i];
            }
        }
        return best;
    }

    public boolean belongsTo(String candidate) {
        String trimmed = candidate.trim();
        if (trimmed.equals(owner)) {
            return true;
        }
        return false;
    }

    public String describe() {
        int top = highest();
        String label = String.valueOf(top);
        return owner + " best " + label;
    }
}
