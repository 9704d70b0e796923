interface TextFilter {
    boolean keeps(String word);
    int countKept(String[] words);
}

class WordFilter implements TextFilter {
    private String banned;
    private int minLength;

    public WordFilter(String blocked, int shortest) {
        banned = blocked;
        minLength = shortest;
    }

    public boolean keeps(String word) {
        String lowered = word.toLowerCase();
        if (!lowered.equals(banned) && word.length() >= minLength) {
            return true;
        }
        return false;
    }

    public int countKept(String[] words) {
        int kept = 0;
        for (int i = 0; i < words.length; i++) {
            if (keeps(words[i]) == true) {
                kept = kept + 1;
            }
        }
        return kept;
    }

    public String summary(String[] words) {
        int total = countKept(words);
        String count = String.valueOf(total);
        return count + " of " + words.length + " kept";
    }
}
