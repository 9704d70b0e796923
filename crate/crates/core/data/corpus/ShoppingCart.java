interface Checkout {
    int totalCents(int[] prices);
    boolean applyCoupon(String code);
}

class ShoppingCart implements Checkout {
    private String coupon;
    private int discount;

    public ShoppingCart(String code, int percent) {
        coupon = code;
        discount = percent;
    }

    public int totalCents(int[] prices) {
        int total = 0;
        for (int i = 0; i < prices.length; i++) {
            total = total + prices[i];
        }
        if (discount > 0 && total > 0) {
            total = total - total * discount / 100;
        }
        return total;
    }

    public boolean applyCoupon(String code) {
        String entered = code.toUpperCase();
        if (entered.equals(coupon) == true) {
            discount = 10;
            return true;
        }
        return false;
    }

    public String receipt(int[] prices) {
        int cents = totalCents(prices);
        String amount = String.valueOf(cents);
        return "total " + amount + " cents";
    }
}
