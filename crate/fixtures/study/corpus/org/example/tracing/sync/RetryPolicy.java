package org.example.tracing.sync;

/**
 * Exponential backoff with an upper bound on delay and attempts.
 */
public final class RetryPolicy {

    private final long initialDelayMillis;
    private final double multiplier;
    private final long maxDelayMillis;
    private final int maxAttempts;

    public RetryPolicy(long initialDelayMillis, double multiplier, long maxDelayMillis, int maxAttempts) {
        if (initialDelayMillis <= 0 || multiplier < 1.0 || maxAttempts < 1) {
            throw new IllegalArgumentException("invalid retry policy");
        }
        this.initialDelayMillis = initialDelayMillis;
        this.multiplier = multiplier;
        this.maxDelayMillis = maxDelayMillis;
        this.maxAttempts = maxAttempts;
    }

    public static RetryPolicy defaultPolicy() {
        return new RetryPolicy(2_000, 2.0, 15 * 60 * 1000, 6);
    }

    public boolean shouldRetry(int attempt) {
        return attempt < maxAttempts;
    }

    public long delayForAttempt(int attempt) {
        if (attempt <= 0) {
            return 0;
        }
        double delay = initialDelayMillis * Math.pow(multiplier, attempt - 1);
        return (long) Math.min(delay, maxDelayMillis);
    }

    public int maxAttempts() {
        return maxAttempts;
    }
    public long totalBudgetMillis() {
        long total = 0;
        for (int attempt = 1; attempt < maxAttempts; attempt++) {
            total += delayForAttempt(attempt);
        }
        return total;
    }

    public RetryPolicy withMaxAttempts(int attempts) {
        return new RetryPolicy(initialDelayMillis, multiplier, maxDelayMillis, attempts);
    }

    @Override
    public String toString() {
        return "RetryPolicy{initial=" + initialDelayMillis
                + "ms, multiplier=" + multiplier
                + ", max=" + maxDelayMillis
                + "ms, attempts=" + maxAttempts + "}";
    }
}
