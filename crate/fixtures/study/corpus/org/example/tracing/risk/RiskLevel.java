package org.example.tracing.risk;

/**
 * Coarse risk classification shown to the user.
 */
public enum RiskLevel {
    UNKNOWN(0),
    LOW(1),
    INCREASED(2),
    HIGH(3);

    private final int severity;

    RiskLevel(int severity) {
        this.severity = severity;
    }

    public int severity() {
        return severity;
    }

    public boolean isAtLeast(RiskLevel other) {
        return severity >= other.severity;
    }

    public static RiskLevel max(RiskLevel a, RiskLevel b) {
        return a.severity >= b.severity ? a : b;
    }

    public static RiskLevel fromScore(double score, double lowThreshold, double highThreshold) {
        if (Double.isNaN(score)) {
            return UNKNOWN;
        }
        if (score >= highThreshold) {
            return HIGH;
        }
        if (score >= lowThreshold) {
            return INCREASED;
        }
        return LOW;
    }
}
