package org.example.tracing.storage;

import java.util.Arrays;
import java.util.Objects;

/**
 * A temporary exposure key published by a user who reported a positive test.
 */
public final class DiagnosisKey {

    public static final int KEY_LENGTH = 16;

    private final byte[] keyData;
    private final int rollingStartInterval;
    private final int rollingPeriod;
    private final int transmissionRiskLevel;

    public DiagnosisKey(byte[] keyData, int rollingStartInterval, int rollingPeriod, int transmissionRiskLevel) {
        Objects.requireNonNull(keyData, "keyData");
        if (keyData.length != KEY_LENGTH) {
            throw new IllegalArgumentException("key must be " + KEY_LENGTH + " bytes, was " + keyData.length);
        }
        if (rollingPeriod <= 0 || rollingPeriod > 144) {
            throw new IllegalArgumentException("rolling period out of range: " + rollingPeriod);
        }
        this.keyData = Arrays.copyOf(keyData, keyData.length);
        this.rollingStartInterval = rollingStartInterval;
        this.rollingPeriod = rollingPeriod;
        this.transmissionRiskLevel = transmissionRiskLevel;
    }

    public byte[] keyData() {
        return Arrays.copyOf(keyData, keyData.length);
    }

    public int rollingStartInterval() {
        return rollingStartInterval;
    }

    public int rollingPeriod() {
        return rollingPeriod;
    }

    public int transmissionRiskLevel() {
        return transmissionRiskLevel;
    }

    /** Interval number (ten-minute units since epoch) after which the key is no longer valid. */
    public int expiryInterval() {
        return rollingStartInterval + rollingPeriod;
    }

    public boolean isExpiredAt(long epochSeconds, int retentionDays) {
        long intervalNow = epochSeconds / 600;
        return expiryInterval() + retentionDays * 144L < intervalNow;
    }

    @Override
    public boolean equals(Object o) {
        if (this == o) {
            return true;
        }
        if (!(o instanceof DiagnosisKey)) {
            return false;
        }
        DiagnosisKey other = (DiagnosisKey) o;
        return rollingStartInterval == other.rollingStartInterval
                && rollingPeriod == other.rollingPeriod
                && Arrays.equals(keyData, other.keyData);
    }

    @Override
    public int hashCode() {
        return 31 * Arrays.hashCode(keyData) + rollingStartInterval;
    }

    @Override
    public String toString() {
        StringBuilder hex = new StringBuilder();
        for (byte b : keyData) {
            hex.append(String.format("%02x", b));
        }
        return "DiagnosisKey{" + hex + "@" + rollingStartInterval + "}";
    }
}
