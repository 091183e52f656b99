package org.example.tracing.risk;

/**
 * Maps a measured attenuation to a weighted exposure bucket.
 *
 * Lower attenuation means the devices were closer together, so those scans
 * weigh more in the final risk score.
 */
public enum AttenuationBucket {
    IMMEDIATE(0, 55, 1.0),
    NEAR(55, 63, 0.5),
    MEDIUM(63, 73, 0.0),
    OTHER(73, Integer.MAX_VALUE, 0.0);

    private final int lowerBoundDb;
    private final int upperBoundDb;
    private final double weight;

    AttenuationBucket(int lowerBoundDb, int upperBoundDb, double weight) {
        this.lowerBoundDb = lowerBoundDb;
        this.upperBoundDb = upperBoundDb;
        this.weight = weight;
    }

    public double weight() {
        return weight;
    }

    public boolean contains(int attenuationDb) {
        return attenuationDb >= lowerBoundDb && attenuationDb < upperBoundDb;
    }

    public static AttenuationBucket forAttenuation(int attenuationDb) {
        if (attenuationDb < 0) {
            throw new IllegalArgumentException("attenuation cannot be negative: " + attenuationDb);
        }
        for (AttenuationBucket bucket : values()) {
            if (bucket.contains(attenuationDb)) {
                return bucket;
            }
        }
        return OTHER;
    }

    public static double weightedMinutes(ScanInstance scan) {
        AttenuationBucket bucket = forAttenuation(scan.typicalAttenuationDb());
        return bucket.weight() * scan.secondsSinceLastScan() / 60.0;
    }
}
