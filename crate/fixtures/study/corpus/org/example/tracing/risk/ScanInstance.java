package org.example.tracing.risk;

/**
 * A single Bluetooth scan result aggregated by the operating system.
 */
public final class ScanInstance {

    private final int typicalAttenuationDb;
    private final int minAttenuationDb;
    private final int secondsSinceLastScan;

    public ScanInstance(int typicalAttenuationDb, int minAttenuationDb, int secondsSinceLastScan) {
        if (minAttenuationDb > typicalAttenuationDb) {
            throw new IllegalArgumentException("minimum attenuation above typical attenuation");
        }
        if (secondsSinceLastScan < 0) {
            throw new IllegalArgumentException("negative scan interval");
        }
        this.typicalAttenuationDb = typicalAttenuationDb;
        this.minAttenuationDb = minAttenuationDb;
        this.secondsSinceLastScan = secondsSinceLastScan;
    }

    public int typicalAttenuationDb() {
        return typicalAttenuationDb;
    }

    public int minAttenuationDb() {
        return minAttenuationDb;
    }

    public int secondsSinceLastScan() {
        return secondsSinceLastScan;
    }

    public boolean isCloseContact(int thresholdDb) {
        return typicalAttenuationDb <= thresholdDb;
    }

    public ScanInstance withDuration(int seconds) {
        return new ScanInstance(typicalAttenuationDb, minAttenuationDb, seconds);
    }

    @Override
    public String toString() {
        return "ScanInstance{typical=" + typicalAttenuationDb
                + ", min=" + minAttenuationDb
                + ", seconds=" + secondsSinceLastScan + "}";
    }
}
