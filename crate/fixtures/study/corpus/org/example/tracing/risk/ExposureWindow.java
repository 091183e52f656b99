package org.example.tracing.risk;

import java.time.LocalDate;
import java.util.ArrayList;
import java.util.Collections;
import java.util.List;

/**
 * A window of up to thirty minutes during which another device was observed.
 */
public final class ExposureWindow {

    public enum Infectiousness {
        NONE,
        STANDARD,
        HIGH
    }

    public enum ReportType {
        CONFIRMED_TEST,
        CONFIRMED_CLINICAL_DIAGNOSIS,
        SELF_REPORT,
        RECURSIVE
    }

    private final LocalDate date;
    private final Infectiousness infectiousness;
    private final ReportType reportType;
    private final int calibrationConfidence;
    private final List<ScanInstance> scans;

    private ExposureWindow(Builder builder) {
        this.date = builder.date;
        this.infectiousness = builder.infectiousness;
        this.reportType = builder.reportType;
        this.calibrationConfidence = builder.calibrationConfidence;
        this.scans = Collections.unmodifiableList(new ArrayList<>(builder.scans));
    }

    public LocalDate date() {
        return date;
    }

    public Infectiousness infectiousness() {
        return infectiousness;
    }

    public ReportType reportType() {
        return reportType;
    }

    public int calibrationConfidence() {
        return calibrationConfidence;
    }

    public List<ScanInstance> scans() {
        return scans;
    }

    public int totalSeconds() {
        int total = 0;
        for (ScanInstance scan : scans) {
            total += scan.secondsSinceLastScan();
        }
        return total;
    }

    public int minimumAttenuation() {
        int min = Integer.MAX_VALUE;
        for (ScanInstance scan : scans) {
            min = Math.min(min, scan.minAttenuationDb());
        }
        return min;
    }

    public static Builder builder() {
        return new Builder();
    }

    public static final class Builder {
        private LocalDate date;
        private Infectiousness infectiousness = Infectiousness.STANDARD;
        private ReportType reportType = ReportType.CONFIRMED_TEST;
        private int calibrationConfidence;
        private final List<ScanInstance> scans = new ArrayList<>();

        public Builder date(LocalDate date) {
            this.date = date;
            return this;
        }

        public Builder infectiousness(Infectiousness infectiousness) {
            this.infectiousness = infectiousness;
            return this;
        }

        public Builder reportType(ReportType reportType) {
            this.reportType = reportType;
            return this;
        }

        public Builder calibrationConfidence(int calibrationConfidence) {
            this.calibrationConfidence = calibrationConfidence;
            return this;
        }

        public Builder addScan(ScanInstance scan) {
            scans.add(scan);
            return this;
        }

        public ExposureWindow build() {
            if (date == null) {
                throw new IllegalStateException("date is required");
            }
            if (scans.isEmpty()) {
                throw new IllegalStateException("an exposure window needs at least one scan");
            }
            return new ExposureWindow(this);
        }
    }
}
