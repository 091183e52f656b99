package org.example.tracing.risk;

import java.time.LocalDate;
import java.util.Collection;
import java.util.HashMap;
import java.util.Map;
import java.util.TreeMap;

/**
 * Aggregates exposure windows into a per-day and overall risk level.
 */
public final class RiskCalculator {

    private static final int MIN_CALIBRATION_CONFIDENCE = 1;
    private static final int MAX_WINDOW_SECONDS = 30 * 60;

    private final TransmissionRiskTable table;

    public RiskCalculator(TransmissionRiskTable table) {
        this.table = table;
    }

    public double windowScore(ExposureWindow window) {
        if (window.calibrationConfidence() < MIN_CALIBRATION_CONFIDENCE) {
            return 0.0;
        }
        double minutes = 0.0;
        for (ScanInstance scan : window.scans()) {
            minutes += AttenuationBucket.weightedMinutes(scan);
        }
        // the OS caps windows at thirty minutes, but older devices do not
        double cap = MAX_WINDOW_SECONDS / 60.0;
        minutes = Math.min(minutes, cap);
        return minutes * table.weightFor(window);
    }

    public Map<LocalDate, Double> dailyScores(Collection<ExposureWindow> windows) {
        Map<LocalDate, Double> scores = new TreeMap<>();
        for (ExposureWindow window : windows) {
            double score = windowScore(window);
            scores.merge(window.date(), score, Double::sum);
        }
        return scores;
    }

    public Map<LocalDate, RiskLevel> dailyLevels(Collection<ExposureWindow> windows) {
        Map<LocalDate, RiskLevel> levels = new HashMap<>();
        for (Map.Entry<LocalDate, Double> entry : dailyScores(windows).entrySet()) {
            levels.put(entry.getKey(), classify(entry.getValue()));
        }
        return levels;
    }

    public RiskLevel overallLevel(Collection<ExposureWindow> windows) {
        if (windows.isEmpty()) {
            return RiskLevel.LOW;
        }
        RiskLevel result = RiskLevel.LOW;
        for (RiskLevel level : dailyLevels(windows).values()) {
            result = RiskLevel.max(result, level);
        }
        return result;
    }

    public LocalDate mostRecentHighRiskDate(Collection<ExposureWindow> windows) {
        LocalDate latest = null;
        for (Map.Entry<LocalDate, RiskLevel> entry : dailyLevels(windows).entrySet()) {
            if (entry.getValue() != RiskLevel.HIGH) {
                continue;
            }
            if (latest == null || entry.getKey().isAfter(latest)) {
                latest = entry.getKey();
            }
        }
        return latest;
    }

    public Summary summarize(Collection<ExposureWindow> windows) {
        int highDays = 0;
        int increasedDays = 0;
        double totalMinutes = 0.0;
        for (Map.Entry<LocalDate, Double> entry : dailyScores(windows).entrySet()) {
            totalMinutes += entry.getValue();
            RiskLevel level = classify(entry.getValue());
            if (level == RiskLevel.HIGH) {
                highDays++;
            } else if (level == RiskLevel.INCREASED) {
                increasedDays++;
            }
        }
        return new Summary(overallLevel(windows), highDays, increasedDays, totalMinutes);
    }

    /**
     * Aggregate numbers shown on the details screen.
     */
    public static final class Summary {
        private final RiskLevel level;
        private final int highRiskDays;
        private final int increasedRiskDays;
        private final double weightedMinutes;

        Summary(RiskLevel level, int highRiskDays, int increasedRiskDays, double weightedMinutes) {
            this.level = level;
            this.highRiskDays = highRiskDays;
            this.increasedRiskDays = increasedRiskDays;
            this.weightedMinutes = weightedMinutes;
        }

        public RiskLevel level() {
            return level;
        }

        public int highRiskDays() {
            return highRiskDays;
        }

        public int increasedRiskDays() {
            return increasedRiskDays;
        }

        public double weightedMinutes() {
            return weightedMinutes;
        }
    }

    RiskLevel classify(double minutes) {
        return RiskLevel.fromScore(minutes, table.lowThresholdMinutes(), table.highThresholdMinutes());
    }
}
