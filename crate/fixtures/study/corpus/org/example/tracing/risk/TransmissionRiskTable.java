package org.example.tracing.risk;

import java.util.EnumMap;
import java.util.Map;

/**
 * Lookup table from report type and infectiousness to a transmission weight.
 */
public final class TransmissionRiskTable {

    private final Map<ExposureWindow.ReportType, Double> reportWeights;
    private final Map<ExposureWindow.Infectiousness, Double> infectiousnessWeights;
    private final double lowThresholdMinutes;
    private final double highThresholdMinutes;

    public TransmissionRiskTable(
            Map<ExposureWindow.ReportType, Double> reportWeights,
            Map<ExposureWindow.Infectiousness, Double> infectiousnessWeights,
            double lowThresholdMinutes,
            double highThresholdMinutes) {
        if (lowThresholdMinutes > highThresholdMinutes) {
            throw new IllegalArgumentException("low threshold exceeds high threshold");
        }
        this.reportWeights = new EnumMap<>(reportWeights);
        this.infectiousnessWeights = new EnumMap<>(infectiousnessWeights);
        this.lowThresholdMinutes = lowThresholdMinutes;
        this.highThresholdMinutes = highThresholdMinutes;
    }

    public double weightFor(ExposureWindow window) {
        double report = reportWeights.getOrDefault(window.reportType(), 0.0);
        double infectiousness = infectiousnessWeights.getOrDefault(window.infectiousness(), 0.0);
        return report * infectiousness;
    }

    public double lowThresholdMinutes() {
        return lowThresholdMinutes;
    }

    public double highThresholdMinutes() {
        return highThresholdMinutes;
    }

    public static TransmissionRiskTable defaultTable() {
        Map<ExposureWindow.ReportType, Double> reports = new EnumMap<>(ExposureWindow.ReportType.class);
        reports.put(ExposureWindow.ReportType.CONFIRMED_TEST, 1.0);
        reports.put(ExposureWindow.ReportType.CONFIRMED_CLINICAL_DIAGNOSIS, 1.0);
        reports.put(ExposureWindow.ReportType.SELF_REPORT, 0.6);
        reports.put(ExposureWindow.ReportType.RECURSIVE, 0.2);

        Map<ExposureWindow.Infectiousness, Double> infectiousness =
                new EnumMap<>(ExposureWindow.Infectiousness.class);
        infectiousness.put(ExposureWindow.Infectiousness.NONE, 0.0);
        infectiousness.put(ExposureWindow.Infectiousness.STANDARD, 0.6);
        infectiousness.put(ExposureWindow.Infectiousness.HIGH, 1.0);

        return new TransmissionRiskTable(reports, infectiousness, 9.0, 15.0);
    }
}
