package org.example.tracing.ui;

import java.time.LocalDate;
import java.time.temporal.ChronoUnit;
import java.util.ArrayList;
import java.util.Collection;
import java.util.List;
import java.util.function.Consumer;

import org.example.tracing.risk.ExposureWindow;
import org.example.tracing.risk.RiskCalculator;
import org.example.tracing.risk.RiskLevel;
import org.example.tracing.util.DateRange;
import org.example.tracing.util.TimeProvider;

/**
 * Turns exposure windows into view state and notifies listeners.
 */
public final class RiskCardPresenter {

    private static final int STALE_AFTER_HOURS = 48;
    private static final int LOOKBACK_DAYS = 14;

    private final RiskCalculator calculator;
    private final TimeProvider timeProvider;
    private final List<Consumer<RiskCardState>> listeners = new ArrayList<>();

    private RiskCardState current;
    private long lastUpdateSeconds = -1;
    private LocalDate tracingSince;

    public RiskCardPresenter(RiskCalculator calculator, TimeProvider timeProvider) {
        this.calculator = calculator;
        this.timeProvider = timeProvider;
    }

    public void addListener(Consumer<RiskCardState> listener) {
        listeners.add(listener);
        if (current != null) {
            listener.accept(current);
        }
    }

    public void onTracingEnabled() {
        if (tracingSince == null) {
            tracingSince = timeProvider.today();
        }
    }

    public RiskCardState update(Collection<ExposureWindow> windows) {
        LocalDate today = timeProvider.today();
        DateRange lookback = DateRange.lastDays(today, LOOKBACK_DAYS);
        List<ExposureWindow> relevant = new ArrayList<>();
        for (ExposureWindow window : windows) {
            if (lookback.contains(window.date())) {
                relevant.add(window);
            }
        }

        RiskLevel level = calculator.overallLevel(relevant);
        LocalDate lastExposure = calculator.mostRecentHighRiskDate(relevant);
        int daysSince = lastExposure == null ? -1 : (int) ChronoUnit.DAYS.between(lastExposure, today);

        current = new RiskCardState(level, lastExposure, daysSince, activeDays(today), false);
        lastUpdateSeconds = timeProvider.epochSeconds();
        publish();
        return current;
    }

    public RiskCardState refreshStaleness() {
        if (current == null) {
            return null;
        }
        long ageHours = (timeProvider.epochSeconds() - lastUpdateSeconds) / 3600;
        boolean stale = ageHours >= STALE_AFTER_HOURS;
        if (stale != current.isStale()) {
            current = current.withStale(stale);
            publish();
        }
        return current;
    }

    private int activeDays(LocalDate today) {
        if (tracingSince == null) {
            return 0;
        }
        long days = ChronoUnit.DAYS.between(tracingSince, today) + 1;
        return (int) Math.min(days, LOOKBACK_DAYS);
    }

    private void publish() {
        for (Consumer<RiskCardState> listener : listeners) {
            listener.accept(current);
        }
    }
}
