package org.example.tracing.ui;

import java.time.LocalDate;

import org.example.tracing.risk.RiskLevel;

/**
 * Immutable view state for the risk card on the home screen.
 */
public final class RiskCardState {

    public enum Tone {
        NEUTRAL,
        CALM,
        WARNING,
        ALERT
    }

    private final RiskLevel level;
    private final LocalDate lastExposure;
    private final int daysSinceExposure;
    private final int activeTracingDays;
    private final boolean stale;

    public RiskCardState(
            RiskLevel level,
            LocalDate lastExposure,
            int daysSinceExposure,
            int activeTracingDays,
            boolean stale) {
        this.level = level;
        this.lastExposure = lastExposure;
        this.daysSinceExposure = daysSinceExposure;
        this.activeTracingDays = activeTracingDays;
        this.stale = stale;
    }

    public RiskLevel level() {
        return level;
    }

    public LocalDate lastExposure() {
        return lastExposure;
    }

    public int daysSinceExposure() {
        return daysSinceExposure;
    }

    public int activeTracingDays() {
        return activeTracingDays;
    }

    public boolean isStale() {
        return stale;
    }

    public Tone tone() {
        if (stale) {
            return Tone.NEUTRAL;
        }
        switch (level) {
            case HIGH:
                return Tone.ALERT;
            case INCREASED:
                return Tone.WARNING;
            case LOW:
                return Tone.CALM;
            default:
                return Tone.NEUTRAL;
        }
    }

    public String headline() {
        if (stale) {
            return "Risk status outdated";
        }
        switch (level) {
            case HIGH:
                return "Increased risk";
            case INCREASED:
                return "Some encounters";
            case LOW:
                return "Low risk";
            default:
                return "Unknown risk";
        }
    }

    public RiskCardState withStale(boolean newStale) {
        return new RiskCardState(level, lastExposure, daysSinceExposure, activeTracingDays, newStale);
    }
}
