package org.example.tracing.util;

import java.time.Clock;
import java.time.Instant;
import java.time.LocalDate;
import java.time.ZoneId;

/**
 * Abstraction over the wall clock so tests can control time.
 */
public abstract class TimeProvider {

    public abstract Instant now();

    public abstract ZoneId zone();

    public long epochSeconds() {
        return now().getEpochSecond();
    }

    public LocalDate today() {
        return now().atZone(zone()).toLocalDate();
    }

    public static TimeProvider system() {
        return fromClock(Clock.systemDefaultZone());
    }

    public static TimeProvider fromClock(final Clock clock) {
        return new TimeProvider() {
            @Override
            public Instant now() {
                return clock.instant();
            }

            @Override
            public ZoneId zone() {
                return clock.getZone();
            }
        };
    }

    /**
     * A manually advanced clock for tests.
     */
    public static final class Fixed extends TimeProvider {
        private Instant instant;
        private final ZoneId zone;

        public Fixed(Instant instant, ZoneId zone) {
            this.instant = instant;
            this.zone = zone;
        }

        public void advanceSeconds(long seconds) {
            instant = instant.plusSeconds(seconds);
        }

        public void set(Instant instant) {
            this.instant = instant;
        }

        @Override
        public Instant now() {
            return instant;
        }

        @Override
        public ZoneId zone() {
            return zone;
        }
    }
}
