package org.example.tracing.util;

import java.time.LocalDate;
import java.time.temporal.ChronoUnit;
import java.util.ArrayList;
import java.util.Iterator;
import java.util.List;
import java.util.NoSuchElementException;

/**
 * An inclusive range of calendar days.
 */
public final class DateRange implements Iterable<LocalDate> {

    private final LocalDate start;
    private final LocalDate end;

    public DateRange(LocalDate start, LocalDate end) {
        Preconditions.checkNotNull(start, "start");
        Preconditions.checkNotNull(end, "end");
        Preconditions.checkArgument(!end.isBefore(start), "end before start");
        this.start = start;
        this.end = end;
    }

    public static DateRange lastDays(LocalDate today, int days) {
        Preconditions.checkPositive(days, "days");
        return new DateRange(today.minusDays(days - 1L), today);
    }

    public LocalDate start() {
        return start;
    }

    public LocalDate end() {
        return end;
    }

    public boolean contains(LocalDate date) {
        return !date.isBefore(start) && !date.isAfter(end);
    }

    public long lengthInDays() {
        return ChronoUnit.DAYS.between(start, end) + 1;
    }

    public boolean overlaps(DateRange other) {
        return !other.end.isBefore(start) && !other.start.isAfter(end);
    }

    public DateRange intersect(DateRange other) {
        if (!overlaps(other)) {
            return null;
        }
        LocalDate s = start.isAfter(other.start) ? start : other.start;
        LocalDate e = end.isBefore(other.end) ? end : other.end;
        return new DateRange(s, e);
    }

    public List<LocalDate> toList() {
        List<LocalDate> days = new ArrayList<>();
        for (LocalDate day : this) {
            days.add(day);
        }
        return days;
    }

    @Override
    public Iterator<LocalDate> iterator() {
        return new Iterator<LocalDate>() {
            private LocalDate next = start;

            @Override
            public boolean hasNext() {
                return !next.isAfter(end);
            }

            @Override
            public LocalDate next() {
                if (!hasNext()) {
                    throw new NoSuchElementException();
                }
                LocalDate current = next;
                next = next.plusDays(1);
                return current;
            }
        };
    }

    @Override
    public boolean equals(Object o) {
        if (!(o instanceof DateRange)) {
            return false;
        }
        DateRange other = (DateRange) o;
        return start.equals(other.start) && end.equals(other.end);
    }

    @Override
    public int hashCode() {
        return start.hashCode() * 31 + end.hashCode();
    }

    @Override
    public String toString() {
        return "[" + start + ", " + end + "]";
    }
}
