package org.example.tracing.storage;

import java.util.ArrayList;
import java.util.Collection;
import java.util.List;

import org.example.tracing.util.Preconditions;
import org.example.tracing.util.TimeProvider;

/**
 * Domain-level access to diagnosis keys, including retention handling.
 */
public final class KeyStore {

    public static final int RETENTION_DAYS = 14;
    /** Ten-minute rolling intervals per day. */
    public static final int INTERVALS_PER_DAY = 144;

    private final KeyRepository repository;
    private final TimeProvider timeProvider;
    private int lastImportedInterval = -1;

    public KeyStore(KeyRepository repository, TimeProvider timeProvider) {
        this.repository = Preconditions.checkNotNull(repository, "repository");
        this.timeProvider = Preconditions.checkNotNull(timeProvider, "timeProvider");
    }

    public int importKeys(Collection<DiagnosisKey> downloaded) {
        List<DiagnosisKey> fresh = new ArrayList<>();
        long now = timeProvider.epochSeconds();
        for (DiagnosisKey key : downloaded) {
            if (key.isExpiredAt(now, RETENTION_DAYS)) {
                continue;
            }
            fresh.add(key);
            lastImportedInterval = Math.max(lastImportedInterval, key.rollingStartInterval());
        }
        repository.saveAll(fresh);
        return fresh.size();
    }

    public int purgeExpired() {
        final long now = timeProvider.epochSeconds();
        return repository.deleteWhere(key -> key.isExpiredAt(now, RETENTION_DAYS));
    }

    public List<DiagnosisKey> keysSince(int interval) {
        return repository.findByStartIntervalAtLeast(interval);
    }

    public int lastImportedInterval() {
        return lastImportedInterval;
    }

    public int size() {
        return repository.count();
    }
}
