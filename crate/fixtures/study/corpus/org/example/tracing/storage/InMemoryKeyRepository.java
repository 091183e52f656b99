package org.example.tracing.storage;

import java.util.ArrayList;
import java.util.Collection;
import java.util.Iterator;
import java.util.LinkedHashSet;
import java.util.List;
import java.util.Set;

/**
 * Thread-safe repository backed by an insertion-ordered set.
 */
public final class InMemoryKeyRepository implements KeyRepository {

    private final Set<DiagnosisKey> keys = new LinkedHashSet<>();

    @Override
    public synchronized void saveAll(Collection<DiagnosisKey> newKeys) {
        keys.addAll(newKeys);
    }

    @Override
    public synchronized List<DiagnosisKey> findAll() {
        return new ArrayList<>(keys);
    }

    @Override
    public synchronized List<DiagnosisKey> findByStartIntervalAtLeast(int interval) {
        List<DiagnosisKey> result = new ArrayList<>();
        for (DiagnosisKey key : keys) {
            if (key.rollingStartInterval() >= interval) {
                result.add(key);
            }
        }
        return result;
    }

    @Override
    public synchronized int deleteWhere(KeyPredicate predicate) {
        int removed = 0;
        Iterator<DiagnosisKey> it = keys.iterator();
        while (it.hasNext()) {
            if (predicate.test(it.next())) {
                it.remove();
                removed++;
            }
        }
        return removed;
    }

    @Override
    public synchronized int count() {
        return keys.size();
    }

    public synchronized int maxStartInterval() {
        int max = -1;
        for (DiagnosisKey key : keys) {
            max = Math.max(max, key.rollingStartInterval());
        }
        return max;
    }

    public synchronized List<DiagnosisKey> findByRiskLevel(int transmissionRiskLevel) {
        List<DiagnosisKey> result = new ArrayList<>();
        for (DiagnosisKey key : keys) {
            if (key.transmissionRiskLevel() == transmissionRiskLevel) {
                result.add(key);
            }
        }
        return result;
    }

    public synchronized void clear() {
        keys.clear();
    }
}
