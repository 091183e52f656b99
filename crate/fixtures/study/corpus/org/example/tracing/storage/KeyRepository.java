package org.example.tracing.storage;

import java.util.Collection;
import java.util.List;

/**
 * Persistence boundary for downloaded diagnosis keys.
 */
public interface KeyRepository {

    void saveAll(Collection<DiagnosisKey> keys);

    List<DiagnosisKey> findAll();

    List<DiagnosisKey> findByStartIntervalAtLeast(int interval);

    int deleteWhere(KeyPredicate predicate);

    int count();

    @FunctionalInterface
    interface KeyPredicate {
        boolean test(DiagnosisKey key);
    }
}
