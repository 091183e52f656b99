package org.example.tracing.sync;

import java.util.concurrent.Executors;
import java.util.concurrent.ScheduledExecutorService;
import java.util.concurrent.ScheduledFuture;
import java.util.concurrent.TimeUnit;
import java.util.function.Supplier;

import org.example.tracing.storage.KeyStore;
import org.example.tracing.util.TimeProvider;

/**
 * Periodically fetches new diagnosis keys and imports them into the store.
 */
public final class KeyDownloader {

    private static final long DOWNLOAD_INTERVAL_MILLIS = TimeUnit.HOURS.toMillis(4);

    private final KeyStore keyStore;
    private final RetryPolicy retryPolicy;
    private final TimeProvider timeProvider;
    private final ScheduledExecutorService executor = Executors.newSingleThreadScheduledExecutor();

    private Supplier<DownloadResult> source = () -> DownloadResult.failure(DownloadResult.Status.NETWORK_ERROR);
    private ScheduledFuture<?> pending;
    private String lastEtag;
    private long lastSuccessMillis = -1;

    public KeyDownloader(KeyStore keyStore, RetryPolicy retryPolicy, TimeProvider timeProvider) {
        this.keyStore = keyStore;
        this.retryPolicy = retryPolicy;
        this.timeProvider = timeProvider;
    }

    public void setSource(Supplier<DownloadResult> source) {
        this.source = source;
    }

    public synchronized void scheduleNext() {
        cancel();
        long delay = lastSuccessMillis < 0 ? 0 : DOWNLOAD_INTERVAL_MILLIS;
        pending = executor.schedule(this::runWithRetries, delay, TimeUnit.MILLISECONDS);
    }

    public synchronized void cancel() {
        if (pending != null) {
            pending.cancel(false);
            pending = null;
        }
    }

    int runWithRetries() {
        int attempt = 0;
        while (true) {
            DownloadResult result = source.get();
            if (!result.isRetryable()) {
                return handle(result);
            }
            attempt++;
            if (!retryPolicy.shouldRetry(attempt)) {
                return 0;
            }
            sleep(retryPolicy.delayForAttempt(attempt));
        }
    }

    private int handle(DownloadResult result) {
        lastSuccessMillis = timeProvider.epochSeconds() * 1000;
        lastEtag = result.etag();
        if (result.status() == DownloadResult.Status.NOT_MODIFIED) {
            return 0;
        }
        return keyStore.importKeys(result.keys());
    }

    public String lastEtag() {
        return lastEtag;
    }

    private static void sleep(long millis) {
        try {
            Thread.sleep(millis);
        } catch (InterruptedException e) {
            Thread.currentThread().interrupt();
        }
    }
}
