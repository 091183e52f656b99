package org.example.tracing.app;

import org.example.tracing.risk.RiskCalculator;
import org.example.tracing.risk.TransmissionRiskTable;
import org.example.tracing.storage.InMemoryKeyRepository;
import org.example.tracing.storage.KeyRepository;
import org.example.tracing.storage.KeyStore;
import org.example.tracing.sync.KeyDownloader;
import org.example.tracing.sync.RetryPolicy;
import org.example.tracing.ui.RiskCardPresenter;
import org.example.tracing.util.TimeProvider;

/**
 * Wires the application components together.
 *
 * There is no dependency injection framework here on purpose: the object
 * graph is small and constructing it by hand keeps start-up predictable.
 */
public final class TracingApplication {

    private final TimeProvider timeProvider;
    private final KeyRepository repository;
    private final KeyStore keyStore;
    private final KeyDownloader downloader;
    private final RiskCalculator calculator;
    private final RiskCardPresenter presenter;

    private boolean started;

    public TracingApplication(TimeProvider timeProvider) {
        this.timeProvider = timeProvider;
        this.repository = new InMemoryKeyRepository();
        this.keyStore = new KeyStore(repository, timeProvider);
        this.downloader = new KeyDownloader(keyStore, RetryPolicy.defaultPolicy(), timeProvider);
        this.calculator = new RiskCalculator(TransmissionRiskTable.defaultTable());
        this.presenter = new RiskCardPresenter(calculator, timeProvider);
    }

    public void start() {
        if (started) {
            throw new IllegalStateException("application already started");
        }
        started = true;
        keyStore.purgeExpired();
        downloader.scheduleNext();
    }

    public void stop() {
        if (!started) {
            return;
        }
        downloader.cancel();
        started = false;
    }

    public boolean isStarted() {
        return started;
    }

    public KeyStore keyStore() {
        return keyStore;
    }

    public KeyDownloader downloader() {
        return downloader;
    }

    public RiskCardPresenter presenter() {
        return presenter;
    }

    public static void main(String[] args) {
        TracingApplication app = new TracingApplication(TimeProvider.system());
        app.start();
        Runtime.getRuntime().addShutdownHook(new Thread(app::stop));
    }
}
