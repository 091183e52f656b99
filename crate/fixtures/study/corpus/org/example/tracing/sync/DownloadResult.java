package org.example.tracing.sync;

import java.util.Collections;
import java.util.List;

import org.example.tracing.storage.DiagnosisKey;

/**
 * Outcome of a single key download attempt.
 */
public final class DownloadResult {

    public enum Status {
        SUCCESS,
        NOT_MODIFIED,
        SERVER_ERROR,
        NETWORK_ERROR
    }

    private final Status status;
    private final List<DiagnosisKey> keys;
    private final String etag;

    private DownloadResult(Status status, List<DiagnosisKey> keys, String etag) {
        this.status = status;
        this.keys = keys;
        this.etag = etag;
    }

    public static DownloadResult success(List<DiagnosisKey> keys, String etag) {
        return new DownloadResult(Status.SUCCESS, Collections.unmodifiableList(keys), etag);
    }

    public static DownloadResult notModified(String etag) {
        return new DownloadResult(Status.NOT_MODIFIED, Collections.emptyList(), etag);
    }

    public static DownloadResult failure(Status status) {
        if (status == Status.SUCCESS || status == Status.NOT_MODIFIED) {
            throw new IllegalArgumentException("not a failure status: " + status);
        }
        return new DownloadResult(status, Collections.emptyList(), null);
    }

    public Status status() {
        return status;
    }

    public List<DiagnosisKey> keys() {
        return keys;
    }

    public String etag() {
        return etag;
    }

    public boolean isRetryable() {
        return status == Status.SERVER_ERROR || status == Status.NETWORK_ERROR;
    }
}
