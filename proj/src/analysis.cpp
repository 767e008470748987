#include "oxiscan/analysis.hpp"

#include <algorithm>
#include <numeric>

#include "oxiscan/errors.hpp"

namespace oxiscan {

void AnalyzeConfig::validate() const {
    pre.validate();
    detector.validate();
    if (kernel_width != 2 && kernel_width != 3) {
        throw InputError("kernel width must be 2 or 3");
    }
    if (rlm_limit == 0) {
        throw InputError("run-length limit must be positive");
    }
    if (!(rate_window_s > 0.0)) {
        throw InputError("rate window must be positive");
    }
    if (odi_thresholds_pct.empty() || tsa_levels_pct.empty()) {
        throw InputError("at least one index threshold is required");
    }
    for (double t : odi_thresholds_pct) {
        if (!(t > 0.0)) {
            throw InputError("index thresholds must be positive");
        }
    }
    for (double l : tsa_levels_pct) {
        if (!(l > 0.0)) {
            throw InputError("index thresholds must be positive");
        }
    }
}

AnalyzeOutcome analyze_batch(const RecordBatch& batch, const AnalyzeConfig& config) {
    config.validate();

    const RecordBatch normalized = normalize_time(batch);

    AnalyzeOutcome outcome;
    outcome.signal = preprocess(normalized, config.pre);
    outcome.states = backpatch(state_series(outcome.signal, config.kernel_width));
    outcome.runs = enumerate_runs(outcome.states, outcome.signal.sample_rate_hz);
    outcome.rlm = build_rlm(outcome.runs, config.rlm_limit);
    outcome.events = detect_events(outcome.signal, outcome.runs, config.detector);
    for (double threshold : config.odi_thresholds_pct) {
        outcome.indices.odi.push_back(compute_odi(outcome.signal, outcome.runs, threshold));
    }
    for (double level : config.tsa_levels_pct) {
        outcome.indices.tsa.push_back(compute_tsa(outcome.signal, level));
    }
    outcome.rates =
        max_rate(outcome.events, config.rate_window_s, duration_s(outcome.signal));

    SignalStats stats;
    stats.samples = outcome.signal.values.size();
    stats.sample_rate_hz = outcome.signal.sample_rate_hz;
    stats.duration_s = duration_s(outcome.signal);
    stats.repaired_samples = static_cast<std::size_t>(
        std::count(outcome.signal.quality.begin(), outcome.signal.quality.end(),
                   Quality::interpolated));
    stats.min_spo2 = *std::min_element(outcome.signal.values.begin(),
                                       outcome.signal.values.end());
    stats.mean_spo2 =
        std::accumulate(outcome.signal.values.begin(), outcome.signal.values.end(), 0.0) /
        static_cast<double>(outcome.signal.values.size());

    ReportMeta meta;
    meta.version = kToolVersion;
    meta.input_digest = record_digest(normalized);
    meta.config = config;
    meta.time_origin = normalized.time_origin;

    outcome.report = build_report(
        std::move(meta), stats,
        config.emit_runs ? std::optional<std::vector<Run>>(outcome.runs) : std::nullopt,
        outcome.rlm, outcome.events, outcome.indices, outcome.rates);
    return outcome;
}

}  // namespace oxiscan
