#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "oxiscan/analysis.hpp"

namespace oxiscan {

// Incremental outputs, surfaced as they happen.
struct RunCompleted {
    Run run;
};
struct EventDetected {
    ApneaEvent event;
};
// Fired whenever the running max window rate reaches a new high; the label
// may or may not have changed with it. The running value never decreases.
struct SeverityChanged {
    std::size_t max_rate_per_hour = 0;
    Severity severity = Severity::normal;
};
struct SampleRejected {
    double timestamp_s = 0.0;
    double value = 0.0;
    std::string reason;
};

using Emission = std::variant<RunCompleted, EventDetected, SeverityChanged, SampleRejected>;

struct Snapshot {
    std::size_t samples_seen = 0;  // input slots materialized, gap fills included
    bool no_data = true;
    std::optional<Trend> open_run_state;
    std::size_t open_run_length = 0;
    std::size_t event_count = 0;
    std::size_t max_rate_per_hour = 0;
    Severity severity = Severity::normal;
};

struct FinalizeResult {
    std::vector<Emission> emissions;  // from closing the open run
    Report report;
};

// One-pass analyzer for live sample feeds. Single writer: one thread owns
// push/finalize; snapshot() is safe only from that same thread's view of the
// engine (distinct engines are fully independent).
//
// Differences from the batch pipeline, by design: in-gap samples are held at
// the last valid value instead of interpolated, no median filter, 2-sample
// kernel only. On gap-free input the results are identical to the batch
// pipeline run with matching settings.
class StreamEngine {
public:
    // Rejects configs the engine cannot honor (median filter, 3-sample
    // kernel, run-list retention).
    StreamEngine(AnalyzeConfig config, double sample_rate_hz);

    // Feeds one sample. Timestamps must be strictly increasing; skipped grid
    // slots and out-of-range values become held samples (rejections emit
    // SampleRejected), subject to the same max-gap rule as batch repair.
    // Non-finite input throws.
    std::vector<Emission> push(double timestamp_s, double value);

    // Closes the open run, fires its pending emissions, cross-checks the
    // incrementally tracked max rate against a fresh computation over all
    // events, and assembles the same report shape as the batch pipeline.
    // The engine cannot be pushed to afterwards.
    FinalizeResult finalize();

    Snapshot snapshot() const;

    // Size of the detection working set: open-run samples + events still
    // inside the sliding rate window + the two histogram rows. Bounded by
    // the longest run plus the busiest window regardless of stream length.
    // (The full event list for the final report is accumulated separately —
    // that is output, not detection state.)
    std::size_t retained_detection_records() const;

private:
    void materialize_slot(double value, bool held, std::vector<Emission>& out);
    void accept_output_sample(double value, bool interpolated, std::vector<Emission>& out);
    void close_open_run(std::vector<Emission>& out);

    AnalyzeConfig cfg_;
    double in_rate_hz_;
    double out_rate_hz_;

    // slot/grid state
    std::optional<double> first_timestamp_s_;
    double prev_timestamp_s_ = 0.0;
    std::int64_t prev_slot_ = -1;
    std::size_t slots_seen_ = 0;
    std::optional<double> last_valid_;
    std::size_t head_pending_ = 0;  // leading slots awaiting the first valid value
    std::size_t missing_run_ = 0;   // current stretch of held/skipped slots
    std::uint64_t digest_ = 14695981039346656037ull;  // FNV-1a offset basis

    // downsample block accumulator
    double block_sum_ = 0.0;
    std::size_t block_count_ = 0;
    bool block_interp_ = false;

    // trend state machine over output samples
    std::size_t out_count_ = 0;
    double prev_out_value_ = 0.0;
    std::optional<Trend> open_trend_;
    std::size_t open_run_start_ = 0;
    std::deque<double> open_values_;

    // accumulators
    RunLengthMatrix rlm_;
    std::vector<ApneaEvent> events_;  // full list, needed for the final report
    std::size_t rate_lo_ = 0;         // left edge of the in-window event range
    std::size_t best_rate_ = 0;
    std::vector<std::size_t> odi_counts_;
    std::vector<std::size_t> tsa_below_;
    std::size_t repaired_ = 0;
    double value_sum_ = 0.0;
    double value_min_ = 0.0;
    bool finalized_ = false;
};

}  // namespace oxiscan
