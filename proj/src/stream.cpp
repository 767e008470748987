#include "oxiscan/stream.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>

#include "oxiscan/errors.hpp"

namespace oxiscan {
namespace {

std::string fmt_seconds(double s) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.1f", s);
    return buf;
}

}  // namespace

StreamEngine::StreamEngine(AnalyzeConfig config, double sample_rate_hz)
    : cfg_(std::move(config)),
      in_rate_hz_(sample_rate_hz),
      out_rate_hz_(sample_rate_hz / static_cast<double>(cfg_.pre.downsample_factor)),
      rlm_(cfg_.rlm_limit == 0 ? 1 : cfg_.rlm_limit) {
    cfg_.validate();
    if (!(sample_rate_hz > 0.0) || !std::isfinite(sample_rate_hz)) {
        throw InputError("sample rate must be positive");
    }
    if (cfg_.pre.median_width != 0) {
        throw InputError("streaming engine does not support median filtering");
    }
    if (cfg_.kernel_width != 2) {
        throw InputError("streaming engine supports the 2-sample kernel only");
    }
    if (cfg_.emit_runs) {
        throw InputError("streaming engine does not retain the run list");
    }
    odi_counts_.assign(cfg_.odi_thresholds_pct.size(), 0);
    tsa_below_.assign(cfg_.tsa_levels_pct.size(), 0);
}

std::vector<Emission> StreamEngine::push(double timestamp_s, double value) {
    if (finalized_) {
        throw InternalError("push after finalize");
    }
    if (!std::isfinite(timestamp_s)) {
        throw InputError("non-finite timestamp");
    }
    if (!std::isfinite(value)) {
        throw InputError("non-finite value");
    }

    std::vector<Emission> out;
    std::int64_t slot = 0;
    if (!first_timestamp_s_) {
        first_timestamp_s_ = timestamp_s;
    } else {
        if (timestamp_s == prev_timestamp_s_) {
            throw InputError("duplicate sample time");
        }
        if (timestamp_s < prev_timestamp_s_) {
            throw InputError("non-monotone time");
        }
        slot = std::llround((timestamp_s - *first_timestamp_s_) * in_rate_hz_);
        if (slot <= prev_slot_) {
            throw InputError("non-uniform sample times: records collide at the " +
                             fmt_seconds(static_cast<double>(slot) / in_rate_hz_) +
                             " s slot");
        }
    }
    prev_timestamp_s_ = timestamp_s;

    // The input digest covers what arrived, before any repair or rejection,
    // matching a batch run over the same normalized records.
    auto fold = [this](double v) {
        std::uint64_t bits = 0;
        std::memcpy(&bits, &v, sizeof(bits));
        for (int i = 0; i < 8; ++i) {
            digest_ ^= (bits >> (8 * i)) & 0xffu;
            digest_ *= 1099511628211ull;
        }
    };
    fold(timestamp_s - *first_timestamp_s_);
    fold(value);

    auto hold_slot = [this, &out]() {
        ++missing_run_;
        if (static_cast<double>(missing_run_) / in_rate_hz_ > cfg_.pre.max_gap_s) {
            throw InputError(
                "unrepairable gap: " +
                fmt_seconds(static_cast<double>(missing_run_) / in_rate_hz_) +
                " s exceeds max " + fmt_seconds(cfg_.pre.max_gap_s) + " s");
        }
        if (last_valid_) {
            materialize_slot(*last_valid_, true, out);
        } else {
            // Nothing to hold yet; backfilled once the first valid value lands.
            ++head_pending_;
            ++slots_seen_;
        }
    };

    // Slots the timeline skipped over carry no reading of their own.
    for (std::int64_t s = prev_slot_ + 1; s < slot; ++s) {
        hold_slot();
    }
    prev_slot_ = slot;

    const bool valid = value >= cfg_.pre.valid_low_pct && value <= cfg_.pre.valid_high_pct;
    if (!valid) {
        out.push_back(SampleRejected{timestamp_s, value, "value outside valid range"});
        hold_slot();
        return out;
    }

    if (head_pending_ > 0) {
        // First usable reading: extend it back over the waiting head slots.
        slots_seen_ -= head_pending_;
        for (; head_pending_ > 0; --head_pending_) {
            materialize_slot(value, true, out);
        }
    }
    missing_run_ = 0;
    last_valid_ = value;
    materialize_slot(value, false, out);
    return out;
}

void StreamEngine::materialize_slot(double value, bool held, std::vector<Emission>& out) {
    ++slots_seen_;
    block_sum_ += value;
    block_interp_ = block_interp_ || held;
    if (++block_count_ < static_cast<std::size_t>(cfg_.pre.downsample_factor)) {
        return;
    }
    const double mean = block_sum_ / static_cast<double>(block_count_);
    const bool interp = block_interp_;
    block_sum_ = 0.0;
    block_count_ = 0;
    block_interp_ = false;
    accept_output_sample(mean, interp, out);
}

void StreamEngine::accept_output_sample(double value, bool interpolated,
                                        std::vector<Emission>& out) {
    value_min_ = out_count_ == 0 ? value : std::min(value_min_, value);
    value_sum_ += value;
    if (interpolated) {
        ++repaired_;
    }
    for (std::size_t k = 0; k < cfg_.tsa_levels_pct.size(); ++k) {
        if (value < cfg_.tsa_levels_pct[k]) {
            ++tsa_below_[k];
        }
    }

    if (out_count_ == 0) {
        prev_out_value_ = value;
        open_run_start_ = 0;
        open_values_.push_back(value);
        ++out_count_;
        return;
    }

    const double change = value - prev_out_value_;
    prev_out_value_ = value;
    std::optional<Trend> trend = open_trend_;
    if (change > 0.0) {
        trend = Trend::rise;
    } else if (change < 0.0) {
        trend = Trend::drop;
    }

    if (!trend || !open_trend_ || *trend == *open_trend_) {
        // Leading plateau, first definite state (which adopts the whole head,
        // same as batch back-patching), or the run simply continuing.
        open_trend_ = trend;
        open_values_.push_back(value);
        ++out_count_;
        return;
    }

    close_open_run(out);
    open_trend_ = trend;
    open_run_start_ = out_count_;
    open_values_.clear();
    open_values_.push_back(value);
    ++out_count_;
}

void StreamEngine::close_open_run(std::vector<Emission>& out) {
    Run run;
    run.state = *open_trend_;
    run.start_index = open_run_start_;
    run.end_index = open_run_start_ + open_values_.size() - 1;
    run.length_samples = open_values_.size();
    run.duration_s = static_cast<double>(run.length_samples) / out_rate_hz_;

    out.push_back(RunCompleted{run});
    rlm_add_run(rlm_, run.state, run.length_samples);

    if (run.state != Trend::drop) {
        return;
    }

    const std::vector<double> values(open_values_.begin(), open_values_.end());
    const double total_drop =
        values.front() - *std::min_element(values.begin(), values.end());
    for (std::size_t k = 0; k < cfg_.odi_thresholds_pct.size(); ++k) {
        if (total_drop >= cfg_.odi_thresholds_pct[k]) {
            ++odi_counts_[k];
        }
    }

    auto event = scan_drop_run(values, run, out_rate_hz_, 0.0, cfg_.detector);
    if (!event) {
        return;
    }
    events_.push_back(*event);
    out.push_back(EventDetected{*event});

    const std::size_t newest = events_.size() - 1;
    while (rate_lo_ <= newest &&
           events_[newest].end_s - events_[rate_lo_].start_s > cfg_.rate_window_s) {
        ++rate_lo_;
    }
    // Can be zero: an event longer than the window belongs to no window at
    // all, its own included.
    const std::size_t candidate = newest + 1 - rate_lo_;
    if (candidate > best_rate_) {
        best_rate_ = candidate;
        out.push_back(SeverityChanged{
            best_rate_, classify_severity(static_cast<double>(best_rate_))});
    }
}

FinalizeResult StreamEngine::finalize() {
    if (finalized_) {
        throw InternalError("finalize called twice");
    }
    finalized_ = true;

    FinalizeResult result;
    if (block_count_ > 0) {
        // Trailing partial block, averaged over what it actually holds.
        const double mean = block_sum_ / static_cast<double>(block_count_);
        const bool interp = block_interp_;
        block_sum_ = 0.0;
        block_count_ = 0;
        block_interp_ = false;
        accept_output_sample(mean, interp, result.emissions);
    }

    if (first_timestamp_s_ && !last_valid_) {
        throw InputError("no valid samples");
    }
    if (out_count_ < 2) {
        throw InputError("insufficient data");
    }
    if (!open_trend_) {
        throw InputError("flat signal: no gradient states");
    }

    close_open_run(result.emissions);
    open_values_.clear();
    open_trend_.reset();

    const double recording_s = static_cast<double>(out_count_) / out_rate_hz_;
    RateAnalysis rates = max_rate(events_, cfg_.rate_window_s, recording_s);
    if (rates.max_rate_per_hour != best_rate_) {
        throw InternalError("incremental max rate disagrees with recomputation");
    }

    SignalStats stats;
    stats.samples = out_count_;
    stats.sample_rate_hz = out_rate_hz_;
    stats.duration_s = recording_s;
    stats.repaired_samples = repaired_;
    stats.min_spo2 = value_min_;
    stats.mean_spo2 = value_sum_ / static_cast<double>(out_count_);

    SecondaryIndices indices;
    const double hours = recording_s / 3600.0;
    for (std::size_t k = 0; k < cfg_.odi_thresholds_pct.size(); ++k) {
        OdiEntry entry;
        entry.threshold_pct = cfg_.odi_thresholds_pct[k];
        entry.events_per_hour =
            hours > 0.0 ? static_cast<double>(odi_counts_[k]) / hours : 0.0;
        indices.odi.push_back(entry);
    }
    for (std::size_t k = 0; k < cfg_.tsa_levels_pct.size(); ++k) {
        TsaEntry entry;
        entry.level_pct = cfg_.tsa_levels_pct[k];
        entry.seconds_below = static_cast<double>(tsa_below_[k]) / out_rate_hz_;
        entry.fraction =
            static_cast<double>(tsa_below_[k]) / static_cast<double>(out_count_);
        indices.tsa.push_back(entry);
    }

    ReportMeta meta;
    meta.version = kToolVersion;
    char buf[32];
    std::snprintf(buf, sizeof(buf), "fnv1a:%016llx",
                  static_cast<unsigned long long>(digest_));
    meta.input_digest = buf;
    meta.config = cfg_;

    result.report = build_report(std::move(meta), stats, std::nullopt, rlm_, events_,
                                 std::move(indices), std::move(rates));
    return result;
}

Snapshot StreamEngine::snapshot() const {
    Snapshot snap;
    snap.samples_seen = slots_seen_;
    snap.no_data = slots_seen_ == 0;
    snap.open_run_state = open_trend_;
    snap.open_run_length = open_values_.size();
    snap.event_count = events_.size();
    snap.max_rate_per_hour = best_rate_;
    snap.severity = classify_severity(static_cast<double>(best_rate_));
    return snap;
}

std::size_t StreamEngine::retained_detection_records() const {
    return open_values_.size() + (events_.size() - rate_lo_) + 2 * cfg_.rlm_limit;
}

}  // namespace oxiscan
