#pragma once

#include <optional>
#include <span>
#include <vector>

#include "oxiscan/rlm.hpp"

namespace oxiscan {

struct DetectorConfig {
    // A drop run becomes an event when it contains a contiguous stretch of at
    // most time_window_s seconds falling by at least drop_threshold_pct
    // points. Both bounds are inclusive.
    double drop_threshold_pct = 4.0;
    double time_window_s = 10.0;

    void validate() const;
};

// A desaturation event. Bounds cover the full drop run that produced it; the
// qualifying window is the first (smallest start, then smallest end) stretch
// inside the run that satisfied the threshold rule.
struct ApneaEvent {
    Run run;
    double start_s = 0.0;
    double end_s = 0.0;
    double duration_s = 0.0;
    double spo2_start = 0.0;      // value at the run's first sample
    double spo2_min = 0.0;        // minimum value inside the run
    double total_drop_pct = 0.0;  // spo2_start - spo2_min
    std::size_t qual_start_index = 0;
    std::size_t qual_end_index = 0;
    double qual_start_s = 0.0;
    double qual_end_s = 0.0;
    double qualifying_drop_pct = 0.0;
};

// Tests one drop run for a qualifying window. run_values must hold exactly
// the run's samples. Scans candidate windows in (start, end) lexicographic
// order and stops at the first hit, so at most one event per run. Shared by
// the batch detector and the streaming engine.
std::optional<ApneaEvent> scan_drop_run(std::span<const double> run_values,
                                        const Run& run,
                                        double sample_rate_hz,
                                        double t0_s,
                                        const DetectorConfig& config);

// Applies scan_drop_run to every drop run, in time order.
std::vector<ApneaEvent> detect_events(const Signal& signal,
                                      const std::vector<Run>& runs,
                                      const DetectorConfig& config);

// Desaturation-index entry: drop runs whose total fall reaches threshold_pct,
// per hour of recording. No window constraint here — slow deep declines count
// toward the index even when they are too gradual to fire an event.
struct OdiEntry {
    double threshold_pct = 4.0;
    double events_per_hour = 0.0;
};

// Time-spent-below entry for one saturation level (strictly below).
struct TsaEntry {
    double level_pct = 90.0;
    double seconds_below = 0.0;
    double fraction = 0.0;
};

OdiEntry compute_odi(const Signal& signal, const std::vector<Run>& runs,
                     double threshold_pct);
TsaEntry compute_tsa(const Signal& signal, double level_pct);

struct SecondaryIndices {
    std::vector<OdiEntry> odi;
    std::vector<TsaEntry> tsa;
};

}  // namespace oxiscan
