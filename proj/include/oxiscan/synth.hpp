#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "oxiscan/analysis.hpp"

namespace oxiscan {

// One planted desaturation: linear fall from baseline, then linear recovery.
struct PlantedEvent {
    double onset_s = 0.0;
    double fall_s = 10.0;
    double depth_pct = 5.0;
    double recovery_s = 20.0;
};

// A sensor dropout: the reading flatlines to 0 for length_s seconds.
struct DropoutSpec {
    double onset_s = 0.0;
    double length_s = 5.0;
};

struct ScenarioSpec {
    std::uint32_t seed = 1;
    double duration_s = 600.0;
    double sample_rate_hz = 1.0;
    double baseline_pct = 96.0;
    double noise_sd_pct = 0.15;
    std::vector<PlantedEvent> events;     // non-overlapping, inside [0, duration_s]
    std::vector<DropoutSpec> dropouts;
};

struct GroundTruthLabel {
    PlantedEvent planted;
    double start_s = 0.0;
    double end_s = 0.0;
    // Whether the planted shape satisfies the detection rule analytically:
    // the fall reaches threshold depth within one time window at its slope.
    bool qualifying = false;
};

struct Scenario {
    RecordBatch batch;
    std::vector<GroundTruthLabel> labels;
};

// Deterministic per seed (the gaussian is generated portably, so identical
// bytes on any platform). Values are clamped to [50, 100]; dropouts
// overwrite the reading with 0. Overlapping or out-of-range planted events
// are rejected.
Scenario generate(const ScenarioSpec& spec);

bool label_qualifies(const PlantedEvent& planted, const DetectorConfig& config);

// ---------------------------------------------------------------------------
// Reference oracles. Both are deliberately naive re-implementations used to
// check the real pipeline; they share no code with it. Quadratic-ish — meant
// for test inputs up to ~1e5 samples, not production data.
// ---------------------------------------------------------------------------

// Exhaustive event finder: every index pair (p, q), p < q, no more than
// time_window_s apart, falling by at least drop_threshold_pct, and lying in
// the same drop stretch, marks that stretch. Returns the marked stretches as
// (start_index, end_index) pairs, deduplicated, in order.
std::vector<std::pair<std::size_t, std::size_t>> oracle_detect(
    const Signal& signal, const DetectorConfig& config);

// Max events-per-window by sweeping window starts over a dense 1 s grid.
// An event belongs to a window when it starts at or after the window opens
// and ends within it.
std::size_t oracle_max_rate(const std::vector<ApneaEvent>& events, double window_s,
                            double recording_duration_s);

}  // namespace oxiscan
