#pragma once

#include <cstdint>
#include <vector>

#include "oxiscan/ingest.hpp"

namespace oxiscan {

enum class Quality : std::uint8_t {
    measured,      // came straight from the device
    interpolated,  // reconstructed while repairing a gap
};

// Uniformly sampled series: sample i sits at t0_s + i / sample_rate_hz.
struct Signal {
    double sample_rate_hz = 1.0;
    double t0_s = 0.0;
    std::vector<double> values;
    std::vector<Quality> quality;
};

// Intermediate form between masking and gap repair. Missing slots keep a
// placeholder value that must never be read.
struct MaskedSeries {
    double sample_rate_hz = 1.0;
    double t0_s = 0.0;
    std::vector<double> values;
    std::vector<bool> missing;
};

struct PreprocessConfig {
    double valid_low_pct = 50.0;
    double valid_high_pct = 100.0;
    double max_gap_s = 30.0;
    int median_width = 3;  // odd; 0 disables the median filter
    int downsample_factor = 1;

    void validate() const;  // throws InputError on nonsense settings
};

// Lays normalized records onto the declared-rate grid and flags every sample
// outside [valid_low, valid_high] (sensor dropouts read as 0) as missing.
// Grid slots no record landed on are missing too, so skipped stretches of
// time surface as gaps downstream. Throws "no valid samples" if nothing
// usable remains and "non-uniform sample times" if two records collide on
// one slot.
MaskedSeries mask_invalid(const RecordBatch& batch, const PreprocessConfig& config);

// Fills missing runs: interior gaps by linear interpolation between the
// bracketing measured samples, head/tail gaps by constant extension. Each
// repaired sample is flagged Quality::interpolated. A missing run longer
// than max_gap_s raises "unrepairable gap" with the gap's time bounds.
Signal repair_gaps(const MaskedSeries& series, const PreprocessConfig& config);

// Centered median filter; edge windows shrink symmetrically so they stay
// odd-sized (the first and last sample pass through untouched). Width 0 is
// the identity. Quality flags are preserved.
Signal smooth(const Signal& signal, const PreprocessConfig& config);

// Mean over non-overlapping blocks of downsample_factor samples; a trailing
// partial block is averaged over its actual length. A block is interpolated
// if any member was. Output rate = input rate / factor; factor 1 is the
// identity. Raises "signal too short" when fewer than 2 samples remain.
Signal downsample(const Signal& signal, const PreprocessConfig& config);

// The full chain: mask -> repair -> smooth -> downsample.
Signal preprocess(const RecordBatch& batch, const PreprocessConfig& config);

inline double duration_s(const Signal& signal) {
    return static_cast<double>(signal.values.size()) / signal.sample_rate_hz;
}

}  // namespace oxiscan
