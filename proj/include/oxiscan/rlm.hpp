#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "oxiscan/gradient.hpp"

namespace oxiscan {

// A maximal stretch of samples sharing one trend state.
struct Run {
    Trend state = Trend::rise;
    std::size_t start_index = 0;
    std::size_t end_index = 0;  // inclusive
    std::size_t length_samples = 0;
    double duration_s = 0.0;
};

// Run-length histogram: for each trend, counts[k-1] runs of length k, with
// every run longer than `limit` clipped into the last column. Two rows of
// `limit` columns; the default limit of 600 covers a 10-minute run at 1 Hz.
struct RunLengthMatrix {
    std::size_t limit = 600;
    std::vector<std::uint64_t> rise;
    std::vector<std::uint64_t> drop;

    explicit RunLengthMatrix(std::size_t limit = 600)
        : limit(limit), rise(limit, 0), drop(limit, 0) {}

    std::uint64_t& cell(Trend state, std::size_t length);
    std::uint64_t total_runs() const;
    // Sum of length x count over both rows; equals the sample count whenever
    // no run was clipped.
    std::uint64_t total_mass() const;
};

// Splits a fully back-patched state series into maximal runs, in order.
// Consecutive runs always alternate state.
std::vector<Run> enumerate_runs(const StateSeries& series, double sample_rate_hz);

// Folds one completed run into the histogram (the streaming path).
void rlm_add_run(RunLengthMatrix& matrix, Trend state, std::size_t length_samples);

// Histogram of a whole run list. Folding runs one by one via rlm_add_run
// gives the identical matrix.
RunLengthMatrix build_rlm(const std::vector<Run>& runs, std::size_t limit);

}  // namespace oxiscan
