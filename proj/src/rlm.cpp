#include "oxiscan/rlm.hpp"

#include <algorithm>
#include <numeric>

#include "oxiscan/errors.hpp"

namespace oxiscan {

std::uint64_t& RunLengthMatrix::cell(Trend state, std::size_t length) {
    if (length == 0) {
        throw InternalError("zero-length run");
    }
    const std::size_t column = std::min(length, limit) - 1;
    return state == Trend::rise ? rise[column] : drop[column];
}

std::uint64_t RunLengthMatrix::total_runs() const {
    return std::accumulate(rise.begin(), rise.end(), std::uint64_t{0}) +
           std::accumulate(drop.begin(), drop.end(), std::uint64_t{0});
}

std::uint64_t RunLengthMatrix::total_mass() const {
    std::uint64_t mass = 0;
    for (std::size_t k = 0; k < limit; ++k) {
        mass += (rise[k] + drop[k]) * (k + 1);
    }
    return mass;
}

std::vector<Run> enumerate_runs(const StateSeries& series, double sample_rate_hz) {
    if (series.undefined_prefix != 0) {
        throw InternalError("state series not back-patched");
    }
    std::vector<Run> runs;
    const auto& states = series.states;
    std::size_t start = 0;
    for (std::size_t i = 1; i <= states.size(); ++i) {
        if (i == states.size() || states[i] != states[start]) {
            Run run;
            run.state = states[start];
            run.start_index = start;
            run.end_index = i - 1;
            run.length_samples = i - start;
            run.duration_s = static_cast<double>(run.length_samples) / sample_rate_hz;
            runs.push_back(run);
            start = i;
        }
    }
    return runs;
}

void rlm_add_run(RunLengthMatrix& matrix, Trend state, std::size_t length_samples) {
    matrix.cell(state, length_samples) += 1;
}

RunLengthMatrix build_rlm(const std::vector<Run>& runs, std::size_t limit) {
    if (limit == 0) {
        throw InputError("run-length limit must be positive");
    }
    RunLengthMatrix matrix(limit);
    for (const auto& run : runs) {
        rlm_add_run(matrix, run.state, run.length_samples);
    }
    return matrix;
}

}  // namespace oxiscan
