#pragma once

#include <vector>

#include "oxiscan/events.hpp"
#include "oxiscan/preprocess.hpp"

namespace oxiscan {

// Everything a full analysis run needs. The report echoes this back so a
// result can always be traced to the settings that produced it.
struct AnalyzeConfig {
    PreprocessConfig pre;
    DetectorConfig detector;
    int kernel_width = 2;
    std::size_t rlm_limit = 600;
    double rate_window_s = 3600.0;
    std::vector<double> odi_thresholds_pct = {4.0, 3.0};
    std::vector<double> tsa_levels_pct = {90.0, 88.0};
    bool emit_runs = false;

    void validate() const;
};

}  // namespace oxiscan
