#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "oxiscan/events.hpp"

namespace oxiscan {

enum class Severity { normal, mild, moderate, severe };

// Band edges are counts per window: <=5 normal, <=15 mild, <=30 moderate,
// above that severe.
Severity classify_severity(double rate);
const char* to_string(Severity severity);

struct RateAnalysis {
    double window_s = 3600.0;
    // per_window[i] = events counted in the window opening at event i's start.
    std::vector<std::size_t> per_window;
    std::size_t max_rate_per_hour = 0;
    double max_window_start_s = 0.0;
    double max_window_end_s = 0.0;
    Severity severity = Severity::normal;
    // Recording shorter than one window: the count is reported as-is, never
    // extrapolated, and this flag is raised instead.
    bool insufficient_duration = false;
};

// Peak events-per-window over the recording. Candidate windows open at each
// event's start; event j belongs to the window opened at event i when j >= i
// and end(j) - start(i) <= window_s. Two-pointer, linear in the event count.
RateAnalysis max_rate(const std::vector<ApneaEvent>& events, double window_s,
                      double recording_duration_s);

}  // namespace oxiscan
