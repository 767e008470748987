#include "oxiscan/rates.hpp"

#include <algorithm>

#include "oxiscan/errors.hpp"

namespace oxiscan {

Severity classify_severity(double rate) {
    if (rate < 0.0) {
        throw InternalError("negative event rate");
    }
    if (rate <= 5.0) {
        return Severity::normal;
    }
    if (rate <= 15.0) {
        return Severity::mild;
    }
    if (rate <= 30.0) {
        return Severity::moderate;
    }
    return Severity::severe;
}

const char* to_string(Severity severity) {
    switch (severity) {
        case Severity::normal: return "normal";
        case Severity::mild: return "mild";
        case Severity::moderate: return "moderate";
        case Severity::severe: return "severe";
    }
    throw InternalError("unknown severity");
}

RateAnalysis max_rate(const std::vector<ApneaEvent>& events, double window_s,
                      double recording_duration_s) {
    if (!(window_s > 0.0)) {
        throw InputError("rate window must be positive");
    }

    RateAnalysis analysis;
    analysis.window_s = window_s;
    analysis.insufficient_duration = recording_duration_s < window_s;

    const std::size_t n = events.size();
    analysis.per_window.resize(n);

    std::size_t best_index = 0;
    std::size_t hi = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (hi < i) {
            hi = i;
        }
        while (hi < n && events[hi].end_s - events[i].start_s <= window_s) {
            ++hi;
        }
        analysis.per_window[i] = hi - i;
        if (analysis.per_window[i] > analysis.max_rate_per_hour) {
            analysis.max_rate_per_hour = analysis.per_window[i];
            best_index = i;
        }
    }

    if (analysis.max_rate_per_hour > 0) {
        analysis.max_window_start_s = events[best_index].start_s;
        analysis.max_window_end_s = events[best_index].start_s + window_s;
    }
    analysis.severity = classify_severity(static_cast<double>(analysis.max_rate_per_hour));
    return analysis;
}

}  // namespace oxiscan
