#include "oxiscan/events.hpp"

#include <algorithm>
#include <cmath>

#include "oxiscan/errors.hpp"

namespace oxiscan {

void DetectorConfig::validate() const {
    if (!(drop_threshold_pct > 0.0)) {
        throw InputError("drop threshold must be positive");
    }
    if (!(time_window_s > 0.0)) {
        throw InputError("time window must be positive");
    }
}

std::optional<ApneaEvent> scan_drop_run(std::span<const double> run_values,
                                        const Run& run,
                                        double sample_rate_hz,
                                        double t0_s,
                                        const DetectorConfig& config) {
    if (run.state != Trend::drop) {
        return std::nullopt;
    }
    if (run_values.size() != run.length_samples) {
        throw InternalError("run value span does not match run length");
    }

    const std::size_t n = run_values.size();
    // Longest stretch (in sample steps) still inside the time window. The
    // nudge keeps an exact-width window from falling out to float rounding.
    const auto max_steps = static_cast<std::size_t>(
        std::floor(config.time_window_s * sample_rate_hz + 1e-9));

    // First qualifying stretch wins, ties broken by earliest start then
    // earliest end. The inner scan is bounded by the window width, and it
    // intentionally checks every q rather than only the widest stretch: with
    // the centered kernel a run need not fall monotonically.
    for (std::size_t p = 0; p < n; ++p) {
        const std::size_t q_stop = std::min(p + max_steps, n - 1);
        for (std::size_t q = p + 1; q <= q_stop; ++q) {
            if (run_values[p] - run_values[q] >= config.drop_threshold_pct) {
                ApneaEvent event;
                event.run = run;
                event.start_s = t0_s + static_cast<double>(run.start_index) / sample_rate_hz;
                event.end_s = t0_s + static_cast<double>(run.end_index) / sample_rate_hz;
                event.duration_s = run.duration_s;
                event.spo2_start = run_values.front();
                event.spo2_min = *std::min_element(run_values.begin(), run_values.end());
                event.total_drop_pct = event.spo2_start - event.spo2_min;
                event.qual_start_index = run.start_index + p;
                event.qual_end_index = run.start_index + q;
                event.qual_start_s =
                    t0_s + static_cast<double>(event.qual_start_index) / sample_rate_hz;
                event.qual_end_s =
                    t0_s + static_cast<double>(event.qual_end_index) / sample_rate_hz;
                event.qualifying_drop_pct = run_values[p] - run_values[q];
                return event;
            }
        }
    }
    return std::nullopt;
}

std::vector<ApneaEvent> detect_events(const Signal& signal,
                                      const std::vector<Run>& runs,
                                      const DetectorConfig& config) {
    config.validate();
    std::vector<ApneaEvent> events;
    const std::span<const double> values(signal.values);
    for (const auto& run : runs) {
        if (run.state != Trend::drop) {
            continue;
        }
        auto event = scan_drop_run(values.subspan(run.start_index, run.length_samples),
                                   run, signal.sample_rate_hz, signal.t0_s, config);
        if (event) {
            events.push_back(std::move(*event));
        }
    }
    return events;
}

OdiEntry compute_odi(const Signal& signal, const std::vector<Run>& runs,
                     double threshold_pct) {
    std::size_t qualifying = 0;
    for (const auto& run : runs) {
        if (run.state != Trend::drop) {
            continue;
        }
        const auto begin = signal.values.begin() + static_cast<std::ptrdiff_t>(run.start_index);
        const auto end = begin + static_cast<std::ptrdiff_t>(run.length_samples);
        const double total_drop = *begin - *std::min_element(begin, end);
        if (total_drop >= threshold_pct) {
            ++qualifying;
        }
    }
    const double hours = duration_s(signal) / 3600.0;
    OdiEntry entry;
    entry.threshold_pct = threshold_pct;
    entry.events_per_hour = hours > 0.0 ? static_cast<double>(qualifying) / hours : 0.0;
    return entry;
}

TsaEntry compute_tsa(const Signal& signal, double level_pct) {
    const auto below = static_cast<std::size_t>(
        std::count_if(signal.values.begin(), signal.values.end(),
                      [&](double v) { return v < level_pct; }));
    TsaEntry entry;
    entry.level_pct = level_pct;
    entry.seconds_below = static_cast<double>(below) / signal.sample_rate_hz;
    entry.fraction = signal.values.empty()
                         ? 0.0
                         : static_cast<double>(below) / static_cast<double>(signal.values.size());
    return entry;
}

}  // namespace oxiscan
