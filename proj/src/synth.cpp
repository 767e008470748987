#include "oxiscan/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "oxiscan/errors.hpp"

namespace oxiscan {
namespace {

// Box-Muller on top of raw mt19937 draws. std::normal_distribution's output
// sequence is implementation-defined, which would make seeded scenarios
// differ between standard libraries; this stays bit-stable.
class GaussianSource {
public:
    explicit GaussianSource(std::uint32_t seed) : rng_(seed) {}

    double next() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 =
            (static_cast<double>(rng_()) + 1.0) / 4294967296.0;  // (0, 1]
        const double u2 = static_cast<double>(rng_()) / 4294967296.0;  // [0, 1)
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * 3.141592653589793 * u2;
        spare_ = radius * std::sin(angle);
        have_spare_ = true;
        return radius * std::cos(angle);
    }

private:
    std::mt19937 rng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

double planted_offset(const PlantedEvent& event, double t) {
    if (t < event.onset_s || t > event.onset_s + event.fall_s + event.recovery_s) {
        return 0.0;
    }
    if (t <= event.onset_s + event.fall_s) {
        return -event.depth_pct * ((t - event.onset_s) / event.fall_s);
    }
    const double into_recovery = t - event.onset_s - event.fall_s;
    return -event.depth_pct * (1.0 - into_recovery / event.recovery_s);
}

}  // namespace

bool label_qualifies(const PlantedEvent& planted, const DetectorConfig& config) {
    // Deepest fall reachable inside one detection window at the planted
    // slope, capped by the total depth.
    const double reachable =
        planted.fall_s <= config.time_window_s
            ? planted.depth_pct
            : planted.depth_pct * (config.time_window_s / planted.fall_s);
    return reachable >= config.drop_threshold_pct;
}

Scenario generate(const ScenarioSpec& spec) {
    if (!(spec.duration_s > 0.0) || !(spec.sample_rate_hz > 0.0)) {
        throw InputError("scenario duration and rate must be positive");
    }
    if (spec.noise_sd_pct < 0.0) {
        throw InputError("noise level must be non-negative");
    }

    std::vector<PlantedEvent> planted = spec.events;
    std::sort(planted.begin(), planted.end(),
              [](const PlantedEvent& a, const PlantedEvent& b) {
                  return a.onset_s < b.onset_s;
              });
    double previous_end = -1.0;
    for (const auto& event : planted) {
        if (!(event.fall_s > 0.0) || !(event.recovery_s > 0.0) || !(event.depth_pct > 0.0)) {
            throw InputError("planted event shape must be positive");
        }
        const double end = event.onset_s + event.fall_s + event.recovery_s;
        if (event.onset_s < 0.0 || end > spec.duration_s) {
            throw InputError("planted event outside the recording");
        }
        if (event.onset_s <= previous_end) {
            throw InputError("planted events overlap");
        }
        previous_end = end;
    }
    for (const auto& dropout : spec.dropouts) {
        if (dropout.onset_s < 0.0 ||
            dropout.onset_s + dropout.length_s > spec.duration_s) {
            throw InputError("dropout outside the recording");
        }
    }

    GaussianSource noise(spec.seed);
    const auto n = static_cast<std::size_t>(
        std::llround(spec.duration_s * spec.sample_rate_hz));

    Scenario scenario;
    scenario.batch.declared_rate_hz = spec.sample_rate_hz;
    scenario.batch.records.reserve(n);

    std::size_t next_event = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / spec.sample_rate_hz;
        while (next_event < planted.size() &&
               t > planted[next_event].onset_s + planted[next_event].fall_s +
                       planted[next_event].recovery_s) {
            ++next_event;
        }
        double value = spec.baseline_pct;
        if (next_event < planted.size()) {
            value += planted_offset(planted[next_event], t);
        }
        value += noise.next() * spec.noise_sd_pct;
        value = std::clamp(value, 50.0, 100.0);

        for (const auto& dropout : spec.dropouts) {
            if (t >= dropout.onset_s && t < dropout.onset_s + dropout.length_s) {
                value = 0.0;  // sensor reads nothing
                break;
            }
        }
        scenario.batch.records.push_back({t, value});
    }

    DetectorConfig default_detector;
    for (const auto& event : planted) {
        GroundTruthLabel label;
        label.planted = event;
        label.start_s = event.onset_s;
        label.end_s = event.onset_s + event.fall_s + event.recovery_s;
        label.qualifying = label_qualifies(event, default_detector);
        scenario.labels.push_back(label);
    }
    return scenario;
}

std::vector<std::pair<std::size_t, std::size_t>> oracle_detect(
    const Signal& signal, const DetectorConfig& config) {
    const auto& x = signal.values;
    const std::size_t n = x.size();
    if (n < 2) {
        return {};
    }

    // Naive re-derivation of the two-state labelling: sign of the backward
    // difference, flat copies the previous label, leading stretch takes the
    // first definite label.
    std::vector<int> trend(n, 0);  // +1 up, -1 down, 0 unknown
    int last = 0;
    for (std::size_t i = 1; i < n; ++i) {
        const double d = x[i] - x[i - 1];
        if (d > 0.0) {
            last = 1;
        } else if (d < 0.0) {
            last = -1;
        }
        trend[i] = last;
    }
    std::size_t first_known = 0;
    while (first_known < n && trend[first_known] == 0) {
        ++first_known;
    }
    if (first_known == n) {
        return {};
    }
    for (std::size_t i = 0; i < first_known; ++i) {
        trend[i] = trend[first_known];
    }

    std::vector<std::size_t> stretch_id(n, 0);
    for (std::size_t i = 1; i < n; ++i) {
        stretch_id[i] = stretch_id[i - 1] + (trend[i] != trend[i - 1] ? 1 : 0);
    }

    // Every close-enough falling pair inside one downward stretch marks it.
    std::vector<bool> marked_stretch(stretch_id.back() + 1, false);
    for (std::size_t p = 0; p + 1 < n; ++p) {
        if (trend[p] != -1) {
            continue;
        }
        for (std::size_t q = p + 1; q < n; ++q) {
            const double dt =
                static_cast<double>(q - p) / signal.sample_rate_hz;
            if (dt > config.time_window_s + 1e-9) {
                break;
            }
            if (stretch_id[q] != stretch_id[p]) {
                break;
            }
            if (x[p] - x[q] >= config.drop_threshold_pct) {
                marked_stretch[stretch_id[p]] = true;
                break;
            }
        }
    }

    std::vector<std::pair<std::size_t, std::size_t>> found;
    std::size_t start = 0;
    for (std::size_t i = 1; i <= n; ++i) {
        if (i == n || stretch_id[i] != stretch_id[start]) {
            if (marked_stretch[stretch_id[start]]) {
                found.emplace_back(start, i - 1);
            }
            start = i;
        }
    }
    return found;
}

std::size_t oracle_max_rate(const std::vector<ApneaEvent>& events, double window_s,
                            double recording_duration_s) {
    std::size_t best = 0;
    for (double s = 0.0; s <= recording_duration_s; s += 1.0) {
        std::size_t count = 0;
        for (const auto& event : events) {
            if (event.start_s >= s && event.end_s - s <= window_s) {
                ++count;
            }
        }
        best = std::max(best, count);
    }
    return best;
}

}  // namespace oxiscan
