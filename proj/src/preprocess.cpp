#include "oxiscan/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "oxiscan/errors.hpp"

namespace oxiscan {
namespace {

std::string fmt_seconds(double s) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.1f", s);
    return buf;
}

}  // namespace

void PreprocessConfig::validate() const {
    if (!(valid_low_pct < valid_high_pct)) {
        throw InputError("valid range is empty");
    }
    if (!(max_gap_s >= 0.0)) {
        throw InputError("max gap must be non-negative");
    }
    if (median_width < 0 || (median_width != 0 && median_width % 2 == 0)) {
        throw InputError("median width must be 0 or odd");
    }
    if (downsample_factor < 1) {
        throw InputError("downsample factor must be at least 1");
    }
}

MaskedSeries mask_invalid(const RecordBatch& batch, const PreprocessConfig& config) {
    if (batch.records.empty()) {
        throw InputError("no records");
    }
    const double rate = batch.declared_rate_hz;
    if (rate <= 0.0 || !std::isfinite(rate)) {
        throw InputError("sample rate must be positive");
    }

    // Snap each record to its nearest slot on the declared-rate grid. Slots
    // nothing landed on stay missing, so a stretch of lost wall-clock time
    // (e.g. a logger stall, or a clock step-back turned into a day-long jump
    // by time normalization) surfaces as a gap instead of silently
    // compressing the timeline.
    const auto last_slot =
        static_cast<std::size_t>(std::llround(batch.records.back().timestamp_s * rate));

    MaskedSeries series;
    series.sample_rate_hz = rate;
    series.t0_s = 0.0;
    series.values.assign(last_slot + 1, std::numeric_limits<double>::quiet_NaN());
    series.missing.assign(last_slot + 1, true);

    std::int64_t prev_slot = -1;
    for (const auto& record : batch.records) {
        const auto slot = std::llround(record.timestamp_s * rate);
        if (slot == prev_slot) {
            throw InputError("non-uniform sample times: records collide at the " +
                             fmt_seconds(static_cast<double>(slot) / rate) + " s slot");
        }
        prev_slot = slot;
        const bool valid = record.value >= config.valid_low_pct &&
                           record.value <= config.valid_high_pct;
        series.values[static_cast<std::size_t>(slot)] = record.value;
        series.missing[static_cast<std::size_t>(slot)] = !valid;
    }

    if (std::all_of(series.missing.begin(), series.missing.end(),
                    [](bool m) { return m; })) {
        throw InputError("no valid samples");
    }
    return series;
}

Signal repair_gaps(const MaskedSeries& series, const PreprocessConfig& config) {
    const std::size_t n = series.values.size();
    const double rate = series.sample_rate_hz;

    Signal out;
    out.sample_rate_hz = rate;
    out.t0_s = series.t0_s;
    out.values = series.values;
    out.quality.assign(n, Quality::measured);

    std::size_t i = 0;
    while (i < n) {
        if (!series.missing[i]) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < n && series.missing[j]) {
            ++j;
        }
        // Missing run [i, j).
        const double gap_s = static_cast<double>(j - i) / rate;
        if (gap_s > config.max_gap_s) {
            throw InputError("unrepairable gap: " + fmt_seconds(gap_s) + " s at [" +
                             fmt_seconds(series.t0_s + static_cast<double>(i) / rate) +
                             ", " +
                             fmt_seconds(series.t0_s + static_cast<double>(j - 1) / rate) +
                             "] s exceeds max " + fmt_seconds(config.max_gap_s) + " s");
        }
        if (i == 0 && j == n) {
            throw InputError("no valid samples");
        }
        if (i == 0) {
            // No left neighbour: extend the first measured value backwards.
            for (std::size_t k = i; k < j; ++k) {
                out.values[k] = series.values[j];
                out.quality[k] = Quality::interpolated;
            }
        } else if (j == n) {
            // No right neighbour: extend the last measured value forwards.
            for (std::size_t k = i; k < j; ++k) {
                out.values[k] = series.values[i - 1];
                out.quality[k] = Quality::interpolated;
            }
        } else {
            const double left = series.values[i - 1];
            const double right = series.values[j];
            const double span = static_cast<double>(j - (i - 1));
            for (std::size_t k = i; k < j; ++k) {
                const double frac = static_cast<double>(k - (i - 1)) / span;
                out.values[k] = left + (right - left) * frac;
                out.quality[k] = Quality::interpolated;
            }
        }
        i = j;
    }

    if (out.values.size() < 2) {
        throw InputError("signal too short");
    }
    return out;
}

Signal smooth(const Signal& signal, const PreprocessConfig& config) {
    if (config.median_width == 0) {
        return signal;
    }
    const std::size_t n = signal.values.size();
    if (static_cast<std::size_t>(config.median_width) > n) {
        throw InputError("median width exceeds signal length");
    }

    Signal out = signal;
    const std::size_t half = static_cast<std::size_t>(config.median_width) / 2;
    std::vector<double> window;
    window.reserve(2 * half + 1);
    for (std::size_t i = 0; i < n; ++i) {
        // Shrink symmetrically near the edges so the window stays centered
        // and odd-sized; the first and last sample pass through as-is.
        const std::size_t h = std::min({half, i, n - 1 - i});
        window.assign(signal.values.begin() + static_cast<std::ptrdiff_t>(i - h),
                      signal.values.begin() + static_cast<std::ptrdiff_t>(i + h + 1));
        auto mid = window.begin() + static_cast<std::ptrdiff_t>(h);
        std::nth_element(window.begin(), mid, window.end());
        out.values[i] = *mid;
    }
    return out;
}

Signal downsample(const Signal& signal, const PreprocessConfig& config) {
    const auto factor = static_cast<std::size_t>(config.downsample_factor);
    if (factor == 1) {
        if (signal.values.size() < 2) {
            throw InputError("signal too short");
        }
        return signal;
    }

    const std::size_t n = signal.values.size();
    Signal out;
    out.sample_rate_hz = signal.sample_rate_hz / static_cast<double>(factor);
    out.t0_s = signal.t0_s;
    out.values.reserve((n + factor - 1) / factor);
    out.quality.reserve((n + factor - 1) / factor);

    for (std::size_t start = 0; start < n; start += factor) {
        const std::size_t stop = std::min(start + factor, n);
        double sum = 0.0;
        bool any_interp = false;
        for (std::size_t k = start; k < stop; ++k) {
            sum += signal.values[k];
            any_interp = any_interp || signal.quality[k] == Quality::interpolated;
        }
        out.values.push_back(sum / static_cast<double>(stop - start));
        out.quality.push_back(any_interp ? Quality::interpolated : Quality::measured);
    }

    if (out.values.size() < 2) {
        throw InputError("signal too short");
    }
    return out;
}

Signal preprocess(const RecordBatch& batch, const PreprocessConfig& config) {
    config.validate();
    const MaskedSeries masked = mask_invalid(batch, config);
    Signal signal = repair_gaps(masked, config);
    signal = smooth(signal, config);
    signal = downsample(signal, config);
    return signal;
}

}  // namespace oxiscan
