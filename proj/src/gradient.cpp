#include "oxiscan/gradient.hpp"

#include <optional>

#include "oxiscan/errors.hpp"

namespace oxiscan {

StateSeries state_series(const Signal& signal, int kernel_width) {
    if (kernel_width != 2 && kernel_width != 3) {
        throw InputError("kernel width must be 2 or 3");
    }
    const std::size_t n = signal.values.size();
    if (n < 2) {
        throw InputError("signal too short");
    }
    const auto& x = signal.values;

    StateSeries series;
    series.kernel_width = kernel_width;
    series.states.assign(n, Trend::rise);

    std::optional<Trend> last;
    std::size_t first_defined = n;

    for (std::size_t i = 0; i < n; ++i) {
        std::optional<double> change;
        if (kernel_width == 2) {
            if (i >= 1) {
                change = x[i] - x[i - 1];
            }
        } else {
            if (i >= 1 && i + 1 < n) {
                change = (x[i + 1] - x[i - 1]) / 2.0;
            }
        }

        if (change && *change != 0.0) {
            const Trend t = *change > 0.0 ? Trend::rise : Trend::drop;
            if (!last) {
                first_defined = i;
            }
            last = t;
        }
        // A zero or unavailable difference keeps the previous state.
        if (last) {
            series.states[i] = *last;
        }
    }

    series.undefined_prefix = first_defined;
    return series;
}

StateSeries backpatch(StateSeries series) {
    if (series.undefined_prefix >= series.states.size()) {
        throw InputError("flat signal: no gradient states");
    }
    const Trend first = series.states[series.undefined_prefix];
    for (std::size_t i = 0; i < series.undefined_prefix; ++i) {
        series.states[i] = first;
    }
    series.undefined_prefix = 0;
    return series;
}

}  // namespace oxiscan
