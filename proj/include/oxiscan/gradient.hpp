#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "oxiscan/preprocess.hpp"

namespace oxiscan {

// Strictly two-state slope classification. Flat stretches carry no state of
// their own: they inherit whatever came before.
enum class Trend : std::uint8_t { rise, drop };

struct StateSeries {
    std::vector<Trend> states;  // one per sample
    int kernel_width = 2;
    // Samples before this index have no defined state yet (leading plateau /
    // kernel edge). backpatch() resolves them; 0 means fully defined.
    std::size_t undefined_prefix = 0;
};

// Classifies every sample as rising or dropping. kernel_width 2 uses the
// backward difference x[i] - x[i-1]; kernel_width 3 the centered difference
// (x[i+1] - x[i-1]) / 2, which needs one sample of context on each side. A
// zero or unavailable difference copies the previous sample's state, so the
// output is defined everywhere except a possible leading stretch.
StateSeries state_series(const Signal& signal, int kernel_width);

// Fills the leading undefined stretch with the first defined state. A series
// with no defined state at all (constant signal) is rejected with
// "flat signal: no gradient states".
StateSeries backpatch(StateSeries series);

}  // namespace oxiscan
