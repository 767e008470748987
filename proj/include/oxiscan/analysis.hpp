#pragma once

#include "oxiscan/report.hpp"

namespace oxiscan {

// Full batch result with the intermediate products kept around for callers
// that want more than the report (tests, the streaming comparator, tools).
struct AnalyzeOutcome {
    Signal signal;
    StateSeries states;
    std::vector<Run> runs;
    RunLengthMatrix rlm;
    std::vector<ApneaEvent> events;
    SecondaryIndices indices;
    RateAnalysis rates;
    Report report;
};

// The whole batch pipeline: normalize -> preprocess -> classify -> runs ->
// histogram -> events -> indices -> rates -> report.
AnalyzeOutcome analyze_batch(const RecordBatch& batch, const AnalyzeConfig& config);

}  // namespace oxiscan
