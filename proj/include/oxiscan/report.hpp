#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "oxiscan/config.hpp"
#include "oxiscan/rates.hpp"

namespace oxiscan {

struct ReportMeta {
    std::string tool = "oxiscan";
    std::string version;
    std::string input_digest;  // over the normalized record sequence
    AnalyzeConfig config;
    // Wall-clock start of the recording, shown in the text summary only so
    // byte-compared formats stay independent of how timestamps were written.
    std::optional<std::string> time_origin;
};

struct SignalStats {
    std::size_t samples = 0;
    double sample_rate_hz = 1.0;
    double duration_s = 0.0;
    std::size_t repaired_samples = 0;
    double min_spo2 = 0.0;
    double mean_spo2 = 0.0;
};

struct Report {
    ReportMeta meta;
    SignalStats signal;
    std::optional<std::vector<Run>> runs;  // only when emit_runs was requested
    RunLengthMatrix rlm;
    std::vector<ApneaEvent> events;
    SecondaryIndices indices;
    RateAnalysis rates;
};

enum class ReportFormat { json, events_csv, summary_text };

// Assembles and cross-checks the final result. When a run list is supplied it
// verifies every event maps onto one of its drop runs and that the runs tile
// the signal exactly; violations throw InternalError (these are analyzer
// bugs, not bad input).
Report build_report(ReportMeta meta, SignalStats stats,
                    std::optional<std::vector<Run>> runs, RunLengthMatrix rlm,
                    std::vector<ApneaEvent> events, SecondaryIndices indices,
                    RateAnalysis rates);

// Deterministic rendering: fixed key order, floats rounded to 3 decimals.
// Serializing the same report twice yields identical bytes.
std::string serialize(const Report& report, ReportFormat format);

// FNV-1a 64 over the normalized records' (timestamp, value) bit patterns.
// Stable across input spellings of the same data (CSV vs bare vs stream,
// wall-clock vs relative time).
std::string record_digest(const RecordBatch& normalized);

// Building blocks shared with the emission line protocol; floats already
// rounded to 3 decimals.
nlohmann::ordered_json event_json(const ApneaEvent& event);
nlohmann::ordered_json run_json(const Run& run);

extern const char* const kToolVersion;

}  // namespace oxiscan
