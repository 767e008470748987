#pragma once

#include <istream>
#include <optional>
#include <string>
#include <vector>

namespace oxiscan {

// One raw oximeter reading as it came off the wire/file. Values are kept
// unvalidated here; range checking happens in the preprocess stage.
struct RawRecord {
    double timestamp_s = 0.0;
    double value = 0.0;
};

struct RecordBatch {
    std::vector<RawRecord> records;
    double declared_rate_hz = 1.0;
    // Wall-clock tag of the first sample ("HH:MM:SS"), kept for display only.
    std::optional<std::string> time_origin;
};

struct FormatOptions {
    enum class Layout {
        csv,   // "timestamp,spo2" with that exact header line
        bare,  // one value per line, timestamps synthesized at declared_rate_hz
    };
    Layout layout = Layout::csv;
    double declared_rate_hz = 1.0;
};

// Parses records from a character stream. CSV timestamps may be decimal
// seconds or HH:MM:SS wall clock (converted to seconds of day). Malformed
// lines raise InputError naming the 1-based line number; an input with no
// data records raises InputError("no records").
RecordBatch parse_records(std::istream& in, const FormatOptions& options);

// Rewrites timestamps to strictly increasing relative seconds starting at 0.
// A decrease between consecutive timestamps is treated as a midnight wrap and
// gets +86400 s (cumulatively); if the pair still decreases afterwards the
// input is rejected as "non-monotone time", and an exact tie after adjustment
// as "duplicate sample time". Idempotent.
RecordBatch normalize_time(const RecordBatch& batch);

}  // namespace oxiscan
