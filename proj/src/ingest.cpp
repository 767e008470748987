#include "oxiscan/ingest.hpp"

#include <charconv>
#include <cmath>
#include <string>
#include <string_view>

#include "oxiscan/errors.hpp"

namespace oxiscan {
namespace {

constexpr double kSecondsPerDay = 86400.0;

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

[[noreturn]] void fail_line(std::size_t line_no, const std::string& why) {
    throw InputError("line " + std::to_string(line_no) + ": " + why);
}

double parse_number(std::string_view field, std::size_t line_no, const char* what) {
    field = trim(field);
    double out = 0.0;
    const char* begin = field.data();
    const char* end = begin + field.size();
    auto [ptr, ec] = std::from_chars(begin, end, out);
    if (ec != std::errc{} || ptr != end || field.empty()) {
        fail_line(line_no, std::string("bad ") + what + " '" + std::string(field) + "'");
    }
    if (!std::isfinite(out)) {
        fail_line(line_no, std::string("non-finite ") + what);
    }
    return out;
}

long parse_int_field(std::string_view field, std::size_t line_no) {
    long out = 0;
    const char* begin = field.data();
    const char* end = begin + field.size();
    auto [ptr, ec] = std::from_chars(begin, end, out);
    if (ec != std::errc{} || ptr != end || field.empty()) {
        fail_line(line_no, "bad clock field '" + std::string(field) + "'");
    }
    return out;
}

// "HH:MM:SS" (seconds may carry a fraction) -> seconds of day.
double parse_clock(std::string_view field, std::size_t line_no) {
    const auto c1 = field.find(':');
    const auto c2 = field.find(':', c1 + 1);
    if (c1 == std::string_view::npos || c2 == std::string_view::npos ||
        field.find(':', c2 + 1) != std::string_view::npos) {
        fail_line(line_no, "bad timestamp '" + std::string(field) + "'");
    }
    const long hh = parse_int_field(field.substr(0, c1), line_no);
    const long mm = parse_int_field(field.substr(c1 + 1, c2 - c1 - 1), line_no);
    const double ss = parse_number(field.substr(c2 + 1), line_no, "clock seconds");
    if (hh < 0 || hh > 23 || mm < 0 || mm > 59 || ss < 0.0 || ss >= 60.0) {
        fail_line(line_no, "clock value out of range '" + std::string(field) + "'");
    }
    return static_cast<double>(hh) * 3600.0 + static_cast<double>(mm) * 60.0 + ss;
}

}  // namespace

RecordBatch parse_records(std::istream& in, const FormatOptions& options) {
    if (options.declared_rate_hz <= 0.0 || !std::isfinite(options.declared_rate_hz)) {
        throw InputError("sample rate must be positive");
    }

    RecordBatch batch;
    batch.declared_rate_hz = options.declared_rate_hz;

    std::string line;
    std::size_t line_no = 0;
    bool saw_header = false;

    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view text = trim(line);
        if (text.empty()) {
            continue;
        }

        if (options.layout == FormatOptions::Layout::csv && !saw_header) {
            if (text != "timestamp,spo2") {
                fail_line(line_no, "expected header 'timestamp,spo2'");
            }
            saw_header = true;
            continue;
        }

        if (options.layout == FormatOptions::Layout::bare) {
            const double value = parse_number(text, line_no, "value");
            const double t = static_cast<double>(batch.records.size()) /
                             options.declared_rate_hz;
            batch.records.push_back({t, value});
            continue;
        }

        const auto comma = text.find(',');
        if (comma == std::string_view::npos ||
            text.find(',', comma + 1) != std::string_view::npos) {
            fail_line(line_no, "expected 2 fields");
        }
        const std::string_view t_field = trim(text.substr(0, comma));
        const std::string_view v_field = text.substr(comma + 1);

        double timestamp = 0.0;
        if (t_field.find(':') != std::string_view::npos) {
            timestamp = parse_clock(t_field, line_no);
            if (batch.records.empty()) {
                batch.time_origin = std::string(t_field);
            }
        } else {
            timestamp = parse_number(t_field, line_no, "timestamp");
        }
        const double value = parse_number(v_field, line_no, "value");
        batch.records.push_back({timestamp, value});
    }

    if (batch.records.empty()) {
        throw InputError("no records");
    }
    return batch;
}

RecordBatch normalize_time(const RecordBatch& batch) {
    if (batch.records.empty()) {
        throw InputError("no records");
    }

    RecordBatch out = batch;
    double offset = 0.0;
    double prev_raw = batch.records.front().timestamp_s;
    double prev_adjusted = prev_raw;

    for (std::size_t i = 1; i < out.records.size(); ++i) {
        const double raw = out.records[i].timestamp_s;
        if (raw < prev_raw) {
            // Wall clock wrapped past midnight.
            offset += kSecondsPerDay;
        }
        const double adjusted = raw + offset;
        if (adjusted < prev_adjusted) {
            throw InputError("non-monotone time");
        }
        if (adjusted == prev_adjusted) {
            throw InputError("duplicate sample time");
        }
        out.records[i].timestamp_s = adjusted;
        prev_raw = raw;
        prev_adjusted = adjusted;
    }

    const double origin = out.records.front().timestamp_s;
    for (auto& record : out.records) {
        record.timestamp_s -= origin;
    }
    return out;
}

}  // namespace oxiscan
