#include "oxiscan/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>

#include "json.hpp"

#include "oxiscan/errors.hpp"

namespace oxiscan {

const char* const kToolVersion = "0.1.0";

namespace {

using ordered_json = nlohmann::ordered_json;

// All floats in machine-readable output are quantized to 3 decimals so that
// serializing the same report twice — or on another platform — yields the
// same bytes.
double round3(double v) {
    return std::round(v * 1000.0) / 1000.0;
}

std::string fixed3(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

ordered_json config_json(const AnalyzeConfig& config) {
    ordered_json j;
    j["valid_low_pct"] = round3(config.pre.valid_low_pct);
    j["valid_high_pct"] = round3(config.pre.valid_high_pct);
    j["max_gap_s"] = round3(config.pre.max_gap_s);
    j["median_width"] = config.pre.median_width;
    j["downsample_factor"] = config.pre.downsample_factor;
    j["kernel_width"] = config.kernel_width;
    j["drop_threshold_pct"] = round3(config.detector.drop_threshold_pct);
    j["time_window_s"] = round3(config.detector.time_window_s);
    j["rlm_limit"] = config.rlm_limit;
    j["rate_window_s"] = round3(config.rate_window_s);
    j["odi_thresholds_pct"] = ordered_json::array();
    for (double t : config.odi_thresholds_pct) {
        j["odi_thresholds_pct"].push_back(round3(t));
    }
    j["tsa_levels_pct"] = ordered_json::array();
    for (double l : config.tsa_levels_pct) {
        j["tsa_levels_pct"].push_back(round3(l));
    }
    j["emit_runs"] = config.emit_runs;
    return j;
}

std::string serialize_json(const Report& report) {
    ordered_json j;
    j["meta"]["tool"] = report.meta.tool;
    j["meta"]["version"] = report.meta.version;
    j["meta"]["input_digest"] = report.meta.input_digest;
    j["meta"]["config"] = config_json(report.meta.config);

    j["signal"]["samples"] = report.signal.samples;
    j["signal"]["sample_rate_hz"] = round3(report.signal.sample_rate_hz);
    j["signal"]["duration_s"] = round3(report.signal.duration_s);
    j["signal"]["repaired_samples"] = report.signal.repaired_samples;
    j["signal"]["min_spo2"] = round3(report.signal.min_spo2);
    j["signal"]["mean_spo2"] = round3(report.signal.mean_spo2);

    if (report.runs) {
        j["runs"] = ordered_json::array();
        for (const auto& run : *report.runs) {
            j["runs"].push_back(run_json(run));
        }
    }

    j["rlm"]["limit"] = report.rlm.limit;
    j["rlm"]["rise"] = report.rlm.rise;
    j["rlm"]["drop"] = report.rlm.drop;

    j["events"] = ordered_json::array();
    for (const auto& event : report.events) {
        j["events"].push_back(event_json(event));
    }

    j["indices"]["odi"] = ordered_json::array();
    for (const auto& entry : report.indices.odi) {
        ordered_json e;
        e["threshold_pct"] = round3(entry.threshold_pct);
        e["events_per_hour"] = round3(entry.events_per_hour);
        j["indices"]["odi"].push_back(e);
    }
    j["indices"]["tsa"] = ordered_json::array();
    for (const auto& entry : report.indices.tsa) {
        ordered_json e;
        e["level_pct"] = round3(entry.level_pct);
        e["seconds_below"] = round3(entry.seconds_below);
        e["fraction"] = round3(entry.fraction);
        j["indices"]["tsa"].push_back(e);
    }

    j["rates"]["window_s"] = round3(report.rates.window_s);
    j["rates"]["max_rate_per_hour"] = report.rates.max_rate_per_hour;
    j["rates"]["max_window"]["start_s"] = round3(report.rates.max_window_start_s);
    j["rates"]["max_window"]["end_s"] = round3(report.rates.max_window_end_s);
    j["rates"]["severity"] = to_string(report.rates.severity);
    j["rates"]["insufficient_duration"] = report.rates.insufficient_duration;
    j["rates"]["per_window"] = report.rates.per_window;

    return j.dump(2) + "\n";
}

std::string serialize_events_csv(const Report& report) {
    std::string out =
        "start_s,end_s,duration_s,spo2_start,spo2_min,total_drop,"
        "qual_start_s,qual_end_s,qual_drop\n";
    for (const auto& e : report.events) {
        out += fixed3(e.start_s) + "," + fixed3(e.end_s) + "," + fixed3(e.duration_s) +
               "," + fixed3(e.spo2_start) + "," + fixed3(e.spo2_min) + "," +
               fixed3(e.total_drop_pct) + "," + fixed3(e.qual_start_s) + "," +
               fixed3(e.qual_end_s) + "," + fixed3(e.qualifying_drop_pct) + "\n";
    }
    return out;
}

std::string serialize_summary(const Report& report) {
    char buf[256];
    std::string out;
    out += "oxiscan " + report.meta.version + " summary\n";
    if (report.meta.time_origin) {
        out += "recording start:  " + *report.meta.time_origin + " (wall clock)\n";
    }
    std::snprintf(buf, sizeof(buf), "duration:         %.1f s (%.2f h)\n",
                  report.signal.duration_s, report.signal.duration_s / 3600.0);
    out += buf;
    std::snprintf(buf, sizeof(buf), "samples:          %zu (%zu repaired)\n",
                  report.signal.samples, report.signal.repaired_samples);
    out += buf;
    std::snprintf(buf, sizeof(buf), "spo2 min / mean:  %.1f / %.1f\n",
                  report.signal.min_spo2, report.signal.mean_spo2);
    out += buf;
    std::snprintf(buf, sizeof(buf), "events:           %zu\n", report.events.size());
    out += buf;
    for (const auto& entry : report.indices.odi) {
        std::snprintf(buf, sizeof(buf), "odi %.1f:          %.2f events/h\n",
                      entry.threshold_pct, entry.events_per_hour);
        out += buf;
    }
    for (const auto& entry : report.indices.tsa) {
        std::snprintf(buf, sizeof(buf), "below %.1f:        %.1f s (%.1f%%)\n",
                      entry.level_pct, entry.seconds_below, entry.fraction * 100.0);
        out += buf;
    }
    std::snprintf(buf, sizeof(buf), "max window rate:  %zu per %.0f s%s\n",
                  report.rates.max_rate_per_hour, report.rates.window_s,
                  report.rates.insufficient_duration ? " (short recording)" : "");
    out += buf;
    out += std::string("severity:         ") + to_string(report.rates.severity) + "\n";
    return out;
}

}  // namespace

nlohmann::ordered_json event_json(const ApneaEvent& event) {
    ordered_json j;
    j["start_s"] = round3(event.start_s);
    j["end_s"] = round3(event.end_s);
    j["duration_s"] = round3(event.duration_s);
    j["spo2_start"] = round3(event.spo2_start);
    j["spo2_min"] = round3(event.spo2_min);
    j["total_drop"] = round3(event.total_drop_pct);
    j["qual_start_s"] = round3(event.qual_start_s);
    j["qual_end_s"] = round3(event.qual_end_s);
    j["qual_drop"] = round3(event.qualifying_drop_pct);
    return j;
}

nlohmann::ordered_json run_json(const Run& run) {
    ordered_json j;
    j["state"] = run.state == Trend::rise ? "rise" : "drop";
    j["start_index"] = run.start_index;
    j["end_index"] = run.end_index;
    j["length_samples"] = run.length_samples;
    j["duration_s"] = round3(run.duration_s);
    return j;
}

Report build_report(ReportMeta meta, SignalStats stats,
                    std::optional<std::vector<Run>> runs, RunLengthMatrix rlm,
                    std::vector<ApneaEvent> events, SecondaryIndices indices,
                    RateAnalysis rates) {
    // Cross-checks: every value here was produced by this process, so any
    // mismatch is an analyzer defect, not an input problem.
    if (runs) {
        std::uint64_t covered = 0;
        for (const auto& run : *runs) {
            if (run.end_index - run.start_index + 1 != run.length_samples) {
                throw InternalError("run bounds disagree with run length");
            }
            covered += run.length_samples;
        }
        if (covered != stats.samples) {
            throw InternalError("runs do not tile the signal");
        }
        for (const auto& event : events) {
            const bool known = std::any_of(
                runs->begin(), runs->end(), [&](const Run& run) {
                    return run.state == Trend::drop &&
                           run.start_index == event.run.start_index &&
                           run.end_index == event.run.end_index;
                });
            if (!known) {
                throw InternalError("event references an unknown drop run");
            }
        }
    }
    for (const auto& event : events) {
        if (event.run.end_index >= stats.samples) {
            throw InternalError("event extends past the signal");
        }
        if (event.qualifying_drop_pct + 1e-12 < meta.config.detector.drop_threshold_pct) {
            throw InternalError("event below the drop threshold");
        }
    }
    if (rates.per_window.size() != events.size()) {
        throw InternalError("rate windows disagree with the event list");
    }

    Report report;
    report.meta = std::move(meta);
    report.signal = stats;
    report.runs = std::move(runs);
    report.rlm = std::move(rlm);
    report.events = std::move(events);
    report.indices = std::move(indices);
    report.rates = std::move(rates);
    return report;
}

std::string serialize(const Report& report, ReportFormat format) {
    switch (format) {
        case ReportFormat::json: return serialize_json(report);
        case ReportFormat::events_csv: return serialize_events_csv(report);
        case ReportFormat::summary_text: return serialize_summary(report);
    }
    throw InternalError("unknown report format");
}

std::string record_digest(const RecordBatch& normalized) {
    std::uint64_t hash = 14695981039346656037ull;
    auto fold = [&hash](double v) {
        std::uint64_t bits = 0;
        std::memcpy(&bits, &v, sizeof(bits));
        for (int i = 0; i < 8; ++i) {
            hash ^= (bits >> (8 * i)) & 0xffu;
            hash *= 1099511628211ull;
        }
    };
    for (const auto& record : normalized.records) {
        fold(record.timestamp_s);
        fold(record.value);
    }
    char buf[32];
    std::snprintf(buf, sizeof(buf), "fnv1a:%016llx",
                  static_cast<unsigned long long>(hash));
    return buf;
}

}  // namespace oxiscan
