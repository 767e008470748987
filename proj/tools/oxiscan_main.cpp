// Command-line front end: batch analysis, live stream analysis, and
// synthetic-recording generation for testing and demos.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "oxiscan/analysis.hpp"
#include "oxiscan/errors.hpp"
#include "oxiscan/stream.hpp"
#include "oxiscan/synth.hpp"

namespace {

using oxiscan::InputError;
using ordered_json = nlohmann::ordered_json;

constexpr double kSecondsPerDay = 86400.0;

struct CommonOptions {
    double rate_hz = 1.0;
    oxiscan::AnalyzeConfig config;
    std::string input = "-";
    std::string output;
    std::string format = "json";
};

void add_analysis_flags(CLI::App* cmd, CommonOptions& opts, bool streaming) {
    cmd->add_option("--input", opts.input, "Input path, '-' for standard input");
    cmd->add_option("--output", opts.output, "Report path (default: standard output)");
    cmd->add_option("--format", opts.format, "Report format")
        ->check(CLI::IsMember({"json", "csv", "summary"}));
    cmd->add_option("--rate-hz", opts.rate_hz, "Sample rate of the input, Hz")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--valid-low", opts.config.pre.valid_low_pct,
                    "Lowest plausible saturation, percent");
    cmd->add_option("--valid-high", opts.config.pre.valid_high_pct,
                    "Highest plausible saturation, percent");
    cmd->add_option("--max-gap-s", opts.config.pre.max_gap_s,
                    "Longest repairable gap, seconds");
    if (streaming) {
        // The live engine holds the last valid value through gaps and cannot
        // look ahead, so the centered median filter is off here.
        opts.config.pre.median_width = 0;
    }
    cmd->add_option("--median-width", opts.config.pre.median_width,
                    streaming ? "Median filter width (block replay only)"
                              : "Median filter width, odd, 0 = off");
    cmd->add_option("--downsample", opts.config.pre.downsample_factor,
                    "Block-mean downsampling factor");
    cmd->add_option("--kernel", opts.config.kernel_width,
                    "Slope kernel width: 2 backward, 3 centered")
        ->check(CLI::IsMember({2, 3}));
    cmd->add_option("--drop-threshold", opts.config.detector.drop_threshold_pct,
                    "Desaturation depth that fires an event, percent");
    cmd->add_option("--time-window", opts.config.detector.time_window_s,
                    "Longest stretch the drop may take, seconds");
    cmd->add_option("--rlm-limit", opts.config.rlm_limit,
                    "Run-length histogram columns; longer runs clip into the last");
    cmd->add_option("--odi", opts.config.odi_thresholds_pct,
                    "Desaturation-index threshold, repeatable");
    cmd->add_option("--tsa", opts.config.tsa_levels_pct,
                    "Time-below saturation level, repeatable");
    cmd->add_flag("--emit-runs", opts.config.emit_runs,
                  "Include the full run list in the JSON report");
}

std::string read_all(const std::string& path) {
    if (path == "-") {
        std::ostringstream buffer;
        buffer << std::cin.rdbuf();
        return buffer.str();
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InputError("cannot open '" + path + "'");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_all(const std::string& path, const std::string& content) {
    if (path.empty()) {
        std::cout << content;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw InputError("cannot write '" + path + "'");
    }
    out << content;
}

oxiscan::ReportFormat parse_format(const std::string& name) {
    if (name == "json") {
        return oxiscan::ReportFormat::json;
    }
    if (name == "csv") {
        return oxiscan::ReportFormat::events_csv;
    }
    return oxiscan::ReportFormat::summary_text;
}

// CSV needs its header line; anything comma-shaped without one should fail
// loudly through the CSV path rather than half-parse as bare values.
oxiscan::FormatOptions::Layout sniff_layout(const std::string& content) {
    std::istringstream in(content);
    std::string line;
    while (std::getline(in, line)) {
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) {
            continue;
        }
        return line.find(',') == std::string::npos
                   ? oxiscan::FormatOptions::Layout::bare
                   : oxiscan::FormatOptions::Layout::csv;
    }
    return oxiscan::FormatOptions::Layout::csv;
}

int run_analyze(const CommonOptions& opts) {
    const std::string content = read_all(opts.input);
    oxiscan::FormatOptions format;
    format.layout = sniff_layout(content);
    format.declared_rate_hz = opts.rate_hz;

    std::istringstream in(content);
    const oxiscan::RecordBatch batch = oxiscan::parse_records(in, format);
    const oxiscan::AnalyzeOutcome outcome = oxiscan::analyze_batch(batch, opts.config);
    write_all(opts.output, oxiscan::serialize(outcome.report, parse_format(opts.format)));
    return 0;
}

std::pair<double, double> parse_stream_line(const std::string& line, std::size_t line_no) {
    const auto fail = [line_no](const std::string& why) -> double {
        throw InputError("line " + std::to_string(line_no) + ": " + why);
    };
    const auto comma = line.find(',');
    if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos) {
        fail("expected 'timestamp_s,value'");
    }
    double t = 0.0;
    double v = 0.0;
    const char* t_begin = line.data();
    const char* t_end = line.data() + comma;
    while (t_begin != t_end && (*t_begin == ' ' || *t_begin == '\t')) ++t_begin;
    while (t_end != t_begin && (t_end[-1] == ' ' || t_end[-1] == '\t' || t_end[-1] == '\r')) --t_end;
    auto tr = std::from_chars(t_begin, t_end, t);
    if (tr.ec != std::errc{} || tr.ptr != t_end || t_begin == t_end) {
        fail("bad timestamp");
    }
    const char* v_begin = line.data() + comma + 1;
    const char* v_end = line.data() + line.size();
    while (v_begin != v_end && (*v_begin == ' ' || *v_begin == '\t')) ++v_begin;
    while (v_end != v_begin && (v_end[-1] == ' ' || v_end[-1] == '\t' || v_end[-1] == '\r')) --v_end;
    auto vr = std::from_chars(v_begin, v_end, v);
    if (vr.ec != std::errc{} || vr.ptr != v_end || v_begin == v_end) {
        fail("bad value");
    }
    return {t, v};
}

void print_emission(const oxiscan::Emission& emission) {
    ordered_json j;
    if (const auto* run = std::get_if<oxiscan::RunCompleted>(&emission)) {
        j["kind"] = "run_completed";
        j["run"] = oxiscan::run_json(run->run);
    } else if (const auto* event = std::get_if<oxiscan::EventDetected>(&emission)) {
        j["kind"] = "event_detected";
        j["event"] = oxiscan::event_json(event->event);
    } else if (const auto* sev = std::get_if<oxiscan::SeverityChanged>(&emission)) {
        j["kind"] = "severity_changed";
        j["max_rate_per_hour"] = sev->max_rate_per_hour;
        j["severity"] = oxiscan::to_string(sev->severity);
    } else if (const auto* rej = std::get_if<oxiscan::SampleRejected>(&emission)) {
        j["kind"] = "sample_rejected";
        j["timestamp_s"] = rej->timestamp_s;
        j["value"] = rej->value;
        j["reason"] = rej->reason;
    }
    std::cout << j.dump() << "\n";
}

int run_stream_dynamic(const CommonOptions& opts, std::istream& in) {
    oxiscan::StreamEngine engine(opts.config, opts.rate_hz);

    std::string line;
    std::size_t line_no = 0;
    double previous_raw_t = 0.0;
    double day_offset = 0.0;
    bool first = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        auto [t, v] = parse_stream_line(line, line_no);
        if (!first && t < previous_raw_t) {
            // Wall clock wrapped past midnight.
            day_offset += kSecondsPerDay;
        }
        previous_raw_t = t;
        first = false;
        for (const auto& emission : engine.push(t + day_offset, v)) {
            print_emission(emission);
        }
    }

    oxiscan::FinalizeResult result = engine.finalize();
    for (const auto& emission : result.emissions) {
        print_emission(emission);
    }
    write_all(opts.output, oxiscan::serialize(result.report, parse_format(opts.format)));
    return 0;
}

// Deployment shape for hosts that prefer re-running the batch pipeline over
// overlapping buffers instead of keeping the incremental engine hot. Event
// emissions are advisory (a block may see a run truncated at its edge); the
// final report is recomputed over everything retained and matches `analyze`.
int run_stream_block_replay(const CommonOptions& opts, std::istream& in) {
    const auto window_samples = static_cast<std::size_t>(
        std::max(2.0, opts.config.rate_window_s * opts.rate_hz));
    const std::size_t hop_samples = std::max<std::size_t>(1, window_samples / 2);

    std::vector<oxiscan::RawRecord> retained;
    std::set<long long> emitted_starts;
    std::size_t emitted_rate = 0;
    std::size_t since_replay = 0;

    std::string line;
    std::size_t line_no = 0;
    double previous_raw_t = 0.0;
    double day_offset = 0.0;
    bool first = true;

    const auto replay_block = [&]() {
        const std::size_t take = std::min(retained.size(), window_samples);
        oxiscan::RecordBatch block;
        block.declared_rate_hz = opts.rate_hz;
        block.records.assign(retained.end() - static_cast<std::ptrdiff_t>(take),
                             retained.end());
        const double block_origin = block.records.front().timestamp_s;
        oxiscan::AnalyzeOutcome outcome;
        try {
            outcome = oxiscan::analyze_batch(block, opts.config);
        } catch (const InputError& e) {
            std::cerr << "note: block skipped: " << e.what() << "\n";
            return;
        }
        for (const auto& event : outcome.events) {
            const double absolute_start = block_origin + event.start_s;
            const auto key = std::llround(absolute_start * 1000.0);
            if (!emitted_starts.insert(key).second) {
                continue;
            }
            oxiscan::ApneaEvent shifted = event;
            shifted.start_s = absolute_start;
            shifted.end_s = block_origin + event.end_s;
            shifted.qual_start_s = block_origin + event.qual_start_s;
            shifted.qual_end_s = block_origin + event.qual_end_s;
            print_emission(oxiscan::EventDetected{shifted});
        }
        if (emitted_starts.size() > emitted_rate &&
            outcome.rates.max_rate_per_hour > emitted_rate) {
            emitted_rate = outcome.rates.max_rate_per_hour;
            print_emission(oxiscan::SeverityChanged{
                emitted_rate,
                oxiscan::classify_severity(static_cast<double>(emitted_rate))});
        }
    };

    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        auto [t, v] = parse_stream_line(line, line_no);
        if (!first && t < previous_raw_t) {
            day_offset += kSecondsPerDay;
        }
        previous_raw_t = t;
        first = false;
        retained.push_back({t + day_offset, v});
        if (++since_replay >= hop_samples) {
            since_replay = 0;
            replay_block();
        }
    }
    if (retained.empty()) {
        throw InputError("no records");
    }

    oxiscan::RecordBatch all;
    all.declared_rate_hz = opts.rate_hz;
    all.records = std::move(retained);
    const oxiscan::AnalyzeOutcome outcome = oxiscan::analyze_batch(all, opts.config);
    write_all(opts.output, oxiscan::serialize(outcome.report, parse_format(opts.format)));
    return 0;
}

struct SynthOptions {
    oxiscan::ScenarioSpec spec;
    std::vector<std::string> event_specs;
    std::vector<std::string> dropout_specs;
    std::string output;
    std::string labels;
};

std::vector<double> split_fields(const std::string& text, std::size_t expected,
                                 const std::string& what) {
    std::vector<double> fields;
    std::size_t begin = 0;
    while (begin <= text.size()) {
        const auto colon = text.find(':', begin);
        const std::string piece =
            text.substr(begin, colon == std::string::npos ? std::string::npos
                                                          : colon - begin);
        double value = 0.0;
        auto result = std::from_chars(piece.data(), piece.data() + piece.size(), value);
        if (result.ec != std::errc{} || result.ptr != piece.data() + piece.size() ||
            piece.empty()) {
            throw InputError("bad " + what + " spec '" + text + "'");
        }
        fields.push_back(value);
        if (colon == std::string::npos) {
            break;
        }
        begin = colon + 1;
    }
    if (fields.size() != expected) {
        throw InputError("bad " + what + " spec '" + text + "': expected " +
                         std::to_string(expected) + " fields");
    }
    return fields;
}

int run_synth(SynthOptions& opts) {
    for (const auto& text : opts.event_specs) {
        const auto f = split_fields(text, 4, "event");
        opts.spec.events.push_back({f[0], f[1], f[2], f[3]});
    }
    for (const auto& text : opts.dropout_specs) {
        const auto f = split_fields(text, 2, "dropout");
        opts.spec.dropouts.push_back({f[0], f[1]});
    }

    const oxiscan::Scenario scenario = oxiscan::generate(opts.spec);

    std::string csv = "timestamp,spo2\n";
    char buf[80];
    for (const auto& record : scenario.batch.records) {
        std::snprintf(buf, sizeof(buf), "%.3f,%.3f\n", record.timestamp_s, record.value);
        csv += buf;
    }
    write_all(opts.output, csv);

    ordered_json labels;
    labels["seed"] = opts.spec.seed;
    labels["duration_s"] = opts.spec.duration_s;
    labels["baseline_pct"] = opts.spec.baseline_pct;
    labels["noise_sd_pct"] = opts.spec.noise_sd_pct;
    labels["events"] = ordered_json::array();
    for (const auto& label : scenario.labels) {
        ordered_json e;
        e["onset_s"] = label.planted.onset_s;
        e["fall_s"] = label.planted.fall_s;
        e["depth_pct"] = label.planted.depth_pct;
        e["recovery_s"] = label.planted.recovery_s;
        e["start_s"] = label.start_s;
        e["end_s"] = label.end_s;
        e["qualifying"] = label.qualifying;
        labels["events"].push_back(e);
    }
    const std::string labels_path =
        opts.labels.empty()
            ? (opts.output.empty() ? "" : opts.output + ".labels.json")
            : opts.labels;
    if (!labels_path.empty()) {
        write_all(labels_path, labels.dump(2) + "\n");
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"SpO2 desaturation analyzer"};
    app.require_subcommand(1);

    CommonOptions analyze_opts;
    CLI::App* analyze = app.add_subcommand("analyze", "Analyze a full recording");
    add_analysis_flags(analyze, analyze_opts, false);

    CommonOptions stream_opts;
    CLI::App* stream = app.add_subcommand(
        "stream", "Analyze 'timestamp_s,value' lines as they arrive");
    add_analysis_flags(stream, stream_opts, true);
    bool block_replay = false;
    stream->add_flag("--block-replay", block_replay,
                     "Re-run the batch pipeline over overlapping hour blocks "
                     "instead of the incremental engine");

    SynthOptions synth_opts;
    CLI::App* synth = app.add_subcommand("synth", "Generate a synthetic recording");
    synth->add_option("--seed", synth_opts.spec.seed, "Noise seed");
    synth->add_option("--duration", synth_opts.spec.duration_s, "Recording length, seconds");
    synth->add_option("--rate-hz", synth_opts.spec.sample_rate_hz, "Sample rate, Hz")
        ->check(CLI::PositiveNumber);
    synth->add_option("--baseline", synth_opts.spec.baseline_pct, "Resting saturation");
    synth->add_option("--noise-sd", synth_opts.spec.noise_sd_pct, "Gaussian noise sd");
    synth->add_option("--events", synth_opts.event_specs,
                      "Planted desaturation 'onset:fall:depth:recovery', repeatable");
    synth->add_option("--dropouts", synth_opts.dropout_specs,
                      "Sensor dropout 'onset:length', repeatable");
    synth->add_option("--output", synth_opts.output, "CSV path");
    synth->add_option("--labels", synth_opts.labels,
                      "Ground-truth path (default: <output>.labels.json)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;  // bad flags are an input problem
    }

    try {
        if (analyze->parsed()) {
            return run_analyze(analyze_opts);
        }
        if (stream->parsed()) {
            const std::string path = stream_opts.input;
            if (path == "-") {
                return block_replay ? run_stream_block_replay(stream_opts, std::cin)
                                    : run_stream_dynamic(stream_opts, std::cin);
            }
            std::ifstream in(path);
            if (!in) {
                throw InputError("cannot open '" + path + "'");
            }
            return block_replay ? run_stream_block_replay(stream_opts, in)
                                : run_stream_dynamic(stream_opts, in);
        }
        if (synth->parsed()) {
            return run_synth(synth_opts);
        }
    } catch (const oxiscan::InternalError& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 2;
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
