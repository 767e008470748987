#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <random>
#include <vector>

#include "oxiscan/analysis.hpp"
#include "oxiscan/errors.hpp"
#include "oxiscan/stream.hpp"

using namespace oxiscan;

namespace {

AnalyzeConfig stream_config() {
    AnalyzeConfig config;
    config.pre.median_width = 0;
    return config;
}

std::vector<Emission> drive(StreamEngine& engine, const std::vector<double>& values,
                            double rate = 1.0, double t_start = 0.0) {
    std::vector<Emission> all;
    for (std::size_t i = 0; i < values.size(); ++i) {
        auto out = engine.push(t_start + static_cast<double>(i) / rate, values[i]);
        all.insert(all.end(), out.begin(), out.end());
    }
    return all;
}

RecordBatch batch_of(const std::vector<double>& values, double rate = 1.0,
                     double t_start = 0.0) {
    RecordBatch batch;
    batch.declared_rate_hz = rate;
    for (std::size_t i = 0; i < values.size(); ++i) {
        batch.records.push_back({t_start + static_cast<double>(i) / rate, values[i]});
    }
    return batch;
}

template <typename T>
std::vector<T> pick(const std::vector<Emission>& emissions) {
    std::vector<T> out;
    for (const auto& e : emissions) {
        if (const T* v = std::get_if<T>(&e)) {
            out.push_back(*v);
        }
    }
    return out;
}

}  // namespace

TEST_CASE("a monotone rise stays one silent open run") {
    StreamEngine engine(stream_config(), 1.0);
    const auto emissions = drive(engine, {90, 91, 92, 93, 94, 95, 96, 97, 98, 99});
    CHECK(emissions.empty());
    const auto snap = engine.snapshot();
    CHECK(snap.samples_seen == 10);
    CHECK(snap.open_run_state == Trend::rise);
    CHECK(snap.open_run_length == 10);
    CHECK(snap.event_count == 0);
}

TEST_CASE("the flip after a qualifying fall emits run, event, and rate") {
    StreamEngine engine(stream_config(), 1.0);
    CHECK(drive(engine, {96, 95, 94, 93, 92, 91}).empty());

    const auto emissions = engine.push(6.0, 92.0);
    REQUIRE(emissions.size() == 3);

    const auto* completed = std::get_if<RunCompleted>(&emissions[0]);
    REQUIRE(completed != nullptr);
    CHECK(completed->run.state == Trend::drop);
    CHECK(completed->run.start_index == 0);
    CHECK(completed->run.end_index == 5);
    CHECK(completed->run.length_samples == 6);

    const auto* detected = std::get_if<EventDetected>(&emissions[1]);
    REQUIRE(detected != nullptr);
    CHECK(detected->event.total_drop_pct == 5.0);
    CHECK(detected->event.start_s == 0.0);
    CHECK(detected->event.end_s == 5.0);
    CHECK(detected->event.qual_start_s == 0.0);
    CHECK(detected->event.qual_end_s == 4.0);
    CHECK(detected->event.qualifying_drop_pct == 4.0);

    const auto* rate = std::get_if<SeverityChanged>(&emissions[2]);
    REQUIRE(rate != nullptr);
    CHECK(rate->max_rate_per_hour == 1);
    CHECK(rate->severity == Severity::normal);

    const auto snap = engine.snapshot();
    CHECK(snap.event_count == 1);
    CHECK(snap.open_run_state == Trend::rise);
    CHECK(snap.open_run_length == 1);
}

TEST_CASE("an invalid value is rejected and held without flipping the run") {
    StreamEngine engine(stream_config(), 1.0);
    drive(engine, {96, 95});
    const auto before = engine.snapshot();
    CHECK(before.open_run_state == Trend::drop);

    const auto emissions = engine.push(2.0, 0.0);
    REQUIRE(emissions.size() == 1);
    const auto* rejected = std::get_if<SampleRejected>(&emissions[0]);
    REQUIRE(rejected != nullptr);
    CHECK(rejected->timestamp_s == 2.0);
    CHECK(rejected->value == 0.0);

    const auto after = engine.snapshot();
    CHECK(after.open_run_state == Trend::drop);          // no flip
    CHECK(after.open_run_length == before.open_run_length + 1);
    CHECK(after.samples_seen == 3);
}

TEST_CASE("finalize closes a qualifying fall still in progress") {
    StreamEngine engine(stream_config(), 1.0);
    drive(engine, {96, 95, 94, 93, 92, 91});
    auto result = engine.finalize();

    CHECK(pick<RunCompleted>(result.emissions).size() == 1);
    const auto detected = pick<EventDetected>(result.emissions);
    REQUIRE(detected.size() == 1);
    CHECK(detected[0].event.qualifying_drop_pct == 4.0);
    CHECK(pick<SeverityChanged>(result.emissions).size() == 1);

    CHECK(result.report.events.size() == 1);
    CHECK(result.report.rates.max_rate_per_hour == 1);

    // Same data through the batch pipeline: identical bytes.
    const auto batch = analyze_batch(batch_of({96, 95, 94, 93, 92, 91}), stream_config());
    CHECK(serialize(result.report, ReportFormat::json) ==
          serialize(batch.report, ReportFormat::json));
}

TEST_CASE("degenerate streams fail the same way the batch path does") {
    SUBCASE("constant values have no trend") {
        StreamEngine engine(stream_config(), 1.0);
        drive(engine, std::vector<double>(30, 95.0));
        CHECK_THROWS_WITH_AS(engine.finalize(), "flat signal: no gradient states",
                             InputError);
    }
    SUBCASE("an empty stream has no data") {
        StreamEngine engine(stream_config(), 1.0);
        CHECK_THROWS_WITH_AS(engine.finalize(), "insufficient data", InputError);
    }
    SUBCASE("a single sample is not analyzable") {
        StreamEngine engine(stream_config(), 1.0);
        engine.push(0.0, 96.0);
        CHECK_THROWS_WITH_AS(engine.finalize(), "insufficient data", InputError);
    }
    SUBCASE("all-invalid input never yields a sample") {
        StreamEngine engine(stream_config(), 1.0);
        engine.push(0.0, 0.0);
        engine.push(1.0, -5.0);
        CHECK_THROWS_WITH_AS(engine.finalize(), "no valid samples", InputError);
    }
}

TEST_CASE("snapshot is pure and starts empty") {
    StreamEngine engine(stream_config(), 1.0);
    const auto fresh = engine.snapshot();
    CHECK(fresh.no_data);
    CHECK(fresh.samples_seen == 0);
    CHECK(fresh.event_count == 0);
    CHECK(fresh.severity == Severity::normal);
    CHECK_FALSE(fresh.open_run_state.has_value());

    drive(engine, {96, 95, 94});
    const auto a = engine.snapshot();
    const auto b = engine.snapshot();
    CHECK(a.samples_seen == b.samples_seen);
    CHECK(a.open_run_length == b.open_run_length);
    CHECK(a.open_run_state == b.open_run_state);
    CHECK_FALSE(a.no_data);
}

TEST_CASE("bad timestamps are refused") {
    StreamEngine engine(stream_config(), 1.0);
    engine.push(5.0, 96.0);
    CHECK_THROWS_WITH_AS(engine.push(5.0, 95.0), "duplicate sample time", InputError);
    CHECK_THROWS_WITH_AS(engine.push(4.0, 95.0), "non-monotone time", InputError);
    CHECK_THROWS_WITH_AS(engine.push(5.4, 95.0),
                         doctest::Contains("non-uniform sample times"), InputError);
    const auto nan = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(engine.push(nan, 95.0), InputError);
    CHECK_THROWS_AS(engine.push(6.0, nan), InputError);
}

TEST_CASE("the engine refuses settings it cannot honor") {
    auto median = stream_config();
    median.pre.median_width = 3;
    CHECK_THROWS_AS(StreamEngine(median, 1.0), InputError);

    auto centered = stream_config();
    centered.kernel_width = 3;
    CHECK_THROWS_AS(StreamEngine(centered, 1.0), InputError);

    auto keep_runs = stream_config();
    keep_runs.emit_runs = true;
    CHECK_THROWS_AS(StreamEngine(keep_runs, 1.0), InputError);

    CHECK_THROWS_AS(StreamEngine(stream_config(), 0.0), InputError);
}

TEST_CASE("use after finalize is a defect, not an input error") {
    StreamEngine engine(stream_config(), 1.0);
    drive(engine, {96, 95, 96});
    engine.finalize();
    CHECK_THROWS_AS(engine.push(3.0, 95.0), InternalError);
    CHECK_THROWS_AS(engine.finalize(), InternalError);
}

TEST_CASE("skipped slots are held at the last valid value") {
    StreamEngine engine(stream_config(), 1.0);
    engine.push(0.0, 96.0);
    engine.push(5.0, 91.0);  // slots 1..4 never arrived
    CHECK(engine.snapshot().samples_seen == 6);

    const auto result = engine.finalize();
    CHECK(result.report.signal.samples == 6);
    CHECK(result.report.signal.repaired_samples == 4);
    // The fall from the held plateau still qualifies.
    REQUIRE(result.report.events.size() == 1);
    CHECK(result.report.events[0].total_drop_pct == 5.0);
}

TEST_CASE("a leading invalid stretch is backfilled by the first valid value") {
    StreamEngine engine(stream_config(), 1.0);
    const auto first = engine.push(0.0, 0.0);
    CHECK(pick<SampleRejected>(first).size() == 1);
    engine.push(1.0, 0.0);
    engine.push(2.0, 96.0);
    engine.push(3.0, 95.0);

    const auto result = engine.finalize();
    CHECK(result.report.signal.samples == 4);
    CHECK(result.report.signal.repaired_samples == 2);
    CHECK(result.report.signal.min_spo2 == 95.0);  // held head is 96, not 0
}

TEST_CASE("a gap past the configured maximum stops the stream") {
    StreamEngine engine(stream_config(), 1.0);  // max_gap_s = 30
    engine.push(0.0, 96.0);
    CHECK_THROWS_WITH_AS(engine.push(40.0, 95.0),
                         doctest::Contains("unrepairable gap"), InputError);

    StreamEngine ok(stream_config(), 1.0);
    ok.push(0.0, 96.0);
    CHECK_NOTHROW(ok.push(31.0, 95.0));  // 30 held slots: exactly at the limit
}

TEST_CASE("rate announcements fire only on new maxima") {
    auto config = stream_config();
    config.rate_window_s = 100.0;
    StreamEngine engine(config, 1.0);

    // Three spike-falls close together, then one far beyond the window.
    std::vector<double> values;
    auto fall = [&values]() {
        for (double v : {96, 92, 88, 96}) {
            values.push_back(v);
        }
    };
    fall();
    fall();
    fall();
    values.resize(values.size() + 300, 96.0);
    fall();
    values.push_back(96.0);

    const auto emissions = drive(engine, values);
    const auto rates = pick<SeverityChanged>(emissions);
    REQUIRE(rates.size() == 3);  // 1, 2, 3 — the late lone event is no record
    CHECK(rates[0].max_rate_per_hour == 1);
    CHECK(rates[1].max_rate_per_hour == 2);
    CHECK(rates[2].max_rate_per_hour == 3);

    const auto events = pick<EventDetected>(emissions);
    CHECK(events.size() == 4);
    for (std::size_t i = 1; i < events.size(); ++i) {
        CHECK(events[i].event.start_s > events[i - 1].event.end_s);
    }
}

TEST_CASE("completed runs tile the output exactly like the batch run list") {
    std::mt19937 rng(321);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = std::uniform_int_distribution<>(20, 200)(rng);
        std::vector<double> values;
        double v = 94.0;
        for (int i = 0; i < n; ++i) {
            v += std::uniform_int_distribution<>(-2, 2)(rng) * 0.5;
            v = std::clamp(v, 60.0, 100.0);
            values.push_back(v);
        }

        StreamEngine engine(stream_config(), 1.0);
        auto emissions = drive(engine, values);
        FinalizeResult result;
        bool stream_flat = false;
        try {
            result = engine.finalize();
        } catch (const InputError&) {
            stream_flat = true;
        }

        AnalyzeConfig batch_config = stream_config();
        batch_config.emit_runs = true;
        bool batch_flat = false;
        AnalyzeOutcome outcome;
        try {
            outcome = analyze_batch(batch_of(values), batch_config);
        } catch (const InputError&) {
            batch_flat = true;
        }
        REQUIRE(stream_flat == batch_flat);
        if (stream_flat) {
            continue;
        }

        emissions.insert(emissions.end(), result.emissions.begin(),
                         result.emissions.end());
        const auto completed = pick<RunCompleted>(emissions);
        REQUIRE(completed.size() == outcome.runs.size());
        for (std::size_t i = 0; i < completed.size(); ++i) {
            CHECK(completed[i].run.state == outcome.runs[i].state);
            CHECK(completed[i].run.start_index == outcome.runs[i].start_index);
            CHECK(completed[i].run.end_index == outcome.runs[i].end_index);
        }
    }
}

TEST_CASE("gap-free streams reproduce the batch report byte for byte") {
    std::mt19937 rng(20240818);
    int compared = 0;
    for (int trial = 0; trial < 120; ++trial) {
        const int factor = std::uniform_int_distribution<>(1, 3)(rng);
        const double rate = std::uniform_int_distribution<>(1, 2)(rng) * 1.0;
        const double t_start =
            std::bernoulli_distribution(0.3)(rng) ? 82800.0 : 0.0;
        const int n = std::uniform_int_distribution<>(30, 400)(rng);

        std::vector<double> values;
        double v = 95.0;
        for (int i = 0; i < n; ++i) {
            v += std::uniform_int_distribution<>(-3, 3)(rng) * 0.5;
            v = std::clamp(v, 62.0, 100.0);
            values.push_back(v);
        }

        AnalyzeConfig config = stream_config();
        config.pre.downsample_factor = factor;
        config.detector.drop_threshold_pct =
            std::uniform_int_distribution<>(2, 5)(rng) * 1.0;
        config.rate_window_s = std::uniform_int_distribution<>(60, 3600)(rng) * 1.0;

        StreamEngine engine(config, rate);
        for (std::size_t i = 0; i < values.size(); ++i) {
            engine.push(t_start + static_cast<double>(i) / rate, values[i]);
        }

        FinalizeResult streamed;
        std::string stream_error;
        try {
            streamed = engine.finalize();
        } catch (const InputError& e) {
            stream_error = e.what();
        }

        AnalyzeOutcome batch;
        std::string batch_error;
        try {
            batch = analyze_batch(batch_of(values, rate, t_start), config);
        } catch (const InputError& e) {
            batch_error = e.what();
        }

        REQUIRE(stream_error == batch_error);
        if (!stream_error.empty()) {
            continue;
        }
        ++compared;
        CHECK(serialize(streamed.report, ReportFormat::json) ==
              serialize(batch.report, ReportFormat::json));
        CHECK(serialize(streamed.report, ReportFormat::events_csv) ==
              serialize(batch.report, ReportFormat::events_csv));
        CHECK(streamed.report.meta.input_digest == batch.report.meta.input_digest);
    }
    CHECK(compared >= 80);  // the property actually exercised, not vacuous
}

TEST_CASE("the detection working set stays bounded on long streams") {
    auto config = stream_config();
    config.rlm_limit = 60;
    StreamEngine engine(config, 1.0);

    // Sawtooth, period 20: runs of 10, about 180 window events at worst.
    const std::size_t bound = 10 + 181 + 2 * 60;
    for (int i = 0; i < 30000; ++i) {
        const int phase = i % 20;
        const double v = phase < 10 ? 96.0 - phase : 86.0 + (phase - 10);
        engine.push(static_cast<double>(i), v);
        CHECK(engine.retained_detection_records() <= bound);
    }
    const auto result = engine.finalize();
    CHECK(result.report.events.size() == 1500);  // every falling run qualifies
}
