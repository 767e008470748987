#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <random>
#include <vector>

#include "oxiscan/errors.hpp"
#include "oxiscan/rates.hpp"
#include "oxiscan/synth.hpp"

using namespace oxiscan;

namespace {

ApneaEvent ev(double start_s, double end_s) {
    ApneaEvent e;
    e.start_s = start_s;
    e.end_s = end_s;
    e.duration_s = end_s - start_s;
    return e;
}

// Reference: for every anchor event, count every event fully inside
// [anchor start, anchor start + window], by direct enumeration.
std::size_t anchor_oracle(const std::vector<ApneaEvent>& events, double window_s) {
    std::size_t best = 0;
    for (const auto& anchor : events) {
        std::size_t count = 0;
        for (const auto& e : events) {
            if (e.start_s >= anchor.start_s && e.end_s - anchor.start_s <= window_s) {
                ++count;
            }
        }
        best = std::max(best, count);
    }
    return best;
}

}  // namespace

TEST_CASE("no events means rate zero and a normal label") {
    const auto analysis = max_rate({}, 3600.0, 7200.0);
    CHECK(analysis.max_rate_per_hour == 0);
    CHECK(analysis.per_window.empty());
    CHECK(analysis.severity == Severity::normal);
    CHECK_FALSE(analysis.insufficient_duration);
}

TEST_CASE("a tight cluster all lands in one window") {
    std::vector<ApneaEvent> events;
    for (int i = 0; i < 7; ++i) {
        events.push_back(ev(i * 80.0, i * 80.0 + 30.0));  // all inside 10 min
    }
    const auto analysis = max_rate(events, 3600.0, 7200.0);
    CHECK(analysis.max_rate_per_hour == 7);
    CHECK(analysis.per_window[0] == 7);
    CHECK(analysis.max_window_start_s == 0.0);
    CHECK(analysis.max_window_end_s == 3600.0);
}

TEST_CASE("membership tests the event's end against the anchor's start") {
    // Starts 0, 1770, 3570, 5370; each event 30 s long.
    std::vector<ApneaEvent> events = {
        ev(0, 30), ev(1770, 1800), ev(3570, 3600), ev(5370, 5400)};
    const auto analysis = max_rate(events, 3600.0, 7200.0);
    CHECK(analysis.per_window == std::vector<std::size_t>{3, 2, 2, 1});
    CHECK(analysis.max_rate_per_hour == 3);
    CHECK(analysis.max_window_start_s == 0.0);
    CHECK(analysis.max_window_end_s == 3600.0);
    CHECK(analysis.severity == Severity::normal);
}

TEST_CASE("an event straddling the window edge does not count") {
    // Second event ends 1 s past the first anchor's window.
    std::vector<ApneaEvent> events = {ev(0, 30), ev(3550, 3601)};
    const auto analysis = max_rate(events, 3600.0, 7200.0);
    CHECK(analysis.per_window == std::vector<std::size_t>{1, 1});
    CHECK(analysis.max_rate_per_hour == 1);
}

TEST_CASE("an event longer than the window counts nowhere") {
    std::vector<ApneaEvent> events = {ev(0, 4000)};
    const auto analysis = max_rate(events, 3600.0, 7200.0);
    CHECK(analysis.per_window == std::vector<std::size_t>{0});
    CHECK(analysis.max_rate_per_hour == 0);

    // Later ordinary events are still counted from their own anchors.
    events.push_back(ev(4100, 4130));
    events.push_back(ev(4200, 4230));
    const auto more = max_rate(events, 3600.0, 7200.0);
    CHECK(more.per_window == std::vector<std::size_t>{0, 2, 1});
    CHECK(more.max_rate_per_hour == 2);
    CHECK(more.max_window_start_s == 4100.0);
}

TEST_CASE("short recordings are flagged, not extrapolated") {
    std::vector<ApneaEvent> events = {ev(10, 40), ev(100, 130)};
    const auto analysis = max_rate(events, 3600.0, 600.0);
    CHECK(analysis.insufficient_duration);
    CHECK(analysis.max_rate_per_hour == 2);  // raw count, no scaling
}

TEST_CASE("severity bands use inclusive upper edges") {
    CHECK(classify_severity(0.0) == Severity::normal);
    CHECK(classify_severity(5.0) == Severity::normal);
    CHECK(classify_severity(5.01) == Severity::mild);
    CHECK(classify_severity(15.0) == Severity::mild);
    CHECK(classify_severity(15.01) == Severity::moderate);
    CHECK(classify_severity(16.0) == Severity::moderate);
    CHECK(classify_severity(30.0) == Severity::moderate);
    CHECK(classify_severity(30.01) == Severity::severe);
    CHECK(classify_severity(31.0) == Severity::severe);
    CHECK(classify_severity(100.0) == Severity::severe);
    CHECK_THROWS_AS(classify_severity(-1.0), InternalError);
}

TEST_CASE("severity strings are lowercase labels") {
    CHECK(std::string(to_string(Severity::normal)) == "normal");
    CHECK(std::string(to_string(Severity::mild)) == "mild");
    CHECK(std::string(to_string(Severity::moderate)) == "moderate");
    CHECK(std::string(to_string(Severity::severe)) == "severe");
}

TEST_CASE("window must be positive") {
    CHECK_THROWS_AS(max_rate({}, 0.0, 100.0), InputError);
}

TEST_CASE("two-pointer result matches direct enumeration on random event sets") {
    std::mt19937 rng(987);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<ApneaEvent> events;
        double t = 0.0;
        const int n = std::uniform_int_distribution<>(0, 40)(rng);
        for (int i = 0; i < n; ++i) {
            t += std::uniform_int_distribution<>(1, 900)(rng);
            const double len = std::uniform_int_distribution<>(5, 120)(rng);
            events.push_back(ev(t, t + len));
            t += len;
        }
        const double window = std::uniform_int_distribution<>(60, 3600)(rng);

        const auto analysis = max_rate(events, window, t + 100.0);
        CHECK(analysis.max_rate_per_hour == anchor_oracle(events, window));
        CHECK(analysis.max_rate_per_hour == oracle_max_rate(events, window, t + 100.0));

        // per_window agrees with per-anchor enumeration, and the reported
        // best window really achieves the best count.
        std::size_t best = 0;
        for (std::size_t i = 0; i < events.size(); ++i) {
            std::size_t count = 0;
            for (std::size_t j = i; j < events.size(); ++j) {
                if (events[j].end_s - events[i].start_s <= window) {
                    ++count;
                }
            }
            CHECK(analysis.per_window[i] == count);
            best = std::max(best, count);
        }
        CHECK(analysis.max_rate_per_hour == best);
    }
}

TEST_CASE("adding one more event never lowers the maximum rate") {
    std::mt19937 rng(555);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<ApneaEvent> events;
        double t = 0.0;
        const int n = std::uniform_int_distribution<>(1, 20)(rng);
        for (int i = 0; i < n; ++i) {
            t += std::uniform_int_distribution<>(40, 600)(rng);
            events.push_back(ev(t, t + 20.0));
            t += 20.0;
        }
        const auto before = max_rate(events, 3600.0, t + 100.0);

        std::vector<ApneaEvent> grown = events;
        grown.push_back(ev(t + 50.0, t + 60.0));
        const auto after = max_rate(grown, 3600.0, t + 200.0);
        CHECK(after.max_rate_per_hour >= before.max_rate_per_hour);
    }
}
