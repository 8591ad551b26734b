#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "trendlab/market_data.hpp"

using namespace trendlab;

namespace {

const char* kSmallCsv =
    "date,open,high,low,close,adj_close,volume\n"
    "2020-01-02,10,11,9,10.5,10.4,1000\n"
    "2020-01-03,10.5,12,10,11.5,11.4,1500\n"
    "2020-01-06,11.5,12,10.5,11,10.9,900\n";

} // namespace

TEST_CASE("single-row csv parses to a one-bar series") {
    const std::string csv =
        "date,open,high,low,close,adj_close,volume\n"
        "2020-01-02,10,11,9,10.5,10.4,1000\n";
    const BarSeries bars = parse_ohlcv_csv(csv);
    REQUIRE(bars.size() == 1);
    CHECK(bars[0].date == Date{2020, 1, 2});
    CHECK(bars[0].close == doctest::Approx(10.5));
    CHECK(bars[0].adjusted_close == doctest::Approx(10.4));
}

TEST_CASE("rows out of date order parse the same as sorted input") {
    const std::string shuffled =
        "date,open,high,low,close,adj_close,volume\n"
        "2020-01-06,11.5,12,10.5,11,10.9,900\n"
        "2020-01-02,10,11,9,10.5,10.4,1000\n"
        "2020-01-03,10.5,12,10,11.5,11.4,1500\n";
    const BarSeries a = parse_ohlcv_csv(kSmallCsv);
    const BarSeries b = parse_ohlcv_csv(shuffled);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("header columns may arrive in any order and case") {
    const std::string csv =
        "Volume,CLOSE,date,low,HIGH,open,Adj_Close\n"
        "1000,10.5,2020-01-02,9,11,10,10.4\n";
    const BarSeries bars = parse_ohlcv_csv(csv);
    CHECK(bars[0].open == doctest::Approx(10.0));
    CHECK(bars[0].adjusted_close == doctest::Approx(10.4));
}

TEST_CASE("invariant violations name the offending line") {
    const std::string bad_low =
        "date,open,high,low,close,adj_close,volume\n"
        "2020-01-02,10,11,9,10.5,10.4,1000\n"
        "2020-01-03,10.5,12,11.8,11.5,11.4,1500\n"; // low > close
    CHECK_THROWS_WITH_AS(parse_ohlcv_csv(bad_low),
                         doctest::Contains("line 3"), std::runtime_error);

    const std::string bad_number =
        "date,open,high,low,close,adj_close,volume\n"
        "2020-01-02,10,11,nine,10.5,10.4,1000\n";
    CHECK_THROWS_WITH_AS(parse_ohlcv_csv(bad_number),
                         doctest::Contains("line 2"), std::runtime_error);
}

TEST_CASE("duplicate dates, empty files and missing columns are rejected") {
    CHECK_THROWS_AS(parse_ohlcv_csv(std::string("")), std::runtime_error);
    CHECK_THROWS_AS(
        parse_ohlcv_csv(std::string("date,open,high,low,close,adj_close,volume\n")),
        std::runtime_error);
    const std::string dup =
        "date,open,high,low,close,adj_close,volume\n"
        "2020-01-02,10,11,9,10.5,10.4,1000\n"
        "2020-01-02,10,11,9,10.5,10.4,1000\n";
    CHECK_THROWS_WITH_AS(parse_ohlcv_csv(dup), doctest::Contains("duplicate"),
                         std::runtime_error);
    const std::string missing =
        "date,open,high,low,adj_close,volume\n"
        "2020-01-02,10,11,9,10.4,1000\n";
    CHECK_THROWS_WITH_AS(parse_ohlcv_csv(missing), doctest::Contains("close"),
                         std::runtime_error);
}

TEST_CASE("absent adj_close defaults to close with a warning") {
    const std::string csv =
        "date,open,high,low,close,volume\n"
        "2020-01-02,10,11,9,10.5,1000\n";
    std::ostringstream warnings;
    const BarSeries bars = parse_ohlcv_csv(csv, &warnings);
    CHECK(bars[0].adjusted_close == bars[0].close);
    CHECK(warnings.str().find("adj_close") != std::string::npos);
}

TEST_CASE("csv round-trip reproduces the series exactly") {
    SyntheticSpec spec;
    spec.kind = SyntheticKind::gbm;
    spec.length = 120;
    spec.drift = 0.001;
    spec.volatility = 0.02;
    const BarSeries original = generate_synthetic(spec, 99);

    std::ostringstream rendered;
    write_ohlcv_csv(original, rendered);
    const BarSeries reparsed = parse_ohlcv_csv(rendered.str());
    REQUIRE(reparsed.size() == original.size());
    for (std::size_t i = 0; i < original.size(); ++i) CHECK(reparsed[i] == original[i]);
}

TEST_CASE("bar series invariants are enforced on construction") {
    Bar bar{Date{2020, 1, 2}, 10, 11, 9, 10.5, 10.5, 1000};
    Bar violates_high = bar;
    violates_high.high = 10.0; // below close
    CHECK_THROWS_AS(BarSeries({violates_high}), std::runtime_error);

    Bar negative_volume = bar;
    negative_volume.volume = -1.0;
    CHECK_THROWS_AS(BarSeries({negative_volume}), std::runtime_error);

    Bar zero_volume = bar;
    zero_volume.volume = 0.0;
    CHECK_NOTHROW(BarSeries({zero_volume}));

    Bar later = bar;
    later.date = Date{2020, 1, 1};
    CHECK_THROWS_AS(BarSeries({bar, later}), std::runtime_error);
    CHECK_THROWS_AS(BarSeries({}), std::runtime_error);
}

TEST_CASE("sinusoid with zero amplitude produces a constant series") {
    SyntheticSpec spec;
    spec.kind = SyntheticKind::sinusoid;
    spec.length = 50;
    spec.start = 100.0;
    spec.amplitude = 0.0;
    const BarSeries bars = generate_synthetic(spec, 1);
    for (std::size_t t = 0; t < bars.size(); ++t)
        CHECK(bars[t].close == doctest::Approx(100.0));
}

TEST_CASE("synthetic generation is bit-reproducible under a fixed seed") {
    SyntheticSpec spec;
    spec.kind = SyntheticKind::gbm;
    spec.length = 200;
    spec.drift = 0.0005;
    spec.volatility = 0.015;
    const BarSeries a = generate_synthetic(spec, 42);
    const BarSeries b = generate_synthetic(spec, 42);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);

    const BarSeries c = generate_synthetic(spec, 43);
    bool any_difference = false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!(a[i] == c[i])) any_difference = true;
    CHECK(any_difference);
}

TEST_CASE("noiseless gbm follows the closed-form exponential path") {
    SyntheticSpec spec;
    spec.kind = SyntheticKind::gbm;
    spec.length = 100;
    spec.start = 100.0;
    spec.drift = 0.01;
    spec.volatility = 0.0;
    const BarSeries bars = generate_synthetic(spec, 7);
    for (std::size_t t = 0; t < bars.size(); ++t) {
        const double expected = 100.0 * std::exp(0.01 * static_cast<double>(t));
        CHECK(bars[t].close == doctest::Approx(expected).epsilon(1e-9));
    }
}

TEST_CASE("regime_switch alternates drift sign per segment") {
    SyntheticSpec spec;
    spec.kind = SyntheticKind::regime_switch;
    spec.length = 20;
    spec.start = 100.0;
    spec.drift = 0.01;
    spec.volatility = 0.0;
    spec.segment_length = 5;
    const BarSeries bars = generate_synthetic(spec, 3);
    for (std::size_t t = 1; t < bars.size(); ++t) {
        const double log_return = std::log(bars[t].close / bars[t - 1].close);
        // step t-1 -> t uses the drift of segment (t-1)/5
        const double expected = ((t - 1) / 5) % 2 == 0 ? 0.01 : -0.01;
        CHECK(log_return == doctest::Approx(expected).epsilon(1e-9));
    }
}

TEST_CASE("synthetic parameter validation") {
    SyntheticSpec spec;
    spec.kind = SyntheticKind::gbm;
    spec.length = 0;
    CHECK_THROWS_AS(generate_synthetic(spec, 1), std::runtime_error);
    spec.length = 10;
    spec.start = -5.0;
    CHECK_THROWS_AS(generate_synthetic(spec, 1), std::runtime_error);
    spec.start = 100.0;
    spec.kind = SyntheticKind::sinusoid;
    spec.amplitude = 150.0; // would cross zero
    CHECK_THROWS_AS(generate_synthetic(spec, 1), std::runtime_error);
}

TEST_CASE("chronological split arithmetic") {
    auto [train, test] = chronological_split(100, 0.9);
    CHECK(train == IndexRange{0, 90});
    CHECK(test == IndexRange{90, 100});

    std::tie(train, test) = chronological_split(10, 0.5);
    CHECK(train == IndexRange{0, 5});
    CHECK(test == IndexRange{5, 10});

    // floor arithmetic at the minimal size
    std::tie(train, test) = chronological_split(2, 0.9);
    CHECK(train == IndexRange{0, 1});
    CHECK(test == IndexRange{1, 2});

    CHECK_THROWS_AS(chronological_split(1, 0.5), std::runtime_error);
    CHECK_THROWS_AS(chronological_split(10, 0.05), std::runtime_error); // empty train
    CHECK_THROWS_AS(chronological_split(10, 1.0), std::runtime_error);
}

TEST_CASE("every split keeps all train timestamps before test timestamps") {
    SyntheticSpec spec;
    spec.kind = SyntheticKind::gbm;
    spec.length = 57;
    spec.volatility = 0.01;
    const BarSeries bars = generate_synthetic(spec, 5);
    for (const double fraction : {0.3, 0.5, 0.77, 0.9}) {
        const auto [train, test] = chronological_split(bars.size(), fraction);
        CHECK(train.size() + test.size() == bars.size());
        CHECK(bars[train.end - 1].date < bars[test.begin].date);
    }
}
