#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "trendlab/core.hpp"

namespace trendlab {

struct Bar {
    Date date;
    double open = 0.0;
    double high = 0.0;
    double low = 0.0;
    double close = 0.0;
    double adjusted_close = 0.0;
    double volume = 0.0;

    friend bool operator==(const Bar& a, const Bar& b) {
        return a.date == b.date && a.open == b.open && a.high == b.high &&
               a.low == b.low && a.close == b.close &&
               a.adjusted_close == b.adjusted_close && a.volume == b.volume;
    }
};

/// Ordered OHLCV history. Construction validates:
///   - timestamps strictly increasing (no duplicates)
///   - low <= min(open, close), high >= max(open, close)
///   - prices strictly positive, volume non-negative
///   - length >= 1
/// Immutable after construction.
class BarSeries {
public:
    explicit BarSeries(std::vector<Bar> bars);

    std::size_t size() const { return bars_.size(); }
    const Bar& operator[](std::size_t i) const { return bars_[i]; }
    const std::vector<Bar>& bars() const { return bars_; }

    std::vector<double> closes() const;
    std::vector<double> adjusted_closes() const;
    std::vector<double> highs() const;
    std::vector<double> lows() const;
    std::vector<double> opens() const;
    std::vector<double> volumes() const;
    std::vector<Date> dates() const;

    /// True when at least one bar reports nonzero volume. Volume-based
    /// indicators refuse series without real volume.
    bool has_volume() const;

private:
    std::vector<Bar> bars_;
};

/// Parses OHLCV CSV. Header row is required and names the columns
/// date,open,high,low,close,adj_close,volume (case-insensitive, any order).
/// Rows may arrive out of order; the result is sorted by date. When the
/// adj_close column is absent, adjusted_close defaults to close and a
/// warning line is written to `warnings` (when non-null).
BarSeries parse_ohlcv_csv(std::istream& input, std::ostream* warnings = nullptr);
BarSeries parse_ohlcv_csv(const std::string& text, std::ostream* warnings = nullptr);

/// Inverse of parse_ohlcv_csv: full-header CSV, round-trip safe.
void write_ohlcv_csv(const BarSeries& series, std::ostream& out);

enum class SyntheticKind { gbm, regime_switch, sinusoid };

SyntheticKind synthetic_kind_from_string(const std::string& name);
std::string to_string(SyntheticKind kind);

struct SyntheticSpec {
    SyntheticKind kind = SyntheticKind::gbm;
    std::size_t length = 0;
    double start = 100.0;          // initial price level (sinusoid: mid level)
    double drift = 0.0;            // per-step log drift (regime: magnitude)
    double volatility = 0.0;       // per-step log-return stddev
    std::size_t segment_length = 60; // regime_switch: bars per drift regime
    double amplitude = 0.0;        // sinusoid
    double period = 50.0;          // sinusoid, in bars
    double base_volume = 1.0e6;    // may be 0 to model a volume-less series
};

/// Deterministic synthetic OHLCV generator for tests and desk-scale runs.
/// regime_switch alternates the sign of `drift` every `segment_length` bars.
BarSeries generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed);

struct IndexRange {
    std::size_t begin = 0;
    std::size_t end = 0; // half-open

    std::size_t size() const { return end - begin; }
    friend bool operator==(const IndexRange& a, const IndexRange& b) {
        return a.begin == b.begin && a.end == b.end;
    }
};

/// Train = first floor(fraction * length) indices, test = remainder.
/// Throws when either side would be empty.
std::pair<IndexRange, IndexRange> chronological_split(std::size_t series_length,
                                                      double train_fraction);

} // namespace trendlab
