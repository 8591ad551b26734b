#pragma once

#include <map>
#include <string>
#include <vector>

#include "trendlab/features.hpp"
#include "trendlab/labeling.hpp"
#include "trendlab/market_data.hpp"

namespace trendlab {

/// A registry indicator instantiation: registered name plus named parameters
/// (currently only `period` is meaningful; fixed-parameter indicators take
/// none).
struct IndicatorSpec {
    std::string name;
    std::map<std::string, double> params;

    static IndicatorSpec with_period(std::string name, std::size_t period) {
        IndicatorSpec spec;
        spec.name = std::move(name);
        spec.params["period"] = static_cast<double>(period);
        return spec;
    }
    static IndicatorSpec plain(std::string name) {
        IndicatorSpec spec;
        spec.name = std::move(name);
        return spec;
    }
};

struct IndicatorInfo {
    std::string name;
    bool parametric = false;   // takes a `period` parameter
    bool requires_volume = false;
    std::size_t output_count = 1;
};

/// All registered indicator names, sorted.
std::vector<IndicatorInfo> indicator_registry();

/// Computes one indicator over a bar series. Multi-output indicators
/// (bbands, aroon, macd, stoch, mama, minmax) return one named column per
/// output. Throws on unknown names, bad parameters, periods that leave no
/// valid cell, and volume indicators applied to volume-less series.
///
/// Reference conventions (one definition per indicator, fixed here):
///   ema        multiplier 2/(period+1), seeded with the SMA of the first
///              `period` values
///   rsi        Wilder smoothing; zero average loss -> 100, flat -> 50
///   stoch      %K period 14 raw, %D = SMA_3(%K); flat window -> 50
///   macd       12/26/9, signal EMA seeded with an SMA
///   sar        acceleration 0.02 per step, capped at 0.2
///   ultosc     periods 7/14/28
///   kama       efficiency-ratio window = period, smoothing bounds 2/30
///   adx family Wilder smoothing (sums period-seeded)
///   trix       1-bar rate of change of a triple EMA
///   rvi        4-bar symmetric weighting (1,2,2,1)/6, summed over `period`
///   mama       fast/slow limits 0.5/0.05 (Ehlers), warmup 32 bars
std::vector<FeatureColumn> compute_indicator(const IndicatorSpec& spec,
                                             const BarSeries& bars);

/// SMA crossover features: one column per (fast, slow) pair with value
/// SMA_fast - SMA_slow and warmup slow-1. Every fast period must be smaller
/// than every slow period.
FeatureMatrix build_crossover_features(const std::vector<std::size_t>& fast_periods,
                                       const std::vector<std::size_t>& slow_periods,
                                       const BarSeries& bars);

/// Concatenates all manifest indicators; when include_price_volume is set,
/// appends adjusted close and volume columns.
FeatureMatrix build_indicator_matrix(const std::vector<IndicatorSpec>& manifest,
                                     const BarSeries& bars, bool include_price_volume);

/// The shipped default manifest: every period-parametric indicator at
/// periods 3, 14 and 30, every fixed indicator once. Together with the
/// adjusted close and volume columns this yields 112 feature columns
/// (see default_manifest_column_count).
std::vector<IndicatorSpec> default_manifest();

/// Column count of build_indicator_matrix(default_manifest(), ., true).
std::size_t default_manifest_column_count();

/// Manifest text format: one `name` or `name(period=N)` per line, `#` starts
/// a comment.
std::vector<IndicatorSpec> parse_manifest(const std::string& text);

/// Rows ready for model fitting: every feature valid and the label known.
struct Dataset {
    Matrix x;
    std::vector<int> labels;        // +1 / -1
    std::vector<bool> eligible;
    std::vector<Date> dates;
    std::vector<std::string> feature_names;
};

/// Keeps exactly the rows where every feature cell is valid and the label is
/// not unknown; order preserved. Throws when nothing remains.
Dataset drop_warmup(const FeatureMatrix& features, const LabelSeries& labels);

} // namespace trendlab
