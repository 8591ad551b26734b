#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "trendlab/core.hpp"

namespace trendlab {

enum class Label : std::int8_t { down = -1, unknown = 0, up = 1 };

inline int label_value(Label l) { return static_cast<int>(l); }

/// Per-timestamp trend label plus a training-eligibility mask.
/// Invariant: eligible[t] implies labels[t] != unknown.
struct LabelSeries {
    std::vector<Label> labels;
    std::vector<bool> eligible;

    std::size_t size() const { return labels.size(); }
};

/// Centered moving average over [t-h, t+h]; result[t] is valid only for
/// h <= t < T-h (mask returned alongside).
struct CenteredMa {
    std::vector<double> values;
    std::vector<bool> valid;
};
CenteredMa centered_ma(const std::vector<double>& close, std::size_t half_window);

/// Trend labeling with half-window 3:
///   +1 when cMA(t) > close(t) and cMA(t+3) > cMA(t+1)
///   -1 when cMA(t) < close(t) and cMA(t+3) < cMA(t+1)
/// otherwise the previous label carries (unknown before the first firing,
/// including wherever a needed cMA term is undefined or a comparison ties).
LabelSeries assign_labels(const std::vector<double>& close);

/// Marks ineligible every maximal constant-label run that is shorter than
/// min_length or whose net close change contradicts the label sign
/// (up-run with close(end) <= close(start), down-run with >=).
/// Unknown-labeled rows are always ineligible.
LabelSeries filter_trend_periods(const LabelSeries& labels,
                                 const std::vector<double>& close,
                                 std::size_t min_length);

/// CSV columns date,label,eligible; label rendered as +1 / -1 / unknown.
void write_labels_csv(const LabelSeries& labels, const std::vector<Date>& dates,
                      std::ostream& out);

} // namespace trendlab
