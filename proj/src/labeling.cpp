#include "trendlab/labeling.hpp"

#include <ostream>
#include <stdexcept>

namespace trendlab {

CenteredMa centered_ma(const std::vector<double>& close, std::size_t half_window) {
    const std::size_t T = close.size();
    if (T < 2 * half_window + 1)
        throw std::runtime_error("series too short for centered moving average");
    CenteredMa out;
    out.values.assign(T, 0.0);
    out.valid.assign(T, false);
    const std::size_t window = 2 * half_window + 1;
    for (std::size_t t = half_window; t + half_window < T; ++t) {
        double sum = 0.0;
        for (std::size_t i = t - half_window; i <= t + half_window; ++i) sum += close[i];
        out.values[t] = sum / static_cast<double>(window);
        out.valid[t] = true;
    }
    return out;
}

LabelSeries assign_labels(const std::vector<double>& close) {
    const std::size_t T = close.size();
    if (T < 13) throw std::runtime_error("series too short to label (need >= 13 points)");

    constexpr std::size_t h = 3;
    const CenteredMa cma = centered_ma(close, h);

    LabelSeries out;
    out.labels.assign(T, Label::unknown);
    out.eligible.assign(T, false);

    Label prev = Label::unknown;
    for (std::size_t t = 0; t < T; ++t) {
        Label current = prev;
        const bool evaluable = cma.valid[t] && t + 3 < T && cma.valid[t + 1] &&
                               cma.valid[t + 3];
        if (evaluable) {
            const double at_t = cma.values[t];
            if (at_t > close[t] && cma.values[t + 3] > cma.values[t + 1])
                current = Label::up;
            else if (at_t < close[t] && cma.values[t + 3] < cma.values[t + 1])
                current = Label::down;
            // ties and half-fired conditions carry the previous label
        }
        out.labels[t] = current;
        out.eligible[t] = current != Label::unknown;
        prev = current;
    }
    return out;
}

LabelSeries filter_trend_periods(const LabelSeries& labels,
                                 const std::vector<double>& close,
                                 std::size_t min_length) {
    if (labels.size() != close.size())
        throw std::runtime_error("labels and close series length mismatch");
    if (min_length < 1) throw std::runtime_error("min_length must be >= 1");

    LabelSeries out = labels;
    const std::size_t T = labels.size();
    std::size_t run_start = 0;
    while (run_start < T) {
        std::size_t run_end = run_start + 1;
        while (run_end < T && labels.labels[run_end] == labels.labels[run_start]) ++run_end;

        const Label label = labels.labels[run_start];
        bool keep = label != Label::unknown;
        if (keep && run_end - run_start < min_length) keep = false;
        if (keep) {
            const double change = close[run_end - 1] - close[run_start];
            if (label == Label::up && change <= 0.0) keep = false;
            if (label == Label::down && change >= 0.0) keep = false;
        }
        if (!keep) {
            for (std::size_t t = run_start; t < run_end; ++t) out.eligible[t] = false;
        }
        run_start = run_end;
    }
    return out;
}

void write_labels_csv(const LabelSeries& labels, const std::vector<Date>& dates,
                      std::ostream& out) {
    if (labels.size() != dates.size())
        throw std::runtime_error("labels and dates length mismatch");
    out << "date,label,eligible\n";
    for (std::size_t t = 0; t < labels.size(); ++t) {
        out << dates[t].to_string() << ',';
        switch (labels.labels[t]) {
            case Label::up: out << "+1"; break;
            case Label::down: out << "-1"; break;
            case Label::unknown: out << "unknown"; break;
        }
        out << ',' << (labels.eligible[t] ? 1 : 0) << '\n';
    }
}

} // namespace trendlab
