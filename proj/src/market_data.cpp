#include "trendlab/market_data.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <ostream>
#include <sstream>

namespace trendlab {

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(trim(field));
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

double parse_number(const std::string& text, std::size_t line_no, const char* column) {
    try {
        std::size_t consumed = 0;
        const double value = std::stod(text, &consumed);
        if (consumed != text.size()) throw std::invalid_argument(text);
        return value;
    } catch (const std::exception&) {
        throw std::runtime_error("line " + std::to_string(line_no) +
                                 ": malformed value '" + text + "' in column " + column);
    }
}

void check_bar(const Bar& bar, std::size_t line_no) {
    auto fail = [&](const std::string& what) {
        std::string where = line_no == 0
                                ? "bar " + bar.date.to_string()
                                : "line " + std::to_string(line_no);
        throw std::runtime_error(where + ": " + what);
    };
    if (bar.open <= 0.0 || bar.high <= 0.0 || bar.low <= 0.0 || bar.close <= 0.0 ||
        bar.adjusted_close <= 0.0)
        fail("prices must be strictly positive");
    if (bar.volume < 0.0) fail("volume must be non-negative");
    if (bar.low > std::min(bar.open, bar.close))
        fail("low exceeds min(open, close)");
    if (bar.high < std::max(bar.open, bar.close))
        fail("high below max(open, close)");
    if (!std::isfinite(bar.open) || !std::isfinite(bar.high) || !std::isfinite(bar.low) ||
        !std::isfinite(bar.close) || !std::isfinite(bar.adjusted_close) ||
        !std::isfinite(bar.volume))
        fail("non-finite field");
}

} // namespace

BarSeries::BarSeries(std::vector<Bar> bars) : bars_(std::move(bars)) {
    if (bars_.empty()) throw std::runtime_error("BarSeries requires at least one bar");
    for (const Bar& bar : bars_) check_bar(bar, 0);
    for (std::size_t i = 1; i < bars_.size(); ++i) {
        if (!(bars_[i - 1].date < bars_[i].date))
            throw std::runtime_error("duplicate or out-of-order date " +
                                     bars_[i].date.to_string());
    }
}

std::vector<double> BarSeries::closes() const {
    std::vector<double> out(bars_.size());
    std::transform(bars_.begin(), bars_.end(), out.begin(),
                   [](const Bar& b) { return b.close; });
    return out;
}

std::vector<double> BarSeries::adjusted_closes() const {
    std::vector<double> out(bars_.size());
    std::transform(bars_.begin(), bars_.end(), out.begin(),
                   [](const Bar& b) { return b.adjusted_close; });
    return out;
}

std::vector<double> BarSeries::highs() const {
    std::vector<double> out(bars_.size());
    std::transform(bars_.begin(), bars_.end(), out.begin(),
                   [](const Bar& b) { return b.high; });
    return out;
}

std::vector<double> BarSeries::lows() const {
    std::vector<double> out(bars_.size());
    std::transform(bars_.begin(), bars_.end(), out.begin(),
                   [](const Bar& b) { return b.low; });
    return out;
}

std::vector<double> BarSeries::opens() const {
    std::vector<double> out(bars_.size());
    std::transform(bars_.begin(), bars_.end(), out.begin(),
                   [](const Bar& b) { return b.open; });
    return out;
}

std::vector<double> BarSeries::volumes() const {
    std::vector<double> out(bars_.size());
    std::transform(bars_.begin(), bars_.end(), out.begin(),
                   [](const Bar& b) { return b.volume; });
    return out;
}

std::vector<Date> BarSeries::dates() const {
    std::vector<Date> out(bars_.size());
    std::transform(bars_.begin(), bars_.end(), out.begin(),
                   [](const Bar& b) { return b.date; });
    return out;
}

bool BarSeries::has_volume() const {
    return std::any_of(bars_.begin(), bars_.end(),
                       [](const Bar& b) { return b.volume > 0.0; });
}

BarSeries parse_ohlcv_csv(std::istream& input, std::ostream* warnings) {
    std::string line;
    std::size_t line_no = 0;

    // header
    std::map<std::string, std::size_t> columns;
    while (std::getline(input, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto names = split_csv_line(line);
        for (std::size_t i = 0; i < names.size(); ++i) {
            const std::string key = lower(names[i]);
            if (columns.count(key))
                throw std::runtime_error("line " + std::to_string(line_no) +
                                         ": duplicate header column '" + key + "'");
            columns[key] = i;
        }
        break;
    }
    if (columns.empty()) throw std::runtime_error("empty CSV: no header row");

    for (const char* required : {"date", "open", "high", "low", "close", "volume"}) {
        if (!columns.count(required))
            throw std::runtime_error(std::string("missing required column '") + required +
                                     "' in header");
    }
    const bool has_adj = columns.count("adj_close") > 0;
    if (!has_adj && warnings)
        *warnings << "warning: no adj_close column; defaulting adjusted_close to close\n";

    std::vector<Bar> bars;
    while (std::getline(input, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split_csv_line(line);
        auto field = [&](const char* name) -> const std::string& {
            const std::size_t idx = columns.at(name);
            if (idx >= fields.size())
                throw std::runtime_error("line " + std::to_string(line_no) +
                                         ": too few fields");
            return fields[idx];
        };
        Bar bar;
        try {
            bar.date = Date::parse(field("date"));
        } catch (const std::exception& e) {
            throw std::runtime_error("line " + std::to_string(line_no) + ": " + e.what());
        }
        bar.open = parse_number(field("open"), line_no, "open");
        bar.high = parse_number(field("high"), line_no, "high");
        bar.low = parse_number(field("low"), line_no, "low");
        bar.close = parse_number(field("close"), line_no, "close");
        bar.volume = parse_number(field("volume"), line_no, "volume");
        bar.adjusted_close =
            has_adj ? parse_number(field("adj_close"), line_no, "adj_close") : bar.close;
        check_bar(bar, line_no);
        bars.push_back(bar);
    }
    if (bars.empty()) throw std::runtime_error("empty CSV: no data rows");

    std::stable_sort(bars.begin(), bars.end(),
                     [](const Bar& a, const Bar& b) { return a.date < b.date; });
    for (std::size_t i = 1; i < bars.size(); ++i) {
        if (bars[i - 1].date == bars[i].date)
            throw std::runtime_error("duplicate date " + bars[i].date.to_string());
    }
    return BarSeries(std::move(bars));
}

BarSeries parse_ohlcv_csv(const std::string& text, std::ostream* warnings) {
    std::istringstream stream(text);
    return parse_ohlcv_csv(stream, warnings);
}

void write_ohlcv_csv(const BarSeries& series, std::ostream& out) {
    out << "date,open,high,low,close,adj_close,volume\n";
    out.precision(17);
    for (const Bar& bar : series.bars()) {
        out << bar.date.to_string() << ',' << bar.open << ',' << bar.high << ','
            << bar.low << ',' << bar.close << ',' << bar.adjusted_close << ','
            << bar.volume << '\n';
    }
}

SyntheticKind synthetic_kind_from_string(const std::string& name) {
    if (name == "gbm") return SyntheticKind::gbm;
    if (name == "regime_switch") return SyntheticKind::regime_switch;
    if (name == "sinusoid") return SyntheticKind::sinusoid;
    throw std::runtime_error("unknown synthetic kind '" + name + "'");
}

std::string to_string(SyntheticKind kind) {
    switch (kind) {
        case SyntheticKind::gbm: return "gbm";
        case SyntheticKind::regime_switch: return "regime_switch";
        case SyntheticKind::sinusoid: return "sinusoid";
    }
    return "?";
}

BarSeries generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed) {
    if (spec.length < 1) throw std::runtime_error("synthetic length must be >= 1");
    if (spec.start <= 0.0) throw std::runtime_error("synthetic start level must be positive");
    if (spec.volatility < 0.0) throw std::runtime_error("volatility must be non-negative");
    if (spec.base_volume < 0.0) throw std::runtime_error("base volume must be non-negative");
    if (spec.kind == SyntheticKind::regime_switch && spec.segment_length < 1)
        throw std::runtime_error("segment length must be >= 1");
    if (spec.kind == SyntheticKind::sinusoid) {
        if (spec.period <= 0.0) throw std::runtime_error("sinusoid period must be positive");
        if (spec.amplitude < 0.0 || spec.amplitude >= spec.start)
            throw std::runtime_error("sinusoid amplitude must be in [0, start)");
    }

    Rng rng(mix_seed(seed, 0xba5e));
    std::vector<double> close(spec.length);

    switch (spec.kind) {
        case SyntheticKind::gbm: {
            double log_price = std::log(spec.start);
            for (std::size_t t = 0; t < spec.length; ++t) {
                close[t] = std::exp(log_price);
                log_price += spec.drift + spec.volatility * rng.gaussian();
            }
            break;
        }
        case SyntheticKind::regime_switch: {
            double log_price = std::log(spec.start);
            for (std::size_t t = 0; t < spec.length; ++t) {
                close[t] = std::exp(log_price);
                const double sign = ((t / spec.segment_length) % 2 == 0) ? 1.0 : -1.0;
                log_price += sign * spec.drift + spec.volatility * rng.gaussian();
            }
            break;
        }
        case SyntheticKind::sinusoid: {
            constexpr double two_pi = 2.0 * 3.141592653589793238462643383279502884;
            for (std::size_t t = 0; t < spec.length; ++t) {
                close[t] = spec.start +
                           spec.amplitude * std::sin(two_pi * static_cast<double>(t) /
                                                     spec.period);
            }
            break;
        }
    }

    // OHLC around the close path: open carries the previous close, with a
    // small volume wobble so volume indicators see non-constant flow.
    const Date start_date{2000, 1, 3};
    std::vector<Bar> bars(spec.length);
    for (std::size_t t = 0; t < spec.length; ++t) {
        Bar& bar = bars[t];
        bar.date = start_date.plus_days(static_cast<std::int64_t>(t));
        bar.open = t == 0 ? close[0] : close[t - 1];
        bar.close = close[t];
        bar.adjusted_close = close[t];
        bar.high = std::max(bar.open, bar.close);
        bar.low = std::min(bar.open, bar.close);
        bar.volume =
            spec.base_volume == 0.0 ? 0.0 : spec.base_volume * (1.0 + 0.5 * rng.uniform());
    }
    return BarSeries(std::move(bars));
}

std::pair<IndexRange, IndexRange> chronological_split(std::size_t series_length,
                                                      double train_fraction) {
    if (series_length < 2)
        throw std::runtime_error("chronological_split requires length >= 2");
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw std::runtime_error("train_fraction must lie in (0, 1)");
    const auto train_len = static_cast<std::size_t>(
        std::floor(train_fraction * static_cast<double>(series_length)));
    if (train_len == 0 || train_len == series_length)
        throw std::runtime_error("train_fraction yields an empty train or test split");
    return {IndexRange{0, train_len}, IndexRange{train_len, series_length}};
}

} // namespace trendlab
