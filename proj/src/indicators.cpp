#include "trendlab/indicators.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace trendlab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kPi = 3.141592653589793238462643383279502884;

/// Intermediate series: values undefined (NaN) before `warmup`.
struct Series {
    std::vector<double> v;
    std::size_t warmup = 0;

    static Series blank(std::size_t n, std::size_t warmup) {
        Series s;
        s.v.assign(n, kNaN);
        s.warmup = warmup;
        return s;
    }
};

Series from_values(std::vector<double> values) {
    Series s;
    s.v = std::move(values);
    s.warmup = 0;
    return s;
}

Series sma_of(const Series& in, std::size_t p) {
    const std::size_t n = in.v.size();
    Series out = Series::blank(n, in.warmup + p - 1);
    for (std::size_t t = out.warmup; t < n; ++t) {
        double sum = 0.0;
        for (std::size_t i = t + 1 - p; i <= t; ++i) sum += in.v[i];
        out.v[t] = sum / static_cast<double>(p);
    }
    return out;
}

// EMA seeded with the SMA of the first p defined values.
Series ema_of(const Series& in, std::size_t p) {
    const std::size_t n = in.v.size();
    Series out = Series::blank(n, in.warmup + p - 1);
    if (out.warmup >= n) return out;
    double seed = 0.0;
    for (std::size_t i = in.warmup; i < in.warmup + p; ++i) seed += in.v[i];
    seed /= static_cast<double>(p);
    const double k = 2.0 / (static_cast<double>(p) + 1.0);
    out.v[out.warmup] = seed;
    for (std::size_t t = out.warmup + 1; t < n; ++t)
        out.v[t] = k * in.v[t] + (1.0 - k) * out.v[t - 1];
    return out;
}

Series wma_of(const Series& in, std::size_t p) {
    const std::size_t n = in.v.size();
    Series out = Series::blank(n, in.warmup + p - 1);
    const double denom = static_cast<double>(p) * static_cast<double>(p + 1) / 2.0;
    for (std::size_t t = out.warmup; t < n; ++t) {
        double sum = 0.0;
        for (std::size_t i = 0; i < p; ++i)
            sum += static_cast<double>(i + 1) * in.v[t + 1 - p + i];
        out.v[t] = sum / denom;
    }
    return out;
}

FeatureColumn to_column(std::string name, const Series& s) {
    FeatureColumn col;
    col.name = std::move(name);
    col.values = s.v;
    col.warmup = s.warmup;
    return col;
}

std::vector<double> typical_price(const BarSeries& bars) {
    std::vector<double> tp(bars.size());
    for (std::size_t t = 0; t < bars.size(); ++t)
        tp[t] = (bars[t].high + bars[t].low + bars[t].close) / 3.0;
    return tp;
}

// True range; index 0 falls back to high-low.
std::vector<double> true_range(const BarSeries& bars) {
    std::vector<double> tr(bars.size());
    tr[0] = bars[0].high - bars[0].low;
    for (std::size_t t = 1; t < bars.size(); ++t) {
        const double prev_close = bars[t - 1].close;
        tr[t] = std::max({bars[t].high - bars[t].low,
                          std::abs(bars[t].high - prev_close),
                          std::abs(bars[t].low - prev_close)});
    }
    return tr;
}

// ---- per-indicator workers ------------------------------------------------

Series calc_momentum(const std::vector<double>& close, std::size_t p) {
    Series out = Series::blank(close.size(), p);
    for (std::size_t t = p; t < close.size(); ++t) out.v[t] = close[t] - close[t - p];
    return out;
}

Series calc_roc(const std::vector<double>& close, std::size_t p) {
    Series out = Series::blank(close.size(), p);
    for (std::size_t t = p; t < close.size(); ++t)
        out.v[t] = 100.0 * (close[t] / close[t - p] - 1.0);
    return out;
}

Series calc_rsi(const std::vector<double>& close, std::size_t p) {
    const std::size_t n = close.size();
    Series out = Series::blank(n, p);
    if (p >= n) return out;
    double avg_gain = 0.0;
    double avg_loss = 0.0;
    for (std::size_t t = 1; t <= p; ++t) {
        const double d = close[t] - close[t - 1];
        if (d > 0.0)
            avg_gain += d;
        else
            avg_loss -= d;
    }
    avg_gain /= static_cast<double>(p);
    avg_loss /= static_cast<double>(p);
    auto rsi = [](double gain, double loss) {
        if (loss == 0.0) return gain == 0.0 ? 50.0 : 100.0;
        return 100.0 - 100.0 / (1.0 + gain / loss);
    };
    out.v[p] = rsi(avg_gain, avg_loss);
    for (std::size_t t = p + 1; t < n; ++t) {
        const double d = close[t] - close[t - 1];
        const double gain = d > 0.0 ? d : 0.0;
        const double loss = d < 0.0 ? -d : 0.0;
        avg_gain = (avg_gain * static_cast<double>(p - 1) + gain) / static_cast<double>(p);
        avg_loss = (avg_loss * static_cast<double>(p - 1) + loss) / static_cast<double>(p);
        out.v[t] = rsi(avg_gain, avg_loss);
    }
    return out;
}

Series calc_willr(const BarSeries& bars, std::size_t p) {
    const std::size_t n = bars.size();
    Series out = Series::blank(n, p - 1);
    for (std::size_t t = out.warmup; t < n; ++t) {
        double hh = -std::numeric_limits<double>::infinity();
        double ll = std::numeric_limits<double>::infinity();
        for (std::size_t i = t + 1 - p; i <= t; ++i) {
            hh = std::max(hh, bars[i].high);
            ll = std::min(ll, bars[i].low);
        }
        out.v[t] = hh == ll ? -50.0 : -100.0 * (hh - bars[t].close) / (hh - ll);
    }
    return out;
}

struct Bollinger {
    Series middle, upper, lower;
};

Bollinger calc_bbands(const std::vector<double>& close, std::size_t p) {
    const std::size_t n = close.size();
    Bollinger bb{Series::blank(n, p - 1), Series::blank(n, p - 1), Series::blank(n, p - 1)};
    for (std::size_t t = p - 1; t < n; ++t) {
        double sum = 0.0;
        for (std::size_t i = t + 1 - p; i <= t; ++i) sum += close[i];
        const double mean = sum / static_cast<double>(p);
        double var = 0.0;
        for (std::size_t i = t + 1 - p; i <= t; ++i) {
            const double d = close[i] - mean;
            var += d * d;
        }
        const double sd = std::sqrt(var / static_cast<double>(p));
        bb.middle.v[t] = mean;
        bb.upper.v[t] = mean + 2.0 * sd;
        bb.lower.v[t] = mean - 2.0 * sd;
    }
    return bb;
}

Series calc_cci(const BarSeries& bars, std::size_t p) {
    const std::vector<double> tp = typical_price(bars);
    const std::size_t n = tp.size();
    Series out = Series::blank(n, p - 1);
    for (std::size_t t = p - 1; t < n; ++t) {
        double sum = 0.0;
        for (std::size_t i = t + 1 - p; i <= t; ++i) sum += tp[i];
        const double mean = sum / static_cast<double>(p);
        double dev = 0.0;
        for (std::size_t i = t + 1 - p; i <= t; ++i) dev += std::abs(tp[i] - mean);
        dev /= static_cast<double>(p);
        out.v[t] = dev == 0.0 ? 0.0 : (tp[t] - mean) / (0.015 * dev);
    }
    return out;
}

Series calc_cmo(const std::vector<double>& close, std::size_t p) {
    const std::size_t n = close.size();
    Series out = Series::blank(n, p);
    for (std::size_t t = p; t < n; ++t) {
        double gains = 0.0, losses = 0.0;
        for (std::size_t i = t + 1 - p; i <= t; ++i) {
            const double d = close[i] - close[i - 1];
            if (d > 0.0)
                gains += d;
            else
                losses -= d;
        }
        const double denom = gains + losses;
        out.v[t] = denom == 0.0 ? 0.0 : 100.0 * (gains - losses) / denom;
    }
    return out;
}

Series calc_atr(const BarSeries& bars, std::size_t p) {
    const std::vector<double> tr = true_range(bars);
    const std::size_t n = tr.size();
    Series out = Series::blank(n, p - 1);
    if (out.warmup >= n) return out;
    double atr = 0.0;
    for (std::size_t t = 0; t < p; ++t) atr += tr[t];
    atr /= static_cast<double>(p);
    out.v[p - 1] = atr;
    for (std::size_t t = p; t < n; ++t) {
        atr = (atr * static_cast<double>(p - 1) + tr[t]) / static_cast<double>(p);
        out.v[t] = atr;
    }
    return out;
}

Series calc_obv(const BarSeries& bars) {
    const std::size_t n = bars.size();
    Series out = Series::blank(n, 0);
    double obv = bars[0].volume;
    out.v[0] = obv;
    for (std::size_t t = 1; t < n; ++t) {
        if (bars[t].close > bars[t - 1].close)
            obv += bars[t].volume;
        else if (bars[t].close < bars[t - 1].close)
            obv -= bars[t].volume;
        out.v[t] = obv;
    }
    return out;
}

Series calc_mfi(const BarSeries& bars, std::size_t p) {
    const std::vector<double> tp = typical_price(bars);
    const std::size_t n = tp.size();
    Series out = Series::blank(n, p);
    for (std::size_t t = p; t < n; ++t) {
        double pos = 0.0, neg = 0.0;
        for (std::size_t i = t + 1 - p; i <= t; ++i) {
            const double flow = tp[i] * bars[i].volume;
            if (tp[i] > tp[i - 1])
                pos += flow;
            else if (tp[i] < tp[i - 1])
                neg += flow;
        }
        const double denom = pos + neg;
        out.v[t] = denom == 0.0 ? 50.0 : 100.0 * pos / denom;
    }
    return out;
}

struct DirectionalSet {
    Series plus_di, minus_di, dx, adx, adxr, plus_dm_smooth;
};

DirectionalSet calc_directional(const BarSeries& bars, std::size_t p) {
    const std::size_t n = bars.size();
    DirectionalSet out{Series::blank(n, p),     Series::blank(n, p),
                       Series::blank(n, p),     Series::blank(n, 2 * p - 1),
                       Series::blank(n, 3 * p - 1), Series::blank(n, p)};
    if (p >= n) return out;

    std::vector<double> plus_dm(n, 0.0), minus_dm(n, 0.0);
    const std::vector<double> tr = true_range(bars);
    for (std::size_t t = 1; t < n; ++t) {
        const double up = bars[t].high - bars[t - 1].high;
        const double down = bars[t - 1].low - bars[t].low;
        if (up > down && up > 0.0) plus_dm[t] = up;
        if (down > up && down > 0.0) minus_dm[t] = down;
    }

    // Wilder running sums seeded over t = 1..p.
    double s_plus = 0.0, s_minus = 0.0, s_tr = 0.0;
    for (std::size_t t = 1; t <= p; ++t) {
        s_plus += plus_dm[t];
        s_minus += minus_dm[t];
        s_tr += tr[t];
    }
    double adx = kNaN;
    double adx_seed_sum = 0.0;
    std::size_t dx_count = 0;
    for (std::size_t t = p; t < n; ++t) {
        if (t > p) {
            const double inv_p = 1.0 / static_cast<double>(p);
            s_plus += plus_dm[t] - s_plus * inv_p;
            s_minus += minus_dm[t] - s_minus * inv_p;
            s_tr += tr[t] - s_tr * inv_p;
        }
        const double pdi = s_tr == 0.0 ? 0.0 : 100.0 * s_plus / s_tr;
        const double mdi = s_tr == 0.0 ? 0.0 : 100.0 * s_minus / s_tr;
        const double dx = pdi + mdi == 0.0 ? 0.0 : 100.0 * std::abs(pdi - mdi) / (pdi + mdi);
        out.plus_di.v[t] = pdi;
        out.minus_di.v[t] = mdi;
        out.dx.v[t] = dx;
        out.plus_dm_smooth.v[t] = s_plus;

        ++dx_count;
        if (dx_count <= p) {
            adx_seed_sum += dx;
            if (dx_count == p) {
                adx = adx_seed_sum / static_cast<double>(p);
                out.adx.v[t] = adx;
            }
        } else {
            adx = (adx * static_cast<double>(p - 1) + dx) / static_cast<double>(p);
            out.adx.v[t] = adx;
        }
        if (t >= 3 * p - 1) out.adxr.v[t] = (out.adx.v[t] + out.adx.v[t - p]) / 2.0;
    }
    return out;
}

struct AroonPair {
    Series up, down;
};

AroonPair calc_aroon(const BarSeries& bars, std::size_t p) {
    const std::size_t n = bars.size();
    AroonPair out{Series::blank(n, p), Series::blank(n, p)};
    for (std::size_t t = p; t < n; ++t) {
        std::size_t hi_idx = t - p, lo_idx = t - p;
        for (std::size_t i = t - p; i <= t; ++i) {
            if (bars[i].high >= bars[hi_idx].high) hi_idx = i; // most recent extreme wins ties
            if (bars[i].low <= bars[lo_idx].low) lo_idx = i;
        }
        out.up.v[t] = 100.0 * static_cast<double>(p - (t - hi_idx)) / static_cast<double>(p);
        out.down.v[t] = 100.0 * static_cast<double>(p - (t - lo_idx)) / static_cast<double>(p);
    }
    return out;
}

Series calc_bop(const BarSeries& bars) {
    const std::size_t n = bars.size();
    Series out = Series::blank(n, 0);
    for (std::size_t t = 0; t < n; ++t) {
        const double range = bars[t].high - bars[t].low;
        out.v[t] = range == 0.0 ? 0.0 : (bars[t].close - bars[t].open) / range;
    }
    return out;
}

Series calc_sar(const BarSeries& bars) {
    const std::size_t n = bars.size();
    Series out = Series::blank(n, 1);
    if (n < 2) return out;

    constexpr double kStep = 0.02;
    constexpr double kCap = 0.2;
    bool uptrend = bars[1].close >= bars[0].close;
    double sar = uptrend ? bars[0].low : bars[0].high;
    double ep = uptrend ? std::max(bars[0].high, bars[1].high)
                        : std::min(bars[0].low, bars[1].low);
    double af = kStep;
    out.v[1] = sar;

    for (std::size_t t = 2; t < n; ++t) {
        sar += af * (ep - sar);
        if (uptrend) {
            sar = std::min(sar, std::min(bars[t - 1].low, bars[t - 2].low));
            if (bars[t].low < sar) {
                uptrend = false;
                sar = ep;
                ep = bars[t].low;
                af = kStep;
            } else if (bars[t].high > ep) {
                ep = bars[t].high;
                af = std::min(af + kStep, kCap);
            }
        } else {
            sar = std::max(sar, std::max(bars[t - 1].high, bars[t - 2].high));
            if (bars[t].high > sar) {
                uptrend = true;
                sar = ep;
                ep = bars[t].high;
                af = kStep;
            } else if (bars[t].low < ep) {
                ep = bars[t].low;
                af = std::min(af + kStep, kCap);
            }
        }
        out.v[t] = sar;
    }
    return out;
}

Series calc_kama(const std::vector<double>& close, std::size_t p) {
    const std::size_t n = close.size();
    Series out = Series::blank(n, p);
    if (p >= n) return out;
    constexpr double kFast = 2.0 / 3.0;   // 2/(2+1)
    constexpr double kSlow = 2.0 / 31.0;  // 2/(30+1)
    double kama = close[p - 1];
    for (std::size_t t = p; t < n; ++t) {
        const double change = std::abs(close[t] - close[t - p]);
        double vol = 0.0;
        for (std::size_t i = t + 1 - p; i <= t; ++i) vol += std::abs(close[i] - close[i - 1]);
        const double er = vol == 0.0 ? 1.0 : change / vol;
        const double sc_root = er * (kFast - kSlow) + kSlow;
        const double sc = sc_root * sc_root;
        kama += sc * (close[t] - kama);
        out.v[t] = kama;
    }
    return out;
}

Series calc_trix(const std::vector<double>& close, std::size_t p) {
    const Series e1 = ema_of(from_values(close), p);
    const Series e2 = ema_of(e1, p);
    const Series e3 = ema_of(e2, p);
    const std::size_t n = close.size();
    Series out = Series::blank(n, e3.warmup + 1);
    for (std::size_t t = out.warmup; t < n; ++t)
        out.v[t] = 100.0 * (e3.v[t] / e3.v[t - 1] - 1.0);
    return out;
}

Series calc_ultosc(const BarSeries& bars) {
    const std::size_t n = bars.size();
    Series out = Series::blank(n, 28);
    if (out.warmup >= n) return out;
    std::vector<double> bp(n, 0.0), tr(n, 0.0);
    for (std::size_t t = 1; t < n; ++t) {
        const double true_low = std::min(bars[t].low, bars[t - 1].close);
        const double true_high = std::max(bars[t].high, bars[t - 1].close);
        bp[t] = bars[t].close - true_low;
        tr[t] = true_high - true_low;
    }
    auto avg = [&](std::size_t t, std::size_t p) {
        double sum_bp = 0.0, sum_tr = 0.0;
        for (std::size_t i = t + 1 - p; i <= t; ++i) {
            sum_bp += bp[i];
            sum_tr += tr[i];
        }
        return sum_tr == 0.0 ? 0.5 : sum_bp / sum_tr;
    };
    for (std::size_t t = 28; t < n; ++t)
        out.v[t] = 100.0 * (4.0 * avg(t, 7) + 2.0 * avg(t, 14) + avg(t, 28)) / 7.0;
    return out;
}

Series calc_rvi(const BarSeries& bars, std::size_t p) {
    const std::size_t n = bars.size();
    Series out = Series::blank(n, p + 2);
    if (out.warmup >= n) return out;
    std::vector<double> num(n, kNaN), den(n, kNaN);
    for (std::size_t t = 3; t < n; ++t) {
        auto swma = [&](auto field) {
            return (field(t) + 2.0 * field(t - 1) + 2.0 * field(t - 2) + field(t - 3)) / 6.0;
        };
        num[t] = swma([&](std::size_t i) { return bars[i].close - bars[i].open; });
        den[t] = swma([&](std::size_t i) { return bars[i].high - bars[i].low; });
    }
    for (std::size_t t = p + 2; t < n; ++t) {
        double sn = 0.0, sd = 0.0;
        for (std::size_t i = t + 1 - p; i <= t; ++i) {
            sn += num[i];
            sd += den[i];
        }
        out.v[t] = sd == 0.0 ? 0.0 : sn / sd;
    }
    return out;
}

Series calc_adosc(const BarSeries& bars) {
    const std::size_t n = bars.size();
    std::vector<double> ad(n, 0.0);
    double acc = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        const double range = bars[t].high - bars[t].low;
        const double clv =
            range == 0.0
                ? 0.0
                : ((bars[t].close - bars[t].low) - (bars[t].high - bars[t].close)) / range;
        acc += clv * bars[t].volume;
        ad[t] = acc;
    }
    const Series ad_series = from_values(ad);
    const Series fast = ema_of(ad_series, 3);
    const Series slow = ema_of(ad_series, 10);
    Series out = Series::blank(n, slow.warmup);
    for (std::size_t t = out.warmup; t < n; ++t) out.v[t] = fast.v[t] - slow.v[t];
    return out;
}

struct StochPair {
    Series k, d;
};

StochPair calc_stoch(const BarSeries& bars) {
    constexpr std::size_t kP = 14;
    constexpr std::size_t kD = 3;
    const std::size_t n = bars.size();
    StochPair out{Series::blank(n, kP - 1), Series::blank(n, kP + kD - 2)};
    for (std::size_t t = kP - 1; t < n; ++t) {
        double hh = -std::numeric_limits<double>::infinity();
        double ll = std::numeric_limits<double>::infinity();
        for (std::size_t i = t + 1 - kP; i <= t; ++i) {
            hh = std::max(hh, bars[i].high);
            ll = std::min(ll, bars[i].low);
        }
        out.k.v[t] = hh == ll ? 50.0 : 100.0 * (bars[t].close - ll) / (hh - ll);
    }
    for (std::size_t t = out.d.warmup; t < n; ++t)
        out.d.v[t] = (out.k.v[t] + out.k.v[t - 1] + out.k.v[t - 2]) / 3.0;
    return out;
}

struct MamaPair {
    Series mama, fama;
};

// Ehlers MESA adaptive moving average over the median price.
MamaPair calc_mama(const BarSeries& bars) {
    constexpr double kFastLimit = 0.5;
    constexpr double kSlowLimit = 0.05;
    constexpr std::size_t kWarmup = 32;
    const std::size_t n = bars.size();
    MamaPair out{Series::blank(n, kWarmup), Series::blank(n, kWarmup)};

    std::vector<double> price(n), smooth(n, 0.0), detrender(n, 0.0), i1(n, 0.0),
        q1(n, 0.0), i2(n, 0.0), q2(n, 0.0), re(n, 0.0), im(n, 0.0), period(n, 0.0),
        phase(n, 0.0), mama(n, 0.0), fama(n, 0.0);
    for (std::size_t t = 0; t < n; ++t) price[t] = (bars[t].high + bars[t].low) / 2.0;

    auto hilbert = [](const std::vector<double>& x, std::size_t t, double adj) {
        return (0.0962 * x[t] + 0.5769 * x[t - 2] - 0.5769 * x[t - 4] -
                0.0962 * x[t - 6]) *
               adj;
    };

    for (std::size_t t = 0; t < n; ++t) {
        if (t < 6) {
            smooth[t] = price[t];
            mama[t] = price[t];
            fama[t] = price[t];
            continue;
        }
        smooth[t] =
            (4.0 * price[t] + 3.0 * price[t - 1] + 2.0 * price[t - 2] + price[t - 3]) /
            10.0;
        const double adj = 0.075 * period[t - 1] + 0.54;
        detrender[t] = hilbert(smooth, t, adj);
        q1[t] = hilbert(detrender, t, adj);
        i1[t] = detrender[t - 3];
        const double j_i = hilbert(i1, t, adj);
        const double j_q = hilbert(q1, t, adj);
        i2[t] = 0.2 * (i1[t] - j_q) + 0.8 * i2[t - 1];
        q2[t] = 0.2 * (q1[t] + j_i) + 0.8 * q2[t - 1];
        re[t] = 0.2 * (i2[t] * i2[t - 1] + q2[t] * q2[t - 1]) + 0.8 * re[t - 1];
        im[t] = 0.2 * (i2[t] * q2[t - 1] - q2[t] * i2[t - 1]) + 0.8 * im[t - 1];

        double per = period[t - 1];
        if (im[t] != 0.0 && re[t] != 0.0) {
            const double angle = std::atan(im[t] / re[t]) * 180.0 / kPi;
            if (angle != 0.0) per = 360.0 / angle;
        }
        per = std::min(per, 1.5 * period[t - 1]);
        per = std::max(per, 0.67 * period[t - 1]);
        per = std::clamp(per, 6.0, 50.0);
        period[t] = 0.2 * per + 0.8 * period[t - 1];

        phase[t] = i1[t] != 0.0 ? std::atan(q1[t] / i1[t]) * 180.0 / kPi : phase[t - 1];
        double delta_phase = phase[t - 1] - phase[t];
        if (delta_phase < 1.0) delta_phase = 1.0;
        double alpha = kFastLimit / delta_phase;
        alpha = std::clamp(alpha, kSlowLimit, kFastLimit);
        mama[t] = alpha * price[t] + (1.0 - alpha) * mama[t - 1];
        fama[t] = 0.5 * alpha * mama[t] + (1.0 - 0.5 * alpha) * fama[t - 1];
    }
    for (std::size_t t = kWarmup; t < n; ++t) {
        out.mama.v[t] = mama[t];
        out.fama.v[t] = fama[t];
    }
    return out;
}

// ---- registry -------------------------------------------------------------

struct Entry {
    bool parametric;
    bool requires_volume;
    std::size_t outputs;
    std::function<std::vector<FeatureColumn>(const BarSeries&, std::size_t)> compute;
};

std::string suffixed(const std::string& base, std::size_t p) {
    return base + "_" + std::to_string(p);
}

const std::map<std::string, Entry>& registry() {
    static const std::map<std::string, Entry> table = [] {
        std::map<std::string, Entry> r;
        auto add = [&](const std::string& name, bool parametric, bool volume,
                       std::size_t outputs, auto fn) {
            r[name] = Entry{parametric, volume, outputs, fn};
        };

        add("sma", true, false, 1, [](const BarSeries& b, std::size_t p) {
            return std::vector<FeatureColumn>{
                to_column(suffixed("sma", p), sma_of(from_values(b.closes()), p))};
        });
        add("ema", true, false, 1, [](const BarSeries& b, std::size_t p) {
            return std::vector<FeatureColumn>{
                to_column(suffixed("ema", p), ema_of(from_values(b.closes()), p))};
        });
        add("wma", true, false, 1, [](const BarSeries& b, std::size_t p) {
            return std::vector<FeatureColumn>{
                to_column(suffixed("wma", p), wma_of(from_values(b.closes()), p))};
        });
        add("dema", true, false, 1, [](const BarSeries& b, std::size_t p) {
            const Series e1 = ema_of(from_values(b.closes()), p);
            const Series e2 = ema_of(e1, p);
            Series out = Series::blank(b.size(), e2.warmup);
            for (std::size_t t = out.warmup; t < b.size(); ++t)
                out.v[t] = 2.0 * e1.v[t] - e2.v[t];
            return std::vector<FeatureColumn>{to_column(suffixed("dema", p), out)};
        });
        add("tema", true, false, 1, [](const BarSeries& b, std::size_t p) {
            const Series e1 = ema_of(from_values(b.closes()), p);
            const Series e2 = ema_of(e1, p);
            const Series e3 = ema_of(e2, p);
            Series out = Series::blank(b.size(), e3.warmup);
            for (std::size_t t = out.warmup; t < b.size(); ++t)
                out.v[t] = 3.0 * e1.v[t] - 3.0 * e2.v[t] + e3.v[t];
            return std::vector<FeatureColumn>{to_column(suffixed("tema", p), out)};
        });
        add("trima", true, false, 1, [](const BarSeries& b, std::size_t p) {
            const Series close = from_values(b.closes());
            Series out;
            if (p % 2 == 1) {
                const std::size_t m = (p + 1) / 2;
                out = sma_of(sma_of(close, m), m);
            } else {
                const std::size_t m = p / 2;
                out = sma_of(sma_of(close, m), m + 1);
            }
            return std::vector<FeatureColumn>{to_column(suffixed("trima", p), out)};
        });
        add("kama", true, false, 1, [](const BarSeries& b, std::size_t p) {
            return std::vector<FeatureColumn>{
                to_column(suffixed("kama", p), calc_kama(b.closes(), p))};
        });
        add("momentum", true, false, 1, [](const BarSeries& b, std::size_t p) {
            return std::vector<FeatureColumn>{
                to_column(suffixed("momentum", p), calc_momentum(b.closes(), p))};
        });
        add("roc", true, false, 1, [](const BarSeries& b, std::size_t p) {
            return std::vector<FeatureColumn>{
                to_column(suffixed("roc", p), calc_roc(b.closes(), p))};
        });
        add("rsi", true, false, 1, [](const BarSeries& b, std::size_t p) {
            return std::vector<FeatureColumn>{
                to_column(suffixed("rsi", p), calc_rsi(b.closes(), p))};
        });
        add("willr", true, false, 1, [](const BarSeries& b, std::size_t p) {
            return std::vector<FeatureColumn>{
                to_column(suffixed("willr", p), calc_willr(b, p))};
        });
        add("bbands", true, false, 3, [](const BarSeries& b, std::size_t p) {
            const Bollinger bb = calc_bbands(b.closes(), p);
            return std::vector<FeatureColumn>{
                to_column(suffixed("bbands_upper", p), bb.upper),
                to_column(suffixed("bbands_middle", p), bb.middle),
                to_column(suffixed("bbands_lower", p), bb.lower)};
        });
        add("bbwidth", true, false, 1, [](const BarSeries& b, std::size_t p) {
            const Bollinger bb = calc_bbands(b.closes(), p);
            Series out = Series::blank(b.size(), bb.middle.warmup);
            for (std::size_t t = out.warmup; t < b.size(); ++t)
                out.v[t] = (bb.upper.v[t] - bb.lower.v[t]) / bb.middle.v[t];
            return std::vector<FeatureColumn>{to_column(suffixed("bbwidth", p), out)};
        });
        add("percent_b", true, false, 1, [](const BarSeries& b, std::size_t p) {
            const Bollinger bb = calc_bbands(b.closes(), p);
            const std::vector<double> close = b.closes();
            Series out = Series::blank(b.size(), bb.middle.warmup);
            for (std::size_t t = out.warmup; t < b.size(); ++t) {
                const double width = bb.upper.v[t] - bb.lower.v[t];
                out.v[t] = width == 0.0 ? 0.5 : (close[t] - bb.lower.v[t]) / width;
            }
            return std::vector<FeatureColumn>{to_column(suffixed("percent_b", p), out)};
        });
        add("cci", true, false, 1, [](const BarSeries& b, std::size_t p) {
            return std::vector<FeatureColumn>{to_column(suffixed("cci", p), calc_cci(b, p))};
        });
        add("cmo", true, false, 1, [](const BarSeries& b, std::size_t p) {
            return std::vector<FeatureColumn>{
                to_column(suffixed("cmo", p), calc_cmo(b.closes(), p))};
        });
        add("atr", true, false, 1, [](const BarSeries& b, std::size_t p) {
            return std::vector<FeatureColumn>{to_column(suffixed("atr", p), calc_atr(b, p))};
        });
        add("mfi", true, true, 1, [](const BarSeries& b, std::size_t p) {
            return std::vector<FeatureColumn>{to_column(suffixed("mfi", p), calc_mfi(b, p))};
        });
        add("adx", true, false, 1, [](const BarSeries& b, std::size_t p) {
            return std::vector<FeatureColumn>{
                to_column(suffixed("adx", p), calc_directional(b, p).adx)};
        });
        add("adxr", true, false, 1, [](const BarSeries& b, std::size_t p) {
            return std::vector<FeatureColumn>{
                to_column(suffixed("adxr", p), calc_directional(b, p).adxr)};
        });
        add("dx", true, false, 1, [](const BarSeries& b, std::size_t p) {
            return std::vector<FeatureColumn>{
                to_column(suffixed("dx", p), calc_directional(b, p).dx)};
        });
        add("plus_di", true, false, 1, [](const BarSeries& b, std::size_t p) {
            return std::vector<FeatureColumn>{
                to_column(suffixed("plus_di", p), calc_directional(b, p).plus_di)};
        });
        add("plus_dm", true, false, 1, [](const BarSeries& b, std::size_t p) {
            return std::vector<FeatureColumn>{
                to_column(suffixed("plus_dm", p), calc_directional(b, p).plus_dm_smooth)};
        });
        add("aroon", true, false, 2, [](const BarSeries& b, std::size_t p) {
            const AroonPair a = calc_aroon(b, p);
            return std::vector<FeatureColumn>{to_column(suffixed("aroon_up", p), a.up),
                                              to_column(suffixed("aroon_down", p), a.down)};
        });
        add("aroon_osc", true, false, 1, [](const BarSeries& b, std::size_t p) {
            const AroonPair a = calc_aroon(b, p);
            Series out = Series::blank(b.size(), a.up.warmup);
            for (std::size_t t = out.warmup; t < b.size(); ++t)
                out.v[t] = a.up.v[t] - a.down.v[t];
            return std::vector<FeatureColumn>{to_column(suffixed("aroon_osc", p), out)};
        });
        add("minmax", true, false, 2, [](const BarSeries& b, std::size_t p) {
            const std::vector<double> close = b.closes();
            Series mn = Series::blank(b.size(), p - 1);
            Series mx = Series::blank(b.size(), p - 1);
            for (std::size_t t = p - 1; t < b.size(); ++t) {
                double lo = close[t], hi = close[t];
                for (std::size_t i = t + 1 - p; i <= t; ++i) {
                    lo = std::min(lo, close[i]);
                    hi = std::max(hi, close[i]);
                }
                mn.v[t] = lo;
                mx.v[t] = hi;
            }
            return std::vector<FeatureColumn>{to_column(suffixed("min", p), mn),
                                              to_column(suffixed("max", p), mx)};
        });
        add("trix", true, false, 1, [](const BarSeries& b, std::size_t p) {
            return std::vector<FeatureColumn>{
                to_column(suffixed("trix", p), calc_trix(b.closes(), p))};
        });
        add("rvi", true, false, 1, [](const BarSeries& b, std::size_t p) {
            return std::vector<FeatureColumn>{to_column(suffixed("rvi", p), calc_rvi(b, p))};
        });

        // fixed-parameter indicators
        add("apo", false, false, 1, [](const BarSeries& b, std::size_t) {
            const Series close = from_values(b.closes());
            const Series fast = ema_of(close, 12);
            const Series slow = ema_of(close, 26);
            Series out = Series::blank(b.size(), slow.warmup);
            for (std::size_t t = out.warmup; t < b.size(); ++t)
                out.v[t] = fast.v[t] - slow.v[t];
            return std::vector<FeatureColumn>{to_column("apo", out)};
        });
        add("ppo", false, false, 1, [](const BarSeries& b, std::size_t) {
            const Series close = from_values(b.closes());
            const Series fast = ema_of(close, 12);
            const Series slow = ema_of(close, 26);
            Series out = Series::blank(b.size(), slow.warmup);
            for (std::size_t t = out.warmup; t < b.size(); ++t)
                out.v[t] = 100.0 * (fast.v[t] - slow.v[t]) / slow.v[t];
            return std::vector<FeatureColumn>{to_column("ppo", out)};
        });
        add("macd", false, false, 3, [](const BarSeries& b, std::size_t) {
            const Series close = from_values(b.closes());
            const Series fast = ema_of(close, 12);
            const Series slow = ema_of(close, 26);
            Series line = Series::blank(b.size(), slow.warmup);
            for (std::size_t t = line.warmup; t < b.size(); ++t)
                line.v[t] = fast.v[t] - slow.v[t];
            const Series signal = ema_of(line, 9);
            Series hist = Series::blank(b.size(), signal.warmup);
            for (std::size_t t = hist.warmup; t < b.size(); ++t)
                hist.v[t] = line.v[t] - signal.v[t];
            return std::vector<FeatureColumn>{to_column("macd", line),
                                              to_column("macd_signal", signal),
                                              to_column("macd_hist", hist)};
        });
        add("stoch", false, false, 2, [](const BarSeries& b, std::size_t) {
            const StochPair s = calc_stoch(b);
            return std::vector<FeatureColumn>{to_column("stoch_k", s.k),
                                              to_column("stoch_d", s.d)};
        });
        add("ultosc", false, false, 1, [](const BarSeries& b, std::size_t) {
            return std::vector<FeatureColumn>{to_column("ultosc", calc_ultosc(b))};
        });
        add("sar", false, false, 1, [](const BarSeries& b, std::size_t) {
            return std::vector<FeatureColumn>{to_column("sar", calc_sar(b))};
        });
        add("bop", false, false, 1, [](const BarSeries& b, std::size_t) {
            return std::vector<FeatureColumn>{to_column("bop", calc_bop(b))};
        });
        add("obv", false, true, 1, [](const BarSeries& b, std::size_t) {
            return std::vector<FeatureColumn>{to_column("obv", calc_obv(b))};
        });
        add("adosc", false, true, 1, [](const BarSeries& b, std::size_t) {
            return std::vector<FeatureColumn>{to_column("adosc", calc_adosc(b))};
        });
        add("mama", false, false, 2, [](const BarSeries& b, std::size_t) {
            const MamaPair m = calc_mama(b);
            return std::vector<FeatureColumn>{to_column("mama", m.mama),
                                              to_column("fama", m.fama)};
        });
        return r;
    }();
    return table;
}

} // namespace

std::vector<IndicatorInfo> indicator_registry() {
    std::vector<IndicatorInfo> out;
    for (const auto& [name, entry] : registry()) {
        out.push_back(IndicatorInfo{name, entry.parametric, entry.requires_volume,
                                    entry.outputs});
    }
    return out;
}

std::vector<FeatureColumn> compute_indicator(const IndicatorSpec& spec,
                                             const BarSeries& bars) {
    const auto it = registry().find(spec.name);
    if (it == registry().end())
        throw std::runtime_error("unknown indicator '" + spec.name + "'");
    const Entry& entry = it->second;

    std::size_t period = 0;
    for (const auto& [key, value] : spec.params) {
        if (key != "period")
            throw std::runtime_error("indicator '" + spec.name +
                                     "': unknown parameter '" + key + "'");
        if (!entry.parametric)
            throw std::runtime_error("indicator '" + spec.name +
                                     "' takes no period parameter");
        if (value < 1.0 || value != std::floor(value))
            throw std::runtime_error("indicator '" + spec.name +
                                     "': period must be a positive integer");
        period = static_cast<std::size_t>(value);
    }
    if (entry.parametric && period == 0)
        throw std::runtime_error("indicator '" + spec.name + "' requires a period");
    if (entry.requires_volume && !bars.has_volume())
        throw std::runtime_error("indicator '" + spec.name +
                                 "' requires a series with real volume");

    std::vector<FeatureColumn> cols = entry.compute(bars, period);
    for (const FeatureColumn& col : cols) {
        if (col.warmup >= bars.size())
            throw std::runtime_error("indicator '" + spec.name +
                                     "': period leaves no valid cell for series of length " +
                                     std::to_string(bars.size()));
    }
    return cols;
}

FeatureMatrix build_crossover_features(const std::vector<std::size_t>& fast_periods,
                                       const std::vector<std::size_t>& slow_periods,
                                       const BarSeries& bars) {
    if (fast_periods.empty() || slow_periods.empty())
        throw std::runtime_error("crossover period lists must be non-empty");
    const std::size_t max_fast = *std::max_element(fast_periods.begin(), fast_periods.end());
    const std::size_t min_slow = *std::min_element(slow_periods.begin(), slow_periods.end());
    if (max_fast >= min_slow)
        throw std::runtime_error("fast and slow period ranges overlap (" +
                                 std::to_string(max_fast) + " >= " +
                                 std::to_string(min_slow) + ")");

    const Series close = from_values(bars.closes());
    std::map<std::size_t, Series> sma_cache;
    auto sma_for = [&](std::size_t p) -> const Series& {
        auto cached = sma_cache.find(p);
        if (cached == sma_cache.end())
            cached = sma_cache.emplace(p, sma_of(close, p)).first;
        return cached->second;
    };

    std::vector<FeatureColumn> columns;
    for (const std::size_t fast : fast_periods) {
        for (const std::size_t slow : slow_periods) {
            const Series& f = sma_for(fast);
            const Series& s = sma_for(slow);
            FeatureColumn col;
            col.name = "xover_" + std::to_string(fast) + "_" + std::to_string(slow);
            col.warmup = slow - 1;
            if (col.warmup >= bars.size())
                throw std::runtime_error("slow period " + std::to_string(slow) +
                                         " leaves no valid cell");
            col.values.assign(bars.size(), kNaN);
            for (std::size_t t = col.warmup; t < bars.size(); ++t)
                col.values[t] = f.v[t] - s.v[t];
            columns.push_back(std::move(col));
        }
    }
    return FeatureMatrix(bars.dates(), std::move(columns));
}

FeatureMatrix build_indicator_matrix(const std::vector<IndicatorSpec>& manifest,
                                     const BarSeries& bars, bool include_price_volume) {
    if (manifest.empty()) throw std::runtime_error("empty indicator manifest");
    std::vector<FeatureColumn> columns;
    for (const IndicatorSpec& spec : manifest) {
        for (FeatureColumn& col : compute_indicator(spec, bars))
            columns.push_back(std::move(col));
    }
    if (include_price_volume) {
        FeatureColumn adj{"adj_close", bars.adjusted_closes(), 0};
        FeatureColumn vol{"volume", bars.volumes(), 0};
        columns.push_back(std::move(adj));
        columns.push_back(std::move(vol));
    }
    return FeatureMatrix(bars.dates(), std::move(columns));
}

std::vector<IndicatorSpec> default_manifest() {
    static const std::vector<std::size_t> periods = {3, 14, 30};
    std::vector<IndicatorSpec> manifest;
    for (const auto& [name, entry] : registry()) {
        if (entry.parametric) {
            for (const std::size_t p : periods)
                manifest.push_back(IndicatorSpec::with_period(name, p));
        } else {
            manifest.push_back(IndicatorSpec::plain(name));
        }
    }
    return manifest;
}

std::size_t default_manifest_column_count() {
    std::size_t count = 2; // adjusted close + volume
    for (const auto& [name, entry] : registry())
        count += entry.outputs * (entry.parametric ? 3 : 1);
    return count;
}

std::vector<IndicatorSpec> parse_manifest(const std::string& text) {
    std::vector<IndicatorSpec> manifest;
    std::istringstream stream(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(stream, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        // trim
        const auto begin = line.find_first_not_of(" \t\r");
        if (begin == std::string::npos) continue;
        const auto end = line.find_last_not_of(" \t\r");
        line = line.substr(begin, end - begin + 1);

        auto fail = [&](const std::string& what) {
            throw std::runtime_error("manifest line " + std::to_string(line_no) + ": " +
                                     what);
        };

        IndicatorSpec spec;
        const auto paren = line.find('(');
        if (paren == std::string::npos) {
            spec.name = line;
        } else {
            if (line.back() != ')') fail("missing closing parenthesis");
            spec.name = line.substr(0, paren);
            std::string args = line.substr(paren + 1, line.size() - paren - 2);
            std::stringstream arg_stream(args);
            std::string arg;
            while (std::getline(arg_stream, arg, ',')) {
                const auto eq = arg.find('=');
                if (eq == std::string::npos) fail("expected param=value in '" + arg + "'");
                const std::string key = arg.substr(0, eq);
                try {
                    spec.params[key] = std::stod(arg.substr(eq + 1));
                } catch (const std::exception&) {
                    fail("malformed value in '" + arg + "'");
                }
            }
        }
        if (spec.name.empty()) fail("empty indicator name");
        manifest.push_back(std::move(spec));
    }
    return manifest;
}

Dataset drop_warmup(const FeatureMatrix& features, const LabelSeries& labels) {
    if (features.row_count() != labels.size())
        throw std::runtime_error("features and labels are not aligned");
    const std::size_t first_dense = features.max_warmup();

    std::vector<std::size_t> keep;
    for (std::size_t t = first_dense; t < features.row_count(); ++t) {
        if (labels.labels[t] != Label::unknown) keep.push_back(t);
    }
    if (keep.empty()) throw std::runtime_error("no rows survive warmup and labeling");

    Dataset out;
    out.feature_names = features.names();
    out.x = Matrix(keep.size(), features.col_count());
    out.labels.reserve(keep.size());
    out.eligible.reserve(keep.size());
    out.dates.reserve(keep.size());
    for (std::size_t i = 0; i < keep.size(); ++i) {
        const std::size_t t = keep[i];
        for (std::size_t j = 0; j < features.col_count(); ++j) out.x(i, j) = features.at(t, j);
        out.labels.push_back(label_value(labels.labels[t]));
        out.eligible.push_back(labels.eligible[t]);
        out.dates.push_back(features.timestamps()[t]);
    }
    return out;
}

} // namespace trendlab
