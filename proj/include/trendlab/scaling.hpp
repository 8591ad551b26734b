#pragma once

#include <string>
#include <vector>

#include "trendlab/core.hpp"

namespace trendlab {

enum class ScalerKind { minmax, ecdf };

ScalerKind scaler_kind_from_string(const std::string& name);
std::string to_string(ScalerKind kind);

/// Per-column map to [0,1], fitted on training rows.
///   minmax  x -> (x - min) / (max - min), clamped; degenerate column -> 0.5
///   ecdf    x -> |{fitted <= x}| / N  (right-continuous, ties share the
///           highest rank)
class ScalerModel {
public:
    static ScalerModel fit(ScalerKind kind, const Matrix& train,
                           const std::vector<std::string>& names);

    /// Columns of `x` must match the fitted names. Output lies in [0,1].
    Matrix apply(const Matrix& x, const std::vector<std::string>& names) const;

    double apply_one(std::size_t column, double value) const;

    ScalerKind kind() const { return kind_; }
    const std::vector<std::string>& columns() const { return names_; }

    std::string to_json() const;
    static ScalerModel from_json(const std::string& text);

    friend bool operator==(const ScalerModel& a, const ScalerModel& b) {
        return a.kind_ == b.kind_ && a.names_ == b.names_ && a.min_ == b.min_ &&
               a.max_ == b.max_ && a.samples_ == b.samples_;
    }

private:
    ScalerKind kind_ = ScalerKind::minmax;
    std::vector<std::string> names_;
    std::vector<double> min_, max_;              // minmax state
    std::vector<std::vector<double>> samples_;   // ecdf state, sorted ascending
};

} // namespace trendlab
