#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "trendlab/core.hpp"

namespace trendlab {

/// One named feature series aligned to a bar series. Entries before `warmup`
/// are undefined (stored as NaN); entries from `warmup` on must be finite.
struct FeatureColumn {
    std::string name;
    std::vector<double> values;
    std::size_t warmup = 0;
};

/// Column-aligned feature table with monotone warmup masks: column j is
/// invalid on rows [0, warmup[j]) and valid (finite) from warmup[j] on.
class FeatureMatrix {
public:
    FeatureMatrix(std::vector<Date> timestamps, std::vector<FeatureColumn> columns);

    std::size_t row_count() const { return timestamps_.size(); }
    std::size_t col_count() const { return names_.size(); }

    const std::vector<std::string>& names() const { return names_; }
    const std::vector<Date>& timestamps() const { return timestamps_; }
    const Matrix& values() const { return values_; }
    const std::vector<std::size_t>& warmups() const { return warmups_; }

    double at(std::size_t row, std::size_t col) const { return values_(row, col); }
    bool valid(std::size_t row, std::size_t col) const { return row >= warmups_[col]; }

    /// First row where every column is valid.
    std::size_t max_warmup() const;

    std::size_t column_index(const std::string& name) const;

    /// CSV with a leading date column; invalid cells render as `NaN`.
    void write_csv(std::ostream& out) const;

private:
    std::vector<std::string> names_;
    std::vector<Date> timestamps_;
    Matrix values_;
    std::vector<std::size_t> warmups_;
};

/// Concatenates the columns of several matrices sharing identical timestamps.
FeatureMatrix concat_features(const std::vector<FeatureMatrix>& parts);

} // namespace trendlab
