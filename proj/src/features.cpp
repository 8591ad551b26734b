#include "trendlab/features.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <set>
#include <stdexcept>

namespace trendlab {

FeatureMatrix::FeatureMatrix(std::vector<Date> timestamps,
                             std::vector<FeatureColumn> columns)
    : timestamps_(std::move(timestamps)) {
    if (columns.empty()) throw std::runtime_error("FeatureMatrix needs at least one column");
    const std::size_t rows = timestamps_.size();

    std::set<std::string> seen;
    for (const FeatureColumn& col : columns) {
        if (col.values.size() != rows)
            throw std::runtime_error("column '" + col.name + "' length " +
                                     std::to_string(col.values.size()) +
                                     " does not match " + std::to_string(rows) +
                                     " timestamps");
        if (col.warmup > rows)
            throw std::runtime_error("column '" + col.name + "' warmup exceeds length");
        if (!seen.insert(col.name).second)
            throw std::runtime_error("duplicate feature column '" + col.name + "'");
        for (std::size_t t = col.warmup; t < rows; ++t) {
            if (!std::isfinite(col.values[t]))
                throw std::runtime_error("column '" + col.name +
                                         "' has a non-finite value at valid row " +
                                         std::to_string(t));
        }
    }

    values_ = Matrix(rows, columns.size());
    names_.reserve(columns.size());
    warmups_.reserve(columns.size());
    for (std::size_t j = 0; j < columns.size(); ++j) {
        names_.push_back(columns[j].name);
        warmups_.push_back(columns[j].warmup);
        for (std::size_t t = 0; t < rows; ++t) {
            values_(t, j) = t >= columns[j].warmup
                                ? columns[j].values[t]
                                : std::numeric_limits<double>::quiet_NaN();
        }
    }
}

std::size_t FeatureMatrix::max_warmup() const {
    return *std::max_element(warmups_.begin(), warmups_.end());
}

std::size_t FeatureMatrix::column_index(const std::string& name) const {
    const auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end()) throw std::runtime_error("unknown feature column '" + name + "'");
    return static_cast<std::size_t>(it - names_.begin());
}

void FeatureMatrix::write_csv(std::ostream& out) const {
    out << "date";
    for (const std::string& name : names_) out << ',' << name;
    out << '\n';
    out.precision(17);
    for (std::size_t t = 0; t < row_count(); ++t) {
        out << timestamps_[t].to_string();
        for (std::size_t j = 0; j < col_count(); ++j) {
            out << ',';
            if (valid(t, j))
                out << values_(t, j);
            else
                out << "NaN";
        }
        out << '\n';
    }
}

FeatureMatrix concat_features(const std::vector<FeatureMatrix>& parts) {
    if (parts.empty()) throw std::runtime_error("nothing to concatenate");
    std::vector<FeatureColumn> columns;
    for (const FeatureMatrix& part : parts) {
        if (part.timestamps() != parts.front().timestamps())
            throw std::runtime_error("feature matrices are not aligned");
        for (std::size_t j = 0; j < part.col_count(); ++j) {
            FeatureColumn col;
            col.name = part.names()[j];
            col.warmup = part.warmups()[j];
            col.values.resize(part.row_count());
            for (std::size_t t = 0; t < part.row_count(); ++t)
                col.values[t] = part.at(t, j);
            columns.push_back(std::move(col));
        }
    }
    return FeatureMatrix(parts.front().timestamps(), std::move(columns));
}

} // namespace trendlab
