#include "trendlab/scaling.hpp"

#include <algorithm>
#include <stdexcept>

#include <json.hpp>

namespace trendlab {

ScalerKind scaler_kind_from_string(const std::string& name) {
    if (name == "minmax") return ScalerKind::minmax;
    if (name == "ecdf") return ScalerKind::ecdf;
    throw std::runtime_error("unknown scaler kind '" + name + "'");
}

std::string to_string(ScalerKind kind) {
    return kind == ScalerKind::minmax ? "minmax" : "ecdf";
}

ScalerModel ScalerModel::fit(ScalerKind kind, const Matrix& train,
                             const std::vector<std::string>& names) {
    if (names.size() != train.cols)
        throw std::runtime_error("column name count does not match matrix width");
    if (train.rows == 0) throw std::runtime_error("cannot fit a scaler on zero rows");

    ScalerModel model;
    model.kind_ = kind;
    model.names_ = names;
    if (kind == ScalerKind::minmax) {
        model.min_.resize(train.cols);
        model.max_.resize(train.cols);
        for (std::size_t j = 0; j < train.cols; ++j) {
            double lo = train(0, j), hi = train(0, j);
            for (std::size_t t = 1; t < train.rows; ++t) {
                lo = std::min(lo, train(t, j));
                hi = std::max(hi, train(t, j));
            }
            model.min_[j] = lo;
            model.max_[j] = hi;
        }
    } else {
        model.samples_.resize(train.cols);
        for (std::size_t j = 0; j < train.cols; ++j) {
            std::vector<double>& sample = model.samples_[j];
            sample.resize(train.rows);
            for (std::size_t t = 0; t < train.rows; ++t) sample[t] = train(t, j);
            std::sort(sample.begin(), sample.end());
        }
    }
    return model;
}

double ScalerModel::apply_one(std::size_t column, double value) const {
    if (kind_ == ScalerKind::minmax) {
        const double lo = min_[column];
        const double hi = max_[column];
        if (lo == hi) return 0.5;
        return std::clamp((value - lo) / (hi - lo), 0.0, 1.0);
    }
    const std::vector<double>& sample = samples_[column];
    const auto at_most = std::upper_bound(sample.begin(), sample.end(), value);
    return static_cast<double>(at_most - sample.begin()) /
           static_cast<double>(sample.size());
}

Matrix ScalerModel::apply(const Matrix& x, const std::vector<std::string>& names) const {
    if (names != names_)
        throw std::runtime_error("scaler applied to columns it was not fitted on");
    if (x.cols != names_.size()) throw std::runtime_error("matrix width mismatch");
    Matrix out(x.rows, x.cols);
    for (std::size_t j = 0; j < x.cols; ++j)
        for (std::size_t t = 0; t < x.rows; ++t) out(t, j) = apply_one(j, x(t, j));
    return out;
}

std::string ScalerModel::to_json() const {
    nlohmann::json doc;
    doc["kind"] = to_string(kind_);
    doc["format_version"] = 1;
    nlohmann::json columns = nlohmann::json::object();
    for (std::size_t j = 0; j < names_.size(); ++j) {
        if (kind_ == ScalerKind::minmax)
            columns[names_[j]] = {{"min", min_[j]}, {"max", max_[j]}};
        else
            columns[names_[j]] = {{"sample", samples_[j]}};
    }
    doc["columns"] = columns;
    // column order is part of the contract
    doc["column_order"] = names_;
    return doc.dump(2);
}

ScalerModel ScalerModel::from_json(const std::string& text) {
    const nlohmann::json doc = nlohmann::json::parse(text);
    ScalerModel model;
    model.kind_ = scaler_kind_from_string(doc.at("kind").get<std::string>());
    model.names_ = doc.at("column_order").get<std::vector<std::string>>();
    for (const std::string& name : model.names_) {
        const nlohmann::json& state = doc.at("columns").at(name);
        if (model.kind_ == ScalerKind::minmax) {
            model.min_.push_back(state.at("min").get<double>());
            model.max_.push_back(state.at("max").get<double>());
        } else {
            model.samples_.push_back(state.at("sample").get<std::vector<double>>());
        }
    }
    return model;
}

} // namespace trendlab
