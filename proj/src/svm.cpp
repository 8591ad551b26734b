#include "trendlab/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <json.hpp>

namespace trendlab {

namespace {

constexpr double kTau = 1e-12;

// Full kernel matrix cache, used up to this many rows (~50 MB at 2500).
constexpr std::size_t kFullCacheLimit = 2500;

class KernelTable {
public:
    KernelTable(const Matrix& x, SvmKernel kernel, double gamma)
        : x_(x), kernel_(kernel), gamma_(gamma) {
        if (x.rows <= kFullCacheLimit) {
            full_.assign(x.rows * x.rows, 0.0);
            for (std::size_t i = 0; i < x.rows; ++i) {
                for (std::size_t j = i; j < x.rows; ++j) {
                    const double k = kernel_value(kernel_, gamma_, x_.row_ptr(i),
                                                  x_.row_ptr(j), x_.cols);
                    full_[i * x.rows + j] = k;
                    full_[j * x.rows + i] = k;
                }
            }
        }
    }

    double at(std::size_t i, std::size_t j) const {
        if (!full_.empty()) return full_[i * x_.rows + j];
        return kernel_value(kernel_, gamma_, x_.row_ptr(i), x_.row_ptr(j), x_.cols);
    }

private:
    const Matrix& x_;
    SvmKernel kernel_;
    double gamma_;
    std::vector<double> full_;
};

} // namespace

SvmKernel svm_kernel_from_string(const std::string& name) {
    if (name == "linear") return SvmKernel::linear;
    if (name == "rbf") return SvmKernel::rbf;
    throw std::runtime_error("unknown kernel '" + name + "'");
}

std::string to_string(SvmKernel kernel) {
    return kernel == SvmKernel::linear ? "linear" : "rbf";
}

double kernel_value(SvmKernel kernel, double gamma, const double* u, const double* v,
                    std::size_t dim) {
    if (kernel == SvmKernel::linear) {
        double dot = 0.0;
        for (std::size_t i = 0; i < dim; ++i) dot += u[i] * v[i];
        return dot;
    }
    double dist2 = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
        const double d = u[i] - v[i];
        dist2 += d * d;
    }
    return std::exp(-gamma * dist2);
}

SvmModel train_svm(const Matrix& x, const std::vector<int>& y, const SvmParams& params) {
    const std::size_t rows = x.rows;
    if (rows == 0 || y.size() != rows)
        throw std::runtime_error("training data and labels misaligned");
    if (params.c <= 0.0) throw std::runtime_error("C must be positive");
    if (params.tolerance <= 0.0) throw std::runtime_error("tolerance must be positive");
    bool has_pos = false, has_neg = false;
    for (const int label : y) {
        if (label == 1)
            has_pos = true;
        else if (label == -1)
            has_neg = true;
        else
            throw std::runtime_error("labels must be +1 or -1");
    }
    if (!has_pos || !has_neg)
        throw std::runtime_error("training data contains a single class");
    for (const double v : x.data) {
        if (!std::isfinite(v)) throw std::runtime_error("non-finite feature value");
    }

    const double gamma = params.gamma >= 0.0
                             ? params.gamma
                             : 1.0 / static_cast<double>(std::max<std::size_t>(1, x.cols));
    const double c = params.c;
    KernelTable kernels(x, params.kernel, gamma);
    auto q = [&](std::size_t i, std::size_t j) {
        return static_cast<double>(y[i] * y[j]) * kernels.at(i, j);
    };

    // dual: minimize 1/2 a'Qa - e'a  with 0 <= a <= C, y'a = 0
    std::vector<double> alpha(rows, 0.0);
    std::vector<double> grad(rows, -1.0);

    auto in_up = [&](std::size_t t) {
        return (y[t] == 1 && alpha[t] < c) || (y[t] == -1 && alpha[t] > 0.0);
    };
    auto in_low = [&](std::size_t t) {
        return (y[t] == 1 && alpha[t] > 0.0) || (y[t] == -1 && alpha[t] < c);
    };

    double residual = std::numeric_limits<double>::infinity();
    std::size_t iter = 0;
    for (; iter < params.max_iterations; ++iter) {
        // maximal violating pair, lowest index on ties
        std::size_t i = rows, j = rows;
        double m_up = -std::numeric_limits<double>::infinity();
        double m_low = std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t < rows; ++t) {
            const double v = -static_cast<double>(y[t]) * grad[t];
            if (in_up(t) && v > m_up) {
                m_up = v;
                i = t;
            }
            if (in_low(t) && v < m_low) {
                m_low = v;
                j = t;
            }
        }
        residual = m_up - m_low;
        if (i == rows || j == rows || residual <= params.tolerance) break;

        const double old_ai = alpha[i];
        const double old_aj = alpha[j];
        if (y[i] != y[j]) {
            double quad = q(i, i) + q(j, j) + 2.0 * q(i, j);
            if (quad <= 0.0) quad = kTau;
            const double delta = (-grad[i] - grad[j]) / quad;
            const double diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if (diff > 0.0 && alpha[j] < 0.0) {
                alpha[j] = 0.0;
                alpha[i] = diff;
            } else if (diff <= 0.0 && alpha[i] < 0.0) {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if (diff > 0.0) {
                if (alpha[i] > c) {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else {
                if (alpha[j] > c) {
                    alpha[j] = c;
                    alpha[i] = c + diff;
                }
            }
        } else {
            double quad = q(i, i) + q(j, j) - 2.0 * q(i, j);
            if (quad <= 0.0) quad = kTau;
            const double delta = (grad[i] - grad[j]) / quad;
            const double sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if (alpha[i] > c) {
                alpha[i] = c;
                alpha[j] = sum - c;
            } else if (alpha[j] > c) {
                alpha[j] = c;
                alpha[i] = sum - c;
            }
            if (alpha[i] < 0.0) {
                alpha[i] = 0.0;
                alpha[j] = sum;
            } else if (alpha[j] < 0.0) {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
        }

        const double delta_i = alpha[i] - old_ai;
        const double delta_j = alpha[j] - old_aj;
        if (delta_i == 0.0 && delta_j == 0.0) break; // numerically stuck
        for (std::size_t t = 0; t < rows; ++t)
            grad[t] += q(t, i) * delta_i + q(t, j) * delta_j;
    }

    // bias from the final violating-pair bracket
    double m_up = -std::numeric_limits<double>::infinity();
    double m_low = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < rows; ++t) {
        const double v = -static_cast<double>(y[t]) * grad[t];
        if (in_up(t)) m_up = std::max(m_up, v);
        if (in_low(t)) m_low = std::min(m_low, v);
    }

    SvmModel model;
    model.kernel = params.kernel;
    model.c = c;
    model.gamma = gamma;
    model.bias = (m_up + m_low) / 2.0;
    model.kkt_residual = m_up - m_low;
    model.iterations = iter;

    std::vector<std::size_t> sv;
    for (std::size_t t = 0; t < rows; ++t)
        if (alpha[t] > 0.0) sv.push_back(t);
    model.support_vectors = Matrix(sv.size(), x.cols);
    model.coefficients.resize(sv.size());
    model.support_indices = sv;
    for (std::size_t s = 0; s < sv.size(); ++s) {
        const double* src = x.row_ptr(sv[s]);
        std::copy(src, src + x.cols, model.support_vectors.row_ptr(s));
        model.coefficients[s] = alpha[sv[s]] * static_cast<double>(y[sv[s]]);
    }
    return model;
}

double decision_function(const SvmModel& model, const double* row, std::size_t dim) {
    if (dim != model.support_vectors.cols)
        throw std::runtime_error("feature width does not match the trained model");
    double sum = model.bias;
    for (std::size_t s = 0; s < model.support_vectors.rows; ++s) {
        sum += model.coefficients[s] *
               kernel_value(model.kernel, model.gamma, model.support_vectors.row_ptr(s),
                            row, dim);
    }
    return sum;
}

double decision_function(const SvmModel& model, const std::vector<double>& row) {
    return decision_function(model, row.data(), row.size());
}

std::vector<int> predict(const SvmModel& model, const Matrix& x) {
    std::vector<int> labels(x.rows);
    for (std::size_t r = 0; r < x.rows; ++r)
        labels[r] = decision_function(model, x.row_ptr(r), x.cols) >= 0.0 ? 1 : -1;
    return labels;
}

std::string SvmModel::to_json() const {
    nlohmann::json doc;
    doc["format_version"] = 1;
    doc["kernel"] = to_string(kernel);
    doc["C"] = c;
    doc["gamma"] = gamma;
    doc["bias"] = bias;
    doc["support_vectors"] = support_vectors.data;
    doc["support_vector_dim"] = support_vectors.cols;
    doc["dual_coefficients"] = coefficients;
    return doc.dump(2);
}

SvmModel SvmModel::from_json(const std::string& text) {
    const nlohmann::json doc = nlohmann::json::parse(text);
    SvmModel model;
    model.kernel = svm_kernel_from_string(doc.at("kernel").get<std::string>());
    model.c = doc.at("C").get<double>();
    model.gamma = doc.at("gamma").get<double>();
    model.bias = doc.at("bias").get<double>();
    model.coefficients = doc.at("dual_coefficients").get<std::vector<double>>();
    const auto dim = doc.at("support_vector_dim").get<std::size_t>();
    const auto flat = doc.at("support_vectors").get<std::vector<double>>();
    if (dim == 0 || flat.size() % dim != 0)
        throw std::runtime_error("malformed support vector array");
    model.support_vectors = Matrix(flat.size() / dim, dim);
    model.support_vectors.data = flat;
    if (model.coefficients.size() != model.support_vectors.rows)
        throw std::runtime_error("coefficient count mismatch");
    return model;
}

} // namespace trendlab
