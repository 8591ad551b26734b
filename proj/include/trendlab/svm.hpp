#pragma once

#include <string>
#include <vector>

#include "trendlab/core.hpp"

namespace trendlab {

enum class SvmKernel { linear, rbf };

SvmKernel svm_kernel_from_string(const std::string& name);
std::string to_string(SvmKernel kernel);

struct SvmParams {
    SvmKernel kernel = SvmKernel::rbf;
    double c = 1.0;
    double gamma = -1.0;     // < 0 means 1/feature_count at training time
    double tolerance = 1e-3;
    std::size_t max_iterations = 200000;
};

/// Soft-margin binary SVM trained by sequential minimal optimization with
/// maximal-violating-pair working-set selection (lowest index breaks ties,
/// so training is deterministic).
struct SvmModel {
    SvmKernel kernel = SvmKernel::rbf;
    double c = 1.0;
    double gamma = 1.0;
    double bias = 0.0;
    Matrix support_vectors;              // one row per support vector
    std::vector<double> coefficients;    // alpha_i * y_i
    std::vector<std::size_t> support_indices; // rows of the training matrix
    double kkt_residual = 0.0;           // final violating-pair gap
    std::size_t iterations = 0;

    std::string to_json() const;
    static SvmModel from_json(const std::string& text);
};

double kernel_value(SvmKernel kernel, double gamma, const double* u, const double* v,
                    std::size_t dim);

/// Labels must be +1/-1 with at least one example of each class.
SvmModel train_svm(const Matrix& x, const std::vector<int>& y, const SvmParams& params);

double decision_function(const SvmModel& model, const double* row, std::size_t dim);
double decision_function(const SvmModel& model, const std::vector<double>& row);

/// sign of the decision function; exact zero maps to +1.
std::vector<int> predict(const SvmModel& model, const Matrix& x);

} // namespace trendlab
