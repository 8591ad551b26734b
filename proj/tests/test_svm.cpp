#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "trendlab/core.hpp"
#include "trendlab/svm.hpp"

using namespace trendlab;

namespace {

Matrix rows_from(const std::vector<std::vector<double>>& rows) {
    Matrix m(rows.size(), rows.front().size());
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < rows[r].size(); ++c) m(r, c) = rows[r][c];
    return m;
}

// KKT violating-pair gap recomputed from the trained model alone
double recomputed_residual(const SvmModel& model, const Matrix& x,
                           const std::vector<int>& y) {
    std::vector<double> alpha(x.rows, 0.0);
    for (std::size_t s = 0; s < model.support_indices.size(); ++s)
        alpha[model.support_indices[s]] = std::abs(model.coefficients[s]);

    double m_up = -1e300, m_low = 1e300;
    for (std::size_t t = 0; t < x.rows; ++t) {
        const double raw = decision_function(model, x.row_ptr(t), x.cols) - model.bias;
        const double v = static_cast<double>(y[t]) - raw;
        const bool up = (y[t] == 1 && alpha[t] < model.c) || (y[t] == -1 && alpha[t] > 0.0);
        const bool low = (y[t] == 1 && alpha[t] > 0.0) || (y[t] == -1 && alpha[t] < model.c);
        if (up) m_up = std::max(m_up, v);
        if (low) m_low = std::min(m_low, v);
    }
    return m_up - m_low;
}

double training_accuracy(const SvmModel& model, const Matrix& x,
                         const std::vector<int>& y) {
    const std::vector<int> predicted = predict(model, x);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < y.size(); ++i)
        if (predicted[i] == y[i]) ++hits;
    return static_cast<double>(hits) / static_cast<double>(y.size());
}

} // namespace

TEST_CASE("two separable points, linear kernel: max-margin line recovered") {
    const Matrix x = rows_from({{0, 0}, {1, 1}});
    const std::vector<int> y = {-1, 1};
    SvmParams params;
    params.kernel = SvmKernel::linear;
    params.c = 1e6;
    params.tolerance = 1e-6;
    const SvmModel model = train_svm(x, y, params);

    CHECK(training_accuracy(model, x, y) == doctest::Approx(1.0));
    // closed form: f(x) = x1 + x2 - 1
    CHECK(decision_function(model, {0.0, 0.0}) == doctest::Approx(-1.0).epsilon(1e-3));
    CHECK(decision_function(model, {1.0, 1.0}) == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(decision_function(model, {0.5, 0.5}) == doctest::Approx(0.0).epsilon(1e-3));
    CHECK(recomputed_residual(model, x, y) <= 1e-6 + 1e-12);
}

TEST_CASE("xor is separable with the rbf kernel") {
    const Matrix x = rows_from({{0, 0}, {0, 1}, {1, 0}, {1, 1}});
    const std::vector<int> y = {-1, 1, 1, -1};
    SvmParams params;
    params.kernel = SvmKernel::rbf;
    params.gamma = 1.0;
    params.c = 10.0;
    const SvmModel model = train_svm(x, y, params);
    CHECK(training_accuracy(model, x, y) == doctest::Approx(1.0));
    CHECK(recomputed_residual(model, x, y) <= params.tolerance + 1e-12);
}

TEST_CASE("one-dimensional linear closed form") {
    const Matrix x = rows_from({{1.0}, {3.0}});
    const std::vector<int> y = {1, -1};
    SvmParams params;
    params.kernel = SvmKernel::linear;
    params.c = 1e6;
    params.tolerance = 1e-6;
    const SvmModel model = train_svm(x, y, params);
    // max margin: f(x) = -(x - 2)
    CHECK(decision_function(model, {1.0}) == doctest::Approx(1.0).epsilon(5e-3));
    CHECK(decision_function(model, {3.0}) == doctest::Approx(-1.0).epsilon(5e-3));
    CHECK(decision_function(model, {2.0}) == doctest::Approx(0.0).epsilon(5e-3));
}

TEST_CASE("duplicated training set leaves the decision function unchanged") {
    const Matrix x = rows_from({{0, 0}, {1, 1}});
    const std::vector<int> y = {-1, 1};
    const Matrix x2 = rows_from({{0, 0}, {1, 1}, {0, 0}, {1, 1}});
    const std::vector<int> y2 = {-1, 1, -1, 1};
    SvmParams params;
    params.kernel = SvmKernel::linear;
    params.c = 100.0;
    params.tolerance = 1e-6;
    const SvmModel a = train_svm(x, y, params);
    const SvmModel b = train_svm(x2, y2, params);
    for (double p0 = -0.5; p0 <= 1.5; p0 += 0.25)
        for (double p1 = -0.5; p1 <= 1.5; p1 += 0.25)
            CHECK(decision_function(a, {p0, p1}) ==
                  doctest::Approx(decision_function(b, {p0, p1})).epsilon(2e-3));
}

TEST_CASE("kernel function properties") {
    const std::vector<double> u = {0.3, -0.7, 2.0};
    const std::vector<double> v = {1.0, 0.0, -1.0};
    CHECK(kernel_value(SvmKernel::rbf, 0.5, u.data(), u.data(), 3) == doctest::Approx(1.0));
    CHECK(kernel_value(SvmKernel::rbf, 0.0, u.data(), v.data(), 3) == doctest::Approx(1.0));
    CHECK(kernel_value(SvmKernel::linear, 0.0, u.data(), v.data(), 3) ==
          doctest::Approx(0.3 * 1.0 + 0.0 + 2.0 * -1.0));
}

TEST_CASE("documented tie rule: a zero decision value predicts +1") {
    SvmModel model;
    model.kernel = SvmKernel::rbf;
    model.gamma = 1.0;
    model.c = 1.0;
    model.bias = 0.0;
    model.support_vectors = rows_from({{-1.0}, {1.0}});
    model.coefficients = {-1.0, 1.0};
    const Matrix probe = rows_from({{0.0}});
    CHECK(decision_function(model, {0.0}) == 0.0);
    CHECK(predict(model, probe)[0] == 1);
}

TEST_CASE("prediction equals the sign of the decision function") {
    Rng rng(8);
    Matrix x(40, 3);
    std::vector<int> y(40);
    for (std::size_t r = 0; r < x.rows; ++r) {
        for (std::size_t c = 0; c < 3; ++c) x(r, c) = rng.gaussian();
        y[r] = x(r, 0) + 0.3 * rng.gaussian() > 0 ? 1 : -1;
    }
    const SvmModel model = train_svm(x, y, SvmParams{});
    Matrix probes(20, 3);
    for (double& v : probes.data) v = rng.gaussian();
    const std::vector<int> labels = predict(model, probes);
    for (std::size_t r = 0; r < probes.rows; ++r) {
        const double f = decision_function(model, probes.row_ptr(r), 3);
        CHECK(labels[r] == (f >= 0.0 ? 1 : -1));
    }
}

TEST_CASE("kkt residual within tolerance on noisy data") {
    Rng rng(21);
    Matrix x(120, 2);
    std::vector<int> y(120);
    for (std::size_t r = 0; r < x.rows; ++r) {
        const bool positive = r % 2 == 0;
        x(r, 0) = rng.gaussian() + (positive ? 1.0 : -1.0);
        x(r, 1) = rng.gaussian() + (positive ? 0.5 : -0.5);
        // flip a few labels to engage the soft margin
        y[r] = positive ? 1 : -1;
        if (r % 17 == 0) y[r] = -y[r];
    }
    for (const SvmKernel kernel : {SvmKernel::linear, SvmKernel::rbf}) {
        CAPTURE(to_string(kernel));
        SvmParams params;
        params.kernel = kernel;
        params.c = 1.0;
        const SvmModel model = train_svm(x, y, params);
        CHECK(model.kkt_residual <= params.tolerance);
        CHECK(recomputed_residual(model, x, y) <= params.tolerance + 1e-9);

        // never below the majority-class rate
        std::size_t positives = 0;
        for (const int label : y)
            if (label == 1) ++positives;
        const double majority =
            std::max(positives, y.size() - positives) / static_cast<double>(y.size());
        CHECK(training_accuracy(model, x, y) >= majority - 1e-12);
    }
}

TEST_CASE("dual constraint holds at the optimum") {
    Rng rng(33);
    Matrix x(60, 2);
    std::vector<int> y(60);
    for (std::size_t r = 0; r < x.rows; ++r) {
        x(r, 0) = rng.gaussian();
        x(r, 1) = rng.gaussian();
        y[r] = (x(r, 0) * x(r, 1) > 0) ? 1 : -1;
    }
    SvmParams params;
    params.c = 5.0;
    const SvmModel model = train_svm(x, y, params);
    double balance = 0.0;
    for (const double coef : model.coefficients) balance += coef;
    CHECK(std::abs(balance) <= 1e-6);
    for (std::size_t s = 0; s < model.coefficients.size(); ++s) {
        CHECK(std::abs(model.coefficients[s]) <= model.c + 1e-9);
        CHECK(std::abs(model.coefficients[s]) > 0.0);
    }
}

TEST_CASE("degenerate inputs are rejected") {
    const Matrix x = rows_from({{0, 0}, {1, 1}});
    CHECK_THROWS_AS(train_svm(x, {1, 1}, SvmParams{}), std::runtime_error);
    CHECK_THROWS_AS(train_svm(x, {1, 0}, SvmParams{}), std::runtime_error);
    SvmParams bad;
    bad.c = 0.0;
    CHECK_THROWS_AS(train_svm(x, {1, -1}, bad), std::runtime_error);
    const SvmModel model = train_svm(x, {-1, 1}, SvmParams{});
    CHECK_THROWS_AS(decision_function(model, {1.0, 2.0, 3.0}), std::runtime_error);
}

TEST_CASE("model serialization preserves the decision function") {
    const Matrix x = rows_from({{0, 0}, {0, 1}, {1, 0}, {1, 1}});
    const std::vector<int> y = {-1, 1, 1, -1};
    SvmParams params;
    params.gamma = 1.0;
    params.c = 10.0;
    const SvmModel model = train_svm(x, y, params);
    const SvmModel back = SvmModel::from_json(model.to_json());
    for (std::size_t r = 0; r < x.rows; ++r)
        CHECK(decision_function(back, x.row_ptr(r), 2) ==
              doctest::Approx(decision_function(model, x.row_ptr(r), 2)).epsilon(1e-12));
}
