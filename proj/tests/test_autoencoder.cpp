#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "trendlab/autoencoder.hpp"

using namespace trendlab;

namespace {

AeModel zero_model(std::size_t d, std::size_t p) {
    AeModel model = init_ae(d, p, 0);
    std::fill(model.w.data.begin(), model.w.data.end(), 0.0);
    std::fill(model.w_prime.data.begin(), model.w_prime.data.end(), 0.0);
    return model;
}

Matrix repeat_rows(const std::vector<double>& row, std::size_t count) {
    Matrix m(count, row.size());
    for (std::size_t r = 0; r < count; ++r)
        std::copy(row.begin(), row.end(), m.row_ptr(r));
    return m;
}

double total_loss(const AeModel& model, const Matrix& data, AeLoss kind) {
    double total = 0.0;
    for (std::size_t r = 0; r < data.rows; ++r) {
        const std::vector<double> x(data.row_ptr(r), data.row_ptr(r) + data.cols);
        total += ae_loss(x, ae_decode(model, ae_encode(model, x)), kind);
    }
    return total / static_cast<double>(data.rows);
}

} // namespace

TEST_CASE("glorot init: range, zero biases, transposed decoder, determinism") {
    const AeModel model = init_ae(93, 50, 11);
    const double r = 4.0 * std::sqrt(6.0 / 143.0);
    CHECK(r == doctest::Approx(0.8194).epsilon(1e-3));

    double max_abs = 0.0;
    for (const double w : model.w.data) max_abs = std::max(max_abs, std::abs(w));
    CHECK(max_abs <= r);
    CHECK(max_abs > 0.9 * r); // the sample should fill the interval

    for (const double b : model.b) CHECK(b == 0.0);
    for (const double b : model.b_prime) CHECK(b == 0.0);
    for (std::size_t i = 0; i < model.input; ++i)
        for (std::size_t j = 0; j < model.code; ++j)
            CHECK(model.w_prime(i, j) == model.w(j, i));

    const AeModel again = init_ae(93, 50, 11);
    CHECK(model.w.data == again.w.data);

    CHECK_THROWS_AS(init_ae(5, 5, 1), std::runtime_error);
    CHECK_THROWS_AS(init_ae(5, 0, 1), std::runtime_error);
}

TEST_CASE("encode and decode evaluate the sigmoid affine maps") {
    SUBCASE("zero parameters map everything to 0.5") {
        const AeModel zero = zero_model(4, 2);
        for (const double y : ae_encode(zero, {0.1, 0.9, 0.4, 0.6}))
            CHECK(y == doctest::Approx(0.5));
        for (const double z : ae_decode(zero, {0.3, 0.8}))
            CHECK(z == doctest::Approx(0.5));
    }
    SUBCASE("hand evaluation") {
        AeModel model = zero_model(2, 1);
        model.w(0, 0) = 1.0;
        model.w(0, 1) = 1.0;
        const auto y = ae_encode(model, {0.5, 0.5});
        CHECK(y[0] == doctest::Approx(1.0 / (1.0 + std::exp(-1.0))));

        model.w_prime(0, 0) = 2.0;
        model.w_prime(1, 0) = -2.0;
        const auto z = ae_decode(model, {0.5});
        CHECK(z[0] == doctest::Approx(sigmoid(1.0)));
        CHECK(z[1] == doctest::Approx(sigmoid(-1.0)));
    }
    SUBCASE("zero input exposes the bias") {
        AeModel model = zero_model(3, 2);
        model.b = {0.7, -0.4};
        const auto y = ae_encode(model, {0, 0, 0});
        CHECK(y[0] == doctest::Approx(sigmoid(0.7)));
        CHECK(y[1] == doctest::Approx(sigmoid(-0.4)));
    }
    SUBCASE("dimension mismatches") {
        const AeModel model = init_ae(4, 2, 1);
        CHECK_THROWS_AS(ae_encode(model, {0.1, 0.2}), std::runtime_error);
        CHECK_THROWS_AS(ae_decode(model, {0.1, 0.2, 0.3}), std::runtime_error);
    }
}

TEST_CASE("loss functions") {
    CHECK(ae_loss({0.3, 0.7}, {0.3, 0.7}, AeLoss::squared) == doctest::Approx(0.0));

    const std::vector<double> half(6, 0.5);
    CHECK(ae_loss(half, half, AeLoss::cross_entropy) ==
          doctest::Approx(6.0 * std::log(2.0)));

    CHECK(ae_loss({1.0, 0.0}, {0.9, 0.2}, AeLoss::cross_entropy) ==
          doctest::Approx(-(std::log(0.9) + std::log(0.8))));

    CHECK_THROWS_AS(ae_loss({1.0}, {0.0}, AeLoss::cross_entropy), std::runtime_error);
    CHECK_THROWS_AS(ae_loss({1.0}, {1.0}, AeLoss::cross_entropy), std::runtime_error);
    CHECK_THROWS_AS(ae_loss({1.0, 0.0}, {0.5}, AeLoss::squared), std::runtime_error);
}

TEST_CASE("corruption zeroes entries at the configured rate") {
    std::vector<double> x(100000, 1.0);
    SUBCASE("level zero is the identity") {
        Rng rng(1);
        CHECK(corrupt(x, 0.0, rng) == x);
    }
    SUBCASE("binomial concentration at level 0.5") {
        Rng rng(2);
        const auto corrupted = corrupt(x, 0.5, rng);
        const double zeroed =
            static_cast<double>(std::count(corrupted.begin(), corrupted.end(), 0.0)) /
            static_cast<double>(corrupted.size());
        CHECK(std::abs(zeroed - 0.5) < 0.01);
    }
    SUBCASE("same seed, same mask") {
        Rng rng_a(3), rng_b(3);
        CHECK(corrupt(x, 0.3, rng_a) == corrupt(x, 0.3, rng_b));
    }
    SUBCASE("level 1 is out of range") {
        Rng rng(4);
        CHECK_THROWS_AS(corrupt(x, 1.0, rng), std::runtime_error);
    }
}

TEST_CASE("analytic gradients match central finite differences") {
    Rng rng(91);
    for (int instance = 0; instance < 6; ++instance) {
        for (const AeLoss loss : {AeLoss::cross_entropy, AeLoss::squared}) {
            CAPTURE(instance);
            CAPTURE(to_string(loss));
            AeModel model = init_ae(8, 3, 1000 + static_cast<std::uint64_t>(instance));
            std::vector<double> x(8);
            for (double& v : x) v = rng.uniform();

            const AeGradients grads = ae_backprop(model, x, x, loss);
            const double h = 1e-6;
            auto loss_at = [&](const AeModel& m) {
                return ae_loss(x, ae_decode(m, ae_encode(m, x)), loss);
            };
            auto fd_check = [&](auto access, const double* analytic, std::size_t count) {
                for (std::size_t idx = 0; idx < count; ++idx) {
                    AeModel plus = model;
                    AeModel minus = model;
                    access(plus)[idx] += h;
                    access(minus)[idx] -= h;
                    const double fd = (loss_at(plus) - loss_at(minus)) / (2.0 * h);
                    const double g = analytic[idx];
                    INFO("param ", idx, " analytic ", g, " fd ", fd);
                    CHECK(std::abs(g - fd) <=
                          1e-4 * std::max({std::abs(g), std::abs(fd), 1e-4}));
                }
            };
            fd_check([](AeModel& m) { return m.w.data.data(); }, grads.w.data.data(),
                     model.w.data.size());
            fd_check([](AeModel& m) { return m.b.data(); }, grads.b.data(),
                     model.b.size());
            fd_check([](AeModel& m) { return m.w_prime.data.data(); },
                     grads.w_prime.data.data(), model.w_prime.data.size());
            fd_check([](AeModel& m) { return m.b_prime.data(); }, grads.b_prime.data(),
                     model.b_prime.size());
        }
    }
}

TEST_CASE("one clean full-batch step decreases the training loss") {
    Rng rng(17);
    for (int instance = 0; instance < 4; ++instance) {
        CAPTURE(instance);
        Matrix data(12, 8);
        for (double& v : data.data) v = rng.uniform();
        const AeModel before = init_ae(8, 3, 300 + static_cast<std::uint64_t>(instance));

        AeTrainConfig config;
        config.learning_rate = 0.05;
        config.decay_rate = 1.0;
        config.batch_size = data.rows;
        config.max_epochs = 1;
        config.corruption_level = 0.0;
        config.seed = 1;
        const auto [after, history] = train_ae(before, data, config);
        CHECK(total_loss(after, data, AeLoss::cross_entropy) <
              total_loss(before, data, AeLoss::cross_entropy));
    }
}

TEST_CASE("zero learning rate leaves parameters untouched") {
    Matrix data = repeat_rows({0.2, 0.8, 0.5, 0.3}, 10);
    const AeModel start = init_ae(4, 2, 5);
    AeTrainConfig config;
    config.learning_rate = 0.0;
    config.max_epochs = 7;
    config.seed = 5;
    const auto [after, history] = train_ae(start, data, config);
    CHECK(after.w.data == start.w.data);
    CHECK(after.w_prime.data == start.w_prime.data);
    CHECK(after.b == start.b);
    CHECK(after.b_prime == start.b_prime);
}

TEST_CASE("training input validation") {
    AeTrainConfig config;
    CHECK_THROWS_AS(train_ae(init_ae(4, 2, 1), Matrix(0, 4), config), std::runtime_error);
    Matrix bad(1, 4, 0.5);
    bad(0, 2) = 1.5;
    CHECK_THROWS_AS(train_ae(init_ae(4, 2, 1), bad, config), std::runtime_error);
    AeTrainConfig bad_config;
    bad_config.corruption_level = 1.0;
    CHECK_THROWS_AS(train_ae(init_ae(4, 2, 1), Matrix(2, 4, 0.5), bad_config),
                    std::runtime_error);
}

TEST_CASE("point-mass convergence without corruption") {
    const std::vector<double> row = {0.8, 0.2, 0.6, 0.4, 0.9, 0.1, 0.7, 0.3};
    const Matrix data = repeat_rows(row, 100);
    AeTrainConfig config;
    config.learning_rate = 0.5;
    config.decay_rate = 1.0;
    config.batch_size = 32;
    config.max_epochs = 500;
    config.patience = 500;
    config.corruption_level = 0.0;
    config.seed = 23;
    const auto [model, history] = train_ae(init_ae(8, 3, 23), data, config);
    const std::vector<double> z = ae_decode(model, ae_encode(model, row));
    for (std::size_t i = 0; i < row.size(); ++i)
        CHECK(std::abs(z[i] - row[i]) <= 0.05);
}

TEST_CASE("4-2-4 one-hot encoder learns distinct codes") {
    Matrix data(4, 4, 0.0);
    for (std::size_t i = 0; i < 4; ++i) data(i, i) = 1.0;

    AeTrainConfig config;
    config.learning_rate = 2.0;
    config.decay_rate = 1.0;
    config.batch_size = 4;
    config.max_epochs = 4000;
    config.patience = 4000;
    config.corruption_level = 0.0;
    config.seed = 2;
    const AeModel before = init_ae(4, 2, 2);
    const auto [after, history] = train_ae(before, data, config);

    CHECK(total_loss(after, data, AeLoss::cross_entropy) <
          total_loss(before, data, AeLoss::cross_entropy));

    std::size_t recovered = 0;
    for (std::size_t i = 0; i < 4; ++i) {
        const std::vector<double> x(data.row_ptr(i), data.row_ptr(i) + 4);
        const std::vector<double> z = ae_decode(after, ae_encode(after, x));
        const std::size_t argmax =
            static_cast<std::size_t>(std::max_element(z.begin(), z.end()) - z.begin());
        if (argmax == i) ++recovered;
    }
    CHECK(recovered >= 3);
}

TEST_CASE("training is deterministic per seed") {
    Rng rng(6);
    Matrix data(30, 6);
    for (double& v : data.data) v = rng.uniform();
    AeTrainConfig config;
    config.max_epochs = 15;
    config.seed = 77;
    const auto [a, ha] = train_ae(init_ae(6, 2, 77), data, config);
    const auto [b, hb] = train_ae(init_ae(6, 2, 77), data, config);
    CHECK(a.w.data == b.w.data);
    CHECK(a.w_prime.data == b.w_prime.data);
    CHECK(a.b == b.b);
    CHECK(a.b_prime == b.b_prime);
}

TEST_CASE("reconstructions always live strictly inside (0,1)") {
    Rng rng(31);
    const AeModel model = init_ae(6, 2, 9);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> x(6);
        for (double& v : x) v = rng.uniform();
        for (const double z : ae_decode(model, ae_encode(model, x))) {
            CHECK(z > 0.0);
            CHECK(z < 1.0);
        }
    }
}

TEST_CASE("encode_matrix is a row-wise map") {
    const AeModel model = init_ae(5, 2, 13);
    Rng rng(13);
    Matrix data(7, 5);
    for (double& v : data.data) v = rng.uniform();
    const Matrix codes = ae_encode_matrix(model, data);
    REQUIRE(codes.rows == 7);
    REQUIRE(codes.cols == 2);
    const std::vector<double> row0(data.row_ptr(0), data.row_ptr(0) + 5);
    const auto direct = ae_encode(model, row0);
    CHECK(codes(0, 0) == direct[0]);
    CHECK(codes(0, 1) == direct[1]);
    CHECK_THROWS_AS(ae_encode_matrix(model, Matrix(2, 4, 0.1)), std::runtime_error);
}

TEST_CASE("model serialization round trip") {
    const AeModel model = init_ae(6, 3, 55);
    const AeModel back = AeModel::from_json(model.to_json());
    CHECK(back.input == model.input);
    CHECK(back.code == model.code);
    CHECK(back.w.data == model.w.data);
    CHECK(back.w_prime.data == model.w_prime.data);
    CHECK(back.b == model.b);
    CHECK(back.b_prime == model.b_prime);
}
