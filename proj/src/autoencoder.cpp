#include "trendlab/autoencoder.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <json.hpp>

namespace trendlab {

namespace {

double clamped_log(double z) {
    constexpr double eps = 1e-12;
    return std::log(std::clamp(z, eps, 1.0 - eps));
}

struct BackpropScratch {
    std::vector<double> delta2, dy, delta1;
};

// One sample's gradient contribution, accumulated into the grad buffers.
void backprop_accumulate(const AeModel& model, const std::vector<double>& corrupted,
                         const std::vector<double>& clean, AeLoss loss, Matrix& grad_w,
                         std::vector<double>& grad_b, Matrix& grad_wp,
                         std::vector<double>& grad_bp, BackpropScratch& s) {
    const std::size_t d = model.input;
    const std::size_t p = model.code;
    const std::vector<double> y = ae_encode(model, corrupted);
    const std::vector<double> z = ae_decode(model, y);
    s.delta2.resize(d);
    s.dy.assign(p, 0.0);
    s.delta1.resize(p);

    if (loss == AeLoss::cross_entropy) {
        for (std::size_t i = 0; i < d; ++i) s.delta2[i] = z[i] - clean[i];
    } else {
        for (std::size_t i = 0; i < d; ++i)
            s.delta2[i] = 2.0 * (z[i] - clean[i]) * z[i] * (1.0 - z[i]);
    }

    for (std::size_t i = 0; i < d; ++i) {
        const double di = s.delta2[i];
        double* gp = grad_wp.row_ptr(i);
        const double* wp = model.w_prime.row_ptr(i);
        for (std::size_t j = 0; j < p; ++j) {
            gp[j] += di * y[j];
            s.dy[j] += di * wp[j];
        }
        grad_bp[i] += di;
    }
    for (std::size_t j = 0; j < p; ++j) {
        s.delta1[j] = s.dy[j] * y[j] * (1.0 - y[j]);
        grad_b[j] += s.delta1[j];
        double* g = grad_w.row_ptr(j);
        const double dj = s.delta1[j];
        for (std::size_t i = 0; i < d; ++i) g[i] += dj * corrupted[i];
    }
}

// Clean forward pass loss, clamped so saturated sigmoids cannot produce inf.
double monitor_loss(const AeModel& model, const Matrix& data, std::size_t begin,
                    std::size_t end, AeLoss kind) {
    double total = 0.0;
    std::vector<double> x(model.input);
    for (std::size_t r = begin; r < end; ++r) {
        x.assign(data.row_ptr(r), data.row_ptr(r) + data.cols);
        const std::vector<double> z = ae_decode(model, ae_encode(model, x));
        if (kind == AeLoss::squared) {
            for (std::size_t i = 0; i < x.size(); ++i) {
                const double d = x[i] - z[i];
                total += d * d;
            }
        } else {
            for (std::size_t i = 0; i < x.size(); ++i)
                total -= x[i] * clamped_log(z[i]) + (1.0 - x[i]) * clamped_log(1.0 - z[i]);
        }
    }
    return total / static_cast<double>(end - begin);
}

} // namespace

AeLoss ae_loss_from_string(const std::string& name) {
    if (name == "cross_entropy") return AeLoss::cross_entropy;
    if (name == "squared") return AeLoss::squared;
    throw std::runtime_error("unknown loss '" + name + "'");
}

std::string to_string(AeLoss loss) {
    return loss == AeLoss::cross_entropy ? "cross_entropy" : "squared";
}

void AeTrainConfig::validate() const {
    if (learning_rate < 0.0) throw std::runtime_error("learning_rate must be >= 0");
    if (!(decay_rate > 0.0 && decay_rate <= 1.0))
        throw std::runtime_error("decay_rate must lie in (0, 1]");
    if (batch_size < 1 || max_epochs < 1 || patience < 1)
        throw std::runtime_error("batch_size, max_epochs and patience must be >= 1");
    if (!(corruption_level >= 0.0 && corruption_level < 1.0))
        throw std::runtime_error("corruption_level must lie in [0, 1)");
}

AeModel init_ae(std::size_t input, std::size_t code, std::uint64_t seed) {
    if (code < 1 || code >= input)
        throw std::runtime_error("auto-encoder requires 1 <= code size < input size");
    AeModel model;
    model.input = input;
    model.code = code;
    model.w = Matrix(code, input);
    model.b.assign(code, 0.0);
    model.w_prime = Matrix(input, code);
    model.b_prime.assign(input, 0.0);

    const double r = 4.0 * std::sqrt(6.0 / static_cast<double>(input + code));
    Rng rng(mix_seed(seed, 0xae));
    for (double& w : model.w.data) w = rng.uniform(-r, r);
    for (std::size_t i = 0; i < input; ++i)
        for (std::size_t j = 0; j < code; ++j) model.w_prime(i, j) = model.w(j, i);
    return model;
}

std::vector<double> ae_encode(const AeModel& model, const std::vector<double>& x) {
    if (x.size() != model.input) throw std::runtime_error("input vector size mismatch");
    std::vector<double> y(model.code);
    for (std::size_t j = 0; j < model.code; ++j) {
        const double* row = model.w.row_ptr(j);
        double act = model.b[j];
        for (std::size_t i = 0; i < model.input; ++i) act += row[i] * x[i];
        y[j] = sigmoid(act);
    }
    return y;
}

std::vector<double> ae_decode(const AeModel& model, const std::vector<double>& y) {
    if (y.size() != model.code) throw std::runtime_error("code vector size mismatch");
    std::vector<double> z(model.input);
    for (std::size_t i = 0; i < model.input; ++i) {
        const double* row = model.w_prime.row_ptr(i);
        double act = model.b_prime[i];
        for (std::size_t j = 0; j < model.code; ++j) act += row[j] * y[j];
        z[i] = sigmoid(act);
    }
    return z;
}

double ae_loss(const std::vector<double>& x, const std::vector<double>& z, AeLoss kind) {
    if (x.size() != z.size()) throw std::runtime_error("loss: size mismatch");
    if (kind == AeLoss::squared) {
        double total = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double d = x[i] - z[i];
            total += d * d;
        }
        return total;
    }
    double total = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(z[i] > 0.0 && z[i] < 1.0))
            throw std::runtime_error("cross-entropy needs reconstruction inside (0,1)");
        total -= x[i] * std::log(z[i]) + (1.0 - x[i]) * std::log(1.0 - z[i]);
    }
    return total;
}

std::vector<double> corrupt(const std::vector<double>& x, double level, Rng& rng) {
    if (!(level >= 0.0 && level < 1.0))
        throw std::runtime_error("corruption level must lie in [0, 1)");
    std::vector<double> out = x;
    if (level == 0.0) return out;
    for (double& value : out) {
        if (rng.bernoulli(level)) value = 0.0;
    }
    return out;
}

AeGradients ae_backprop(const AeModel& model, const std::vector<double>& corrupted,
                        const std::vector<double>& clean, AeLoss loss) {
    if (corrupted.size() != model.input || clean.size() != model.input)
        throw std::runtime_error("backprop: input vector size mismatch");
    AeGradients grads{Matrix(model.code, model.input), std::vector<double>(model.code, 0.0),
                      Matrix(model.input, model.code),
                      std::vector<double>(model.input, 0.0)};
    BackpropScratch scratch;
    backprop_accumulate(model, corrupted, clean, loss, grads.w, grads.b, grads.w_prime,
                        grads.b_prime, scratch);
    return grads;
}

std::pair<AeModel, TrainHistory> train_ae(AeModel model, const Matrix& data,
                                          const AeTrainConfig& config) {
    config.validate();
    if (data.rows == 0) throw std::runtime_error("empty training data");
    if (data.cols != model.input) throw std::runtime_error("data width mismatch");
    for (const double x : data.data) {
        if (!(x >= 0.0 && x <= 1.0))
            throw std::runtime_error("training data must lie in [0,1]");
    }

    const std::size_t d = model.input;
    const std::size_t p = model.code;
    const std::size_t val_rows = data.rows / 10;
    const std::size_t train_rows = data.rows - val_rows;
    Rng rng(mix_seed(config.seed, 0x4ae));

    TrainHistory history;
    double best_loss = std::numeric_limits<double>::infinity();
    std::size_t stale_epochs = 0;

    Matrix grad_w(p, d), grad_wp(d, p);
    std::vector<double> grad_b(p), grad_bp(d);
    std::vector<double> x(d);
    BackpropScratch scratch;

    for (std::size_t epoch = 0; epoch < config.max_epochs; ++epoch) {
        const auto epoch_start = std::chrono::steady_clock::now();
        const double lr =
            config.learning_rate * std::pow(config.decay_rate, static_cast<double>(epoch));

        for (std::size_t batch_start = 0; batch_start < train_rows;
             batch_start += config.batch_size) {
            const std::size_t batch_rows =
                std::min(config.batch_size, train_rows - batch_start);
            std::fill(grad_w.data.begin(), grad_w.data.end(), 0.0);
            std::fill(grad_wp.data.begin(), grad_wp.data.end(), 0.0);
            std::fill(grad_b.begin(), grad_b.end(), 0.0);
            std::fill(grad_bp.begin(), grad_bp.end(), 0.0);

            for (std::size_t s = 0; s < batch_rows; ++s) {
                const double* clean = data.row_ptr(batch_start + s);
                x.assign(clean, clean + d);
                const std::vector<double> corrupted =
                    corrupt(x, config.corruption_level, rng);
                backprop_accumulate(model, corrupted, x, config.loss, grad_w, grad_b,
                                    grad_wp, grad_bp, scratch);
            }

            const double scale = lr / static_cast<double>(batch_rows);
            for (std::size_t idx = 0; idx < grad_w.data.size(); ++idx)
                model.w.data[idx] -= scale * grad_w.data[idx];
            for (std::size_t idx = 0; idx < grad_wp.data.size(); ++idx)
                model.w_prime.data[idx] -= scale * grad_wp.data[idx];
            for (std::size_t j = 0; j < p; ++j) model.b[j] -= scale * grad_b[j];
            for (std::size_t i = 0; i < d; ++i) model.b_prime[i] -= scale * grad_bp[i];
        }

        const double loss = val_rows > 0
                                ? monitor_loss(model, data, train_rows, data.rows,
                                               config.loss)
                                : monitor_loss(model, data, 0, data.rows, config.loss);
        const auto epoch_end = std::chrono::steady_clock::now();
        history.epochs.push_back(EpochRecord{
            loss, lr, std::chrono::duration<double>(epoch_end - epoch_start).count()});

        if (loss < best_loss) {
            best_loss = loss;
            stale_epochs = 0;
        } else {
            ++stale_epochs;
            if (stale_epochs >= config.patience) {
                history.stopped_early = true;
                break;
            }
        }
    }
    return {std::move(model), std::move(history)};
}

Matrix ae_encode_matrix(const AeModel& model, const Matrix& features) {
    if (features.cols != model.input)
        throw std::runtime_error("feature width does not match auto-encoder input");
    Matrix out(features.rows, model.code);
    std::vector<double> x(model.input);
    for (std::size_t r = 0; r < features.rows; ++r) {
        x.assign(features.row_ptr(r), features.row_ptr(r) + features.cols);
        const std::vector<double> y = ae_encode(model, x);
        std::copy(y.begin(), y.end(), out.row_ptr(r));
    }
    return out;
}

std::string AeModel::to_json() const {
    nlohmann::json doc;
    doc["format_version"] = 1;
    doc["d"] = input;
    doc["p"] = code;
    doc["W"] = w.data;
    doc["b"] = b;
    doc["W_prime"] = w_prime.data;
    doc["b_prime"] = b_prime;
    return doc.dump(2);
}

AeModel AeModel::from_json(const std::string& text) {
    const nlohmann::json doc = nlohmann::json::parse(text);
    AeModel model;
    model.input = doc.at("d").get<std::size_t>();
    model.code = doc.at("p").get<std::size_t>();
    model.w = Matrix(model.code, model.input);
    model.w.data = doc.at("W").get<std::vector<double>>();
    model.w_prime = Matrix(model.input, model.code);
    model.w_prime.data = doc.at("W_prime").get<std::vector<double>>();
    model.b = doc.at("b").get<std::vector<double>>();
    model.b_prime = doc.at("b_prime").get<std::vector<double>>();
    if (model.w.data.size() != model.input * model.code ||
        model.w_prime.data.size() != model.input * model.code ||
        model.b.size() != model.code || model.b_prime.size() != model.input)
        throw std::runtime_error("auto-encoder parameter size mismatch");
    return model;
}

} // namespace trendlab
