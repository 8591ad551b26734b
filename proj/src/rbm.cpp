#include "trendlab/rbm.hpp"

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

double reconstruction_cross_entropy(const RbmModel& model, const Matrix& data) {
    double total = 0.0;
    std::vector<double> v(model.visible);
    for (std::size_t r = 0; r < data.rows; ++r) {
        v.assign(data.row_ptr(r), data.row_ptr(r) + data.cols);
        const std::vector<double> h = hidden_probs(model, v);
        const std::vector<double> rec = visible_probs(model, h);
        for (std::size_t i = 0; i < model.visible; ++i) {
            total -= v[i] * clamped_log(rec[i]) + (1.0 - v[i]) * clamped_log(1.0 - rec[i]);
        }
    }
    return total / static_cast<double>(data.rows);
}

double log_sum_exp(const std::vector<double>& xs) {
    const double m = *std::max_element(xs.begin(), xs.end());
    double sum = 0.0;
    for (const double x : xs) sum += std::exp(x - m);
    return m + std::log(sum);
}

} // namespace

void RbmTrainConfig::validate() const {
    if (learning_rate < 0.0) throw std::runtime_error("learning_rate must be >= 0");
    if (!(decay_rate > 0.0 && decay_rate <= 1.0))
        throw std::runtime_error("decay_rate must lie in (0, 1]");
    if (batch_size < 1 || max_epochs < 1 || gibbs_steps < 1 || patience < 1)
        throw std::runtime_error("batch_size, max_epochs, gibbs_steps and patience must be >= 1");
}

RbmModel init_rbm(std::size_t visible, std::size_t hidden, std::uint64_t seed) {
    if (visible == 0 || hidden == 0)
        throw std::runtime_error("RBM dimensions must be >= 1");
    RbmModel model;
    model.visible = visible;
    model.hidden = hidden;
    model.w = Matrix(visible, hidden);
    model.a.assign(visible, 0.0);
    model.b.assign(hidden, 0.0);
    Rng rng(mix_seed(seed, 0x7bb));
    for (double& w : model.w.data) w = 0.01 * rng.gaussian();
    return model;
}

std::vector<double> hidden_probs(const RbmModel& model, const std::vector<double>& v) {
    if (v.size() != model.visible)
        throw std::runtime_error("visible vector size mismatch");
    std::vector<double> act(model.b);
    for (std::size_t i = 0; i < model.visible; ++i) {
        const double vi = v[i];
        if (vi == 0.0) continue;
        const double* row = model.w.row_ptr(i);
        for (std::size_t j = 0; j < model.hidden; ++j) act[j] += vi * row[j];
    }
    for (double& x : act) x = sigmoid(x);
    return act;
}

std::vector<double> visible_probs(const RbmModel& model, const std::vector<double>& h) {
    if (h.size() != model.hidden)
        throw std::runtime_error("hidden vector size mismatch");
    std::vector<double> out(model.visible);
    for (std::size_t i = 0; i < model.visible; ++i) {
        const double* row = model.w.row_ptr(i);
        double act = model.a[i];
        for (std::size_t j = 0; j < model.hidden; ++j) act += row[j] * h[j];
        out[i] = sigmoid(act);
    }
    return out;
}

double energy(const RbmModel& model, const std::vector<double>& v,
              const std::vector<double>& h) {
    if (v.size() != model.visible || h.size() != model.hidden)
        throw std::runtime_error("energy: dimension mismatch");
    double e = 0.0;
    for (std::size_t i = 0; i < model.visible; ++i) e -= model.a[i] * v[i];
    for (std::size_t j = 0; j < model.hidden; ++j) e -= model.b[j] * h[j];
    for (std::size_t i = 0; i < model.visible; ++i) {
        if (v[i] == 0.0) continue;
        const double* row = model.w.row_ptr(i);
        for (std::size_t j = 0; j < model.hidden; ++j) e -= v[i] * row[j] * h[j];
    }
    return e;
}

double exact_log_likelihood(const RbmModel& model, const Matrix& data) {
    const std::size_t n = model.visible;
    const std::size_t m = model.hidden;
    if (n + m > 20)
        throw std::runtime_error("exact_log_likelihood limited to visible+hidden <= 20");
    if (data.rows == 0) throw std::runtime_error("empty data batch");
    if (data.cols != n) throw std::runtime_error("data width mismatch");
    for (const double x : data.data) {
        if (x != 0.0 && x != 1.0)
            throw std::runtime_error("exact_log_likelihood expects binary data");
    }

    const std::size_t visible_states = std::size_t{1} << n;
    const std::size_t hidden_states = std::size_t{1} << m;

    // log sum_h exp(-E(v,h)) for every visible configuration
    std::vector<double> per_visible(visible_states);
    std::vector<double> v(n), h(m);
    std::vector<double> terms(hidden_states);
    for (std::size_t vs = 0; vs < visible_states; ++vs) {
        for (std::size_t i = 0; i < n; ++i) v[i] = (vs >> i) & 1 ? 1.0 : 0.0;
        for (std::size_t hs = 0; hs < hidden_states; ++hs) {
            for (std::size_t j = 0; j < m; ++j) h[j] = (hs >> j) & 1 ? 1.0 : 0.0;
            terms[hs] = -energy(model, v, h);
        }
        per_visible[vs] = log_sum_exp(terms);
    }
    const double log_z = log_sum_exp(per_visible);

    double mean = 0.0;
    for (std::size_t r = 0; r < data.rows; ++r) {
        std::size_t vs = 0;
        for (std::size_t i = 0; i < n; ++i)
            if (data(r, i) == 1.0) vs |= std::size_t{1} << i;
        mean += per_visible[vs] - log_z;
    }
    return mean / static_cast<double>(data.rows);
}

std::pair<RbmModel, TrainHistory> train_pcd(RbmModel model, const Matrix& data,
                                            const RbmTrainConfig& config) {
    config.validate();
    if (data.rows == 0) throw std::runtime_error("empty training data");
    if (data.cols != model.visible) throw std::runtime_error("data width mismatch");
    for (const double x : data.data) {
        if (!(x >= 0.0 && x <= 1.0))
            throw std::runtime_error("training data must lie in [0,1]");
    }

    const std::size_t n = model.visible;
    const std::size_t m = model.hidden;
    const std::size_t rows = data.rows;
    Rng rng(mix_seed(config.seed, 0x9cd));

    // persistent chains, one per batch slot, seeded from the first batch
    std::vector<std::vector<double>> chains(config.batch_size);
    for (std::size_t s = 0; s < config.batch_size; ++s) {
        const std::size_t r = s % std::min(rows, config.batch_size);
        chains[s].assign(data.row_ptr(r), data.row_ptr(r) + n);
    }

    TrainHistory history;
    double best_loss = std::numeric_limits<double>::infinity();
    std::size_t stale_epochs = 0;

    Matrix grad_w(n, m);
    std::vector<double> grad_a(n), grad_b(m), h_sample(m);

    for (std::size_t epoch = 0; epoch < config.max_epochs; ++epoch) {
        const auto epoch_start = std::chrono::steady_clock::now();
        const double lr =
            config.learning_rate * std::pow(config.decay_rate, static_cast<double>(epoch));

        for (std::size_t batch_start = 0; batch_start < rows;
             batch_start += config.batch_size) {
            const std::size_t batch_rows =
                std::min(config.batch_size, rows - batch_start);
            std::fill(grad_w.data.begin(), grad_w.data.end(), 0.0);
            std::fill(grad_a.begin(), grad_a.end(), 0.0);
            std::fill(grad_b.begin(), grad_b.end(), 0.0);

            for (std::size_t s = 0; s < batch_rows; ++s) {
                const double* v = data.row_ptr(batch_start + s);
                const std::vector<double> h =
                    hidden_probs(model, std::vector<double>(v, v + n));

                // negative phase: advance this slot's persistent chain
                std::vector<double>& chain = chains[s];
                for (std::size_t step = 0; step < config.gibbs_steps; ++step) {
                    const std::vector<double> hp = hidden_probs(model, chain);
                    for (std::size_t j = 0; j < m; ++j)
                        h_sample[j] = rng.bernoulli(hp[j]) ? 1.0 : 0.0;
                    chain = visible_probs(model, h_sample);
                }
                const std::vector<double> h_neg = hidden_probs(model, chain);

                for (std::size_t i = 0; i < n; ++i) {
                    double* g = grad_w.row_ptr(i);
                    const double vi = v[i];
                    const double ci = chain[i];
                    for (std::size_t j = 0; j < m; ++j)
                        g[j] += vi * h[j] - ci * h_neg[j];
                    grad_a[i] += vi - ci;
                }
                for (std::size_t j = 0; j < m; ++j) grad_b[j] += h[j] - h_neg[j];
            }

            const double scale = lr / static_cast<double>(batch_rows);
            for (std::size_t idx = 0; idx < grad_w.data.size(); ++idx)
                model.w.data[idx] += scale * grad_w.data[idx];
            for (std::size_t i = 0; i < n; ++i) model.a[i] += scale * grad_a[i];
            for (std::size_t j = 0; j < m; ++j) model.b[j] += scale * grad_b[j];
        }

        const double loss = reconstruction_cross_entropy(model, data);
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

Matrix rbm_encode(const RbmModel& model, const Matrix& features) {
    if (features.cols != model.visible)
        throw std::runtime_error("feature width does not match RBM visible units");
    Matrix out(features.rows, model.hidden);
    std::vector<double> v(model.visible);
    for (std::size_t r = 0; r < features.rows; ++r) {
        v.assign(features.row_ptr(r), features.row_ptr(r) + features.cols);
        const std::vector<double> h = hidden_probs(model, v);
        std::copy(h.begin(), h.end(), out.row_ptr(r));
    }
    return out;
}

std::string RbmModel::to_json() const {
    nlohmann::json doc;
    doc["format_version"] = 1;
    doc["n"] = visible;
    doc["m"] = hidden;
    doc["W"] = w.data;
    doc["a"] = a;
    doc["b"] = b;
    return doc.dump(2);
}

RbmModel RbmModel::from_json(const std::string& text) {
    const nlohmann::json doc = nlohmann::json::parse(text);
    RbmModel model;
    model.visible = doc.at("n").get<std::size_t>();
    model.hidden = doc.at("m").get<std::size_t>();
    model.w = Matrix(model.visible, model.hidden);
    model.w.data = doc.at("W").get<std::vector<double>>();
    if (model.w.data.size() != model.visible * model.hidden)
        throw std::runtime_error("RBM weight array size mismatch");
    model.a = doc.at("a").get<std::vector<double>>();
    model.b = doc.at("b").get<std::vector<double>>();
    if (model.a.size() != model.visible || model.b.size() != model.hidden)
        throw std::runtime_error("RBM bias size mismatch");
    return model;
}

} // namespace trendlab
