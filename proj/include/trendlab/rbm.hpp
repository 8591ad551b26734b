#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "trendlab/core.hpp"
#include "trendlab/training.hpp"

namespace trendlab {

/// Two-layer energy-based model over [0,1] inputs:
///   P(H_j=1 | v) = sigmoid(b_j + sum_i w_ij v_i)
///   P(V_i=1 | h) = sigmoid(a_i + sum_j w_ij h_j)
///   E(v, h) = -a.v - b.h - v'Wh
struct RbmModel {
    std::size_t visible = 0;
    std::size_t hidden = 0;
    Matrix w;               // visible x hidden
    std::vector<double> a;  // visible biases
    std::vector<double> b;  // hidden biases

    std::string to_json() const;
    static RbmModel from_json(const std::string& text);
};

struct RbmTrainConfig {
    double learning_rate = 0.05;
    double decay_rate = 0.97;     // lr(epoch) = learning_rate * decay^epoch
    std::size_t batch_size = 32;
    std::size_t max_epochs = 300;
    std::size_t gibbs_steps = 1;  // PCD-k
    std::size_t patience = 20;    // epochs without proxy-loss improvement
    std::uint64_t seed = 0;

    void validate() const;
};

/// Weights ~ N(0, 0.01^2); biases exactly zero. Deterministic per seed.
RbmModel init_rbm(std::size_t visible, std::size_t hidden, std::uint64_t seed);

std::vector<double> hidden_probs(const RbmModel& model, const std::vector<double>& v);
std::vector<double> visible_probs(const RbmModel& model, const std::vector<double>& h);

/// Energy of a binary configuration.
double energy(const RbmModel& model, const std::vector<double>& v,
              const std::vector<double>& h);

/// Mean log P(v) over the data rows by full 2^(n+m) enumeration.
/// Guarded to visible + hidden <= 20.
double exact_log_likelihood(const RbmModel& model, const Matrix& data);

/// Persistent contrastive divergence. Positive phase uses the data rows as
/// visible probabilities; negative phase advances one persistent chain per
/// batch slot by `gibbs_steps` full steps (binary hidden samples, visible
/// probabilities). Proxy loss for early stopping is the one-step
/// reconstruction cross-entropy over the training data.
std::pair<RbmModel, TrainHistory> train_pcd(RbmModel model, const Matrix& data,
                                            const RbmTrainConfig& config);

/// Row-wise hidden_probs; deterministic.
Matrix rbm_encode(const RbmModel& model, const Matrix& features);

} // namespace trendlab
