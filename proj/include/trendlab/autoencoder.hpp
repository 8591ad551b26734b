#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "trendlab/core.hpp"
#include "trendlab/training.hpp"

namespace trendlab {

enum class AeLoss { cross_entropy, squared };

AeLoss ae_loss_from_string(const std::string& name);
std::string to_string(AeLoss loss);

/// Single-hidden-layer auto-encoder with sigmoid activations on both maps:
///   y = sigmoid(W x + b)        (code, dimension p < d)
///   z = sigmoid(W' y + b')      (reconstruction)
/// Decode weights are untied: initialized from W transposed, then trained
/// independently.
struct AeModel {
    std::size_t input = 0;  // d
    std::size_t code = 0;   // p
    Matrix w;               // p x d
    std::vector<double> b;  // p
    Matrix w_prime;         // d x p
    std::vector<double> b_prime; // d

    std::string to_json() const;
    static AeModel from_json(const std::string& text);
};

struct AeTrainConfig {
    double learning_rate = 0.1;
    double decay_rate = 0.97;
    std::size_t batch_size = 32;
    std::size_t max_epochs = 300;
    std::size_t patience = 20;
    double corruption_level = 0.1;  // probability an input entry is zeroed
    AeLoss loss = AeLoss::cross_entropy;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Glorot uniform weights for sigmoid units: W ~ U(-r, r) with
/// r = 4 sqrt(6 / (d + p)); biases exactly zero. Deterministic per seed.
AeModel init_ae(std::size_t input, std::size_t code, std::uint64_t seed);

std::vector<double> ae_encode(const AeModel& model, const std::vector<double>& x);
std::vector<double> ae_decode(const AeModel& model, const std::vector<double>& y);

/// squared: ||x - z||^2.  cross_entropy: -sum x log z + (1-x) log(1-z),
/// which requires z strictly inside (0,1).
double ae_loss(const std::vector<double>& x, const std::vector<double>& z, AeLoss kind);

/// Each entry zeroed independently with probability `level`.
std::vector<double> corrupt(const std::vector<double>& x, double level, Rng& rng);

struct AeGradients {
    Matrix w;                     // dL/dW, p x d
    std::vector<double> b;        // dL/db
    Matrix w_prime;               // dL/dW', d x p
    std::vector<double> b_prime;  // dL/db'
};

/// Analytic gradients of loss(clean, decode(encode(corrupted))) with respect
/// to all four parameter groups. This is the exact computation the trainer
/// accumulates per sample.
AeGradients ae_backprop(const AeModel& model, const std::vector<double>& corrupted,
                        const std::vector<double>& clean, AeLoss loss);

/// Mini-batch SGD backpropagation on the configured loss. Inputs are
/// corrupted before encoding; the loss always targets the clean input.
/// Early stopping monitors a held-out chronological 10% slice of the data
/// (training loss when the data is too small to split).
std::pair<AeModel, TrainHistory> train_ae(AeModel model, const Matrix& data,
                                          const AeTrainConfig& config);

/// Row-wise encode.
Matrix ae_encode_matrix(const AeModel& model, const Matrix& features);

} // namespace trendlab
