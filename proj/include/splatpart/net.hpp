/* SPDX-License-Identifier: Apache-2.0 */
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "splatpart/avatar.hpp"
#include "splatpart/hash_grid.hpp"
#include "splatpart/rng.hpp"

namespace splatpart {

inline constexpr int kFeatureDim = 56; // quat 4 + scale 3 + opacity 1 + sh 48
inline constexpr int kTargetDim = 52;  // scale 3 + opacity 1 + sh 48
inline constexpr double kShClip = 2.4;

enum class ActivationKind { GumbelSoftmax, PlainSoftmax };
enum class EncoderKind { HashGrid, RawXyz };

/// Linear anneal from tau_start to tau_end over anneal_steps, then constant.
/// anneal_steps <= 0 means half of total_steps.
struct TemperatureSchedule {
    double tau_start = 1.0;
    double tau_end = 0.1;
    int anneal_steps = -1;
};

struct NetConfig {
    int hidden_dim = 256;    // d
    int bottleneck_size = 3; // k
    int output_dim = kTargetDim;
    TemperatureSchedule temperature;
    ActivationKind activation_kind = ActivationKind::GumbelSoftmax;
    EncoderKind encoder_kind = EncoderKind::HashGrid;
    double lambda_usage = 0.0;
    double lambda_sparsity = 0.0;
    double learning_rate = 1e-3;
    double learning_rate_hash = 1e-2;
    double beta1 = 0.9;
    double beta2 = 0.99;
    double adam_eps = 1e-15;
    int batch_size = 8192;
    int total_steps = 10000;
    std::uint64_t seed = 1;
    HashGridConfig hash;

    int input_dim() const {
        return encoder_kind == EncoderKind::HashGrid ? hash.output_dim() : 3;
    }
    double tau_at(int step) const;
    void validate() const;
};

/// input -> d -> d -> k (bottleneck) -> output, ReLU hidden layers, linear
/// head. Weights are stored as (rows = output dim, cols = input dim).
struct DisentangleModel {
    NetConfig config;
    HashGridState hash_state; // tables empty when encoder_kind == RawXyz
    BoundingTransform normalization;
    Eigen::MatrixXd W1, W2, W3, W4;
    Eigen::VectorXd b1, b2, b3, b4;
};

/// Per-Gaussian regression data: the 56-dim feature layout and the 52-dim
/// reconstruction target (rotation excluded).
struct TrainingTarget {
    Eigen::Matrix<double, kFeatureDim, 1> feature;
    Eigen::Matrix<double, kTargetDim, 1> target;
};

/// Quaternion unit-normalized, scale divided by its own L2 norm, opacity
/// passed through, sh clamped to +-2.4. Avatar must already be in global
/// space. Throws ZeroScaleError on a zero-norm scale vector.
std::vector<TrainingTarget> build_targets(const Avatar& avatar_global);

/// softmax(logits / tau) with max-subtraction; tau must be > 0.
Eigen::VectorXd softmax_tempered(const Eigen::VectorXd& logits, double tau);

/// v = softmax((z + g) / tau), g ~ Gumbel(0,1) drawn from rng.
Eigen::VectorXd gumbel_softmax(const Eigen::VectorXd& z, double tau, Rng& rng);

double loss_reconstruction(const Eigen::VectorXd& yhat, const Eigen::VectorXd& target);

/// Mean per-row entropy of a batch of probability rows; in [0, log k].
/// Throws InvalidArgumentError when a row is not normalized within 1e-6.
double loss_sparsity(const Eigen::MatrixXd& probs);

/// log k - H(mean row); the soft relaxation used for training.
double loss_usage(const Eigen::MatrixXd& probs);

/// Argmax-indicator variant of the usage term. Zero gradient; logged as a
/// metric only.
double usage_indicator(const Eigen::MatrixXd& probs);

struct ForwardResult {
    Eigen::VectorXd logits;         // z, size k
    Eigen::VectorXd probs;          // v, size k
    Eigen::VectorXd reconstruction; // yhat, size 52
};

/// Full single-point pass from a raw (global-space) position. Throws
/// NumericalOverflowError on non-finite intermediates.
ForwardResult forward(const Eigen::Vector3d& position, const DisentangleModel& model,
                      double tau, Rng& rng);

struct Gradients {
    Eigen::MatrixXd W1, W2, W3, W4;
    Eigen::VectorXd b1, b2, b3, b4;
    HashGridGrad hash;

    explicit Gradients(const NetConfig& config);
};

struct BatchEval {
    double loss = 0.0;
    double loss_rec = 0.0;
    double loss_sparsity = 0.0;
    double loss_usage = 0.0;
    Eigen::MatrixXd probs; // B x k
};

/// Forward (and optionally backward) on a batch. positions_unit rows are
/// already normalized into the unit cube; gumbel_noise is a B x k matrix of
/// pre-sampled Gumbel draws, or nullptr for the noise-free softmax path.
/// Total loss is loss_rec + lambda_sparsity * L_s + lambda_usage * L_u, and
/// the gradients (when requested) are exact for that composite.
BatchEval eval_batch(const DisentangleModel& model, const Eigen::MatrixXd& positions_unit,
                     const Eigen::MatrixXd& targets, double tau,
                     const Eigen::MatrixXd* gumbel_noise, Gradients* grads);

struct TrainStepRecord {
    int step = 0;
    double tau = 0.0;
    double loss = 0.0;
    double loss_rec = 0.0;
    double loss_sparsity = 0.0;
    double loss_usage = 0.0;
};

struct TrainLog {
    std::vector<TrainStepRecord> steps;
    std::vector<long> usage_histogram; // per-channel label counts after training
    double usage_indicator_final = 0.0;
    double final_loss_rec = 0.0; // noise-free full-dataset reconstruction loss
};

/// Fresh model with embeddings in [-1e-4, 1e-4] and Kaiming-uniform MLP
/// weights, drawn from rng in a fixed order (embeddings first, then W1..W4).
DisentangleModel init_model(const NetConfig& config, const BoundingTransform& normalization,
                            Rng& rng);

/// Global-space conversion, target building, and minibatch Adam for
/// config.total_steps with linear temperature annealing. Deterministic given
/// config.seed. Throws NumericalOverflowError if the loss diverges.
DisentangleModel train(const Avatar& avatar, const NetConfig& config, TrainLog* log = nullptr);

/// Noise-free channel labels: argmax of softmax(z) with ties broken toward
/// the lowest index.
std::vector<int> assign_segments(const DisentangleModel& model, const Avatar& avatar);

} // namespace splatpart
