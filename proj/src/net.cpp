/* SPDX-License-Identifier: Apache-2.0 */
#include "splatpart/net.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace splatpart {

double NetConfig::tau_at(int step) const {
    int anneal = temperature.anneal_steps;
    if (anneal <= 0) {
        anneal = total_steps / 2;
    }
    if (anneal <= 0) {
        return temperature.tau_end;
    }
    const double frac = std::min(1.0, static_cast<double>(step) / anneal);
    return temperature.tau_start + (temperature.tau_end - temperature.tau_start) * frac;
}

void NetConfig::validate() const {
    if (bottleneck_size < 3 || bottleneck_size > 7) {
        throw InvalidArgumentError("bottleneck_size must be in [3, 7]");
    }
    if (hidden_dim < 1 || output_dim < 1) {
        throw InvalidArgumentError("hidden_dim and output_dim must be positive");
    }
    if (temperature.tau_start <= 0.0 || temperature.tau_end <= 0.0) {
        throw InvalidArgumentError("temperature values must be > 0");
    }
    if (lambda_usage < 0.0 || lambda_sparsity < 0.0) {
        throw InvalidArgumentError("loss weights must be >= 0");
    }
    if (batch_size < 1 || total_steps < 0) {
        throw InvalidArgumentError("batch_size must be >= 1 and total_steps >= 0");
    }
    if (encoder_kind == EncoderKind::HashGrid) {
        hash.validate();
    }
}

std::vector<TrainingTarget> build_targets(const Avatar& avatar_global) {
    if (avatar_global.space != CoordinateSpace::Global) {
        throw InvalidArgumentError("build_targets expects an avatar in global space");
    }
    std::vector<TrainingTarget> out;
    out.reserve(avatar_global.gaussians.size());
    for (std::size_t i = 0; i < avatar_global.gaussians.size(); ++i) {
        const GaussianComponent& g = avatar_global.gaussians[i];
        const double scale_norm = g.scale.norm();
        if (!(scale_norm > 0.0)) {
            throw ZeroScaleError("gaussian " + std::to_string(i) + " has zero-norm scale");
        }
        TrainingTarget t;
        const Eigen::Vector4d q = quat_normalized(g.rot);
        const Eigen::Vector3d s = g.scale / scale_norm;
        const ShVector sh = g.sh.cwiseMax(-kShClip).cwiseMin(kShClip);

        t.feature.segment<4>(0) = q;
        t.feature.segment<3>(4) = s;
        t.feature[7] = g.opacity;
        t.feature.segment<kShDim>(8) = sh;

        t.target.segment<3>(0) = s;
        t.target[3] = g.opacity;
        t.target.segment<kShDim>(4) = sh;
        out.push_back(t);
    }
    return out;
}

Eigen::VectorXd softmax_tempered(const Eigen::VectorXd& logits, double tau) {
    if (!(tau > 0.0)) {
        throw InvalidArgumentError("softmax temperature must be > 0");
    }
    const double m = logits.maxCoeff();
    Eigen::VectorXd v = ((logits.array() - m) / tau).exp();
    v /= v.sum();
    // Positivity guard against exponent underflow on extreme logits.
    v = v.cwiseMax(1e-300);
    return v;
}

Eigen::VectorXd gumbel_softmax(const Eigen::VectorXd& z, double tau, Rng& rng) {
    if (!(tau > 0.0)) {
        throw InvalidArgumentError("gumbel_softmax temperature must be > 0");
    }
    Eigen::VectorXd noisy = z;
    for (Eigen::Index i = 0; i < z.size(); ++i) {
        noisy[i] += rng.gumbel();
    }
    return softmax_tempered(noisy, tau);
}

double loss_reconstruction(const Eigen::VectorXd& yhat, const Eigen::VectorXd& target) {
    if (yhat.size() != target.size()) {
        throw InvalidArgumentError("loss_reconstruction: dimension mismatch");
    }
    return (yhat - target).squaredNorm() / static_cast<double>(yhat.size());
}

namespace {

inline double entropy_term(double p) { return p > 0.0 ? -p * std::log(p) : 0.0; }

} // namespace

double loss_sparsity(const Eigen::MatrixXd& probs) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < probs.rows(); ++i) {
        double row_sum = 0.0;
        double h = 0.0;
        for (Eigen::Index j = 0; j < probs.cols(); ++j) {
            const double p = probs(i, j);
            if (p < 0.0) {
                throw InvalidArgumentError("loss_sparsity: negative probability");
            }
            row_sum += p;
            h += entropy_term(p);
        }
        if (std::abs(row_sum - 1.0) > 1e-6) {
            throw InvalidArgumentError("loss_sparsity: row " + std::to_string(i) +
                                       " is not normalized");
        }
        total += h;
    }
    return total / static_cast<double>(probs.rows());
}

double loss_usage(const Eigen::MatrixXd& probs) {
    if (probs.rows() < 1) {
        throw InvalidArgumentError("loss_usage: empty batch");
    }
    const Eigen::VectorXd u = probs.colwise().mean().transpose();
    double h = 0.0;
    for (Eigen::Index j = 0; j < u.size(); ++j) {
        h += entropy_term(u[j]);
    }
    return std::log(static_cast<double>(probs.cols())) - h;
}

double usage_indicator(const Eigen::MatrixXd& probs) {
    if (probs.rows() < 1) {
        throw InvalidArgumentError("usage_indicator: empty batch");
    }
    Eigen::VectorXd u = Eigen::VectorXd::Zero(probs.cols());
    for (Eigen::Index i = 0; i < probs.rows(); ++i) {
        Eigen::Index best = 0;
        for (Eigen::Index j = 1; j < probs.cols(); ++j) {
            if (probs(i, j) > probs(i, best)) {
                best = j;
            }
        }
        u[best] += 1.0;
    }
    u /= static_cast<double>(probs.rows());
    double h = 0.0;
    for (Eigen::Index j = 0; j < u.size(); ++j) {
        h += entropy_term(u[j]);
    }
    return std::log(static_cast<double>(probs.cols())) - h;
}

Gradients::Gradients(const NetConfig& config)
    : W1(Eigen::MatrixXd::Zero(config.hidden_dim, config.input_dim())),
      W2(Eigen::MatrixXd::Zero(config.hidden_dim, config.hidden_dim)),
      W3(Eigen::MatrixXd::Zero(config.bottleneck_size, config.hidden_dim)),
      W4(Eigen::MatrixXd::Zero(config.output_dim, config.bottleneck_size)),
      b1(Eigen::VectorXd::Zero(config.hidden_dim)),
      b2(Eigen::VectorXd::Zero(config.hidden_dim)),
      b3(Eigen::VectorXd::Zero(config.bottleneck_size)),
      b4(Eigen::VectorXd::Zero(config.output_dim)),
      hash(config.encoder_kind == EncoderKind::HashGrid ? config.hash : HashGridConfig{1, 1, 1, 1, 2.0}) {}

BatchEval eval_batch(const DisentangleModel& model, const Eigen::MatrixXd& positions_unit,
                     const Eigen::MatrixXd& targets, double tau,
                     const Eigen::MatrixXd* gumbel_noise, Gradients* grads) {
    const NetConfig& cfg = model.config;
    const Eigen::Index B = positions_unit.rows();
    const int k = cfg.bottleneck_size;
    const bool hash = cfg.encoder_kind == EncoderKind::HashGrid;
    const double softmax_scale = gumbel_noise ? 1.0 / tau : 1.0;

    if (targets.rows() != B || targets.cols() != cfg.output_dim) {
        throw InvalidArgumentError("eval_batch: target shape mismatch");
    }
    if (gumbel_noise && (gumbel_noise->rows() != B || gumbel_noise->cols() != k)) {
        throw InvalidArgumentError("eval_batch: noise shape mismatch");
    }
    if (gumbel_noise && !(tau > 0.0)) {
        throw InvalidArgumentError("eval_batch: temperature must be > 0");
    }

    // Encoder.
    Eigen::MatrixXd X(B, cfg.input_dim());
    std::vector<EncodeCache> caches;
    if (hash && grads) {
        caches.resize(B);
    }
    if (hash) {
        for (Eigen::Index i = 0; i < B; ++i) {
            X.row(i) = encode(positions_unit.row(i).transpose(), model.hash_state,
                              grads ? &caches[i] : nullptr);
        }
    } else {
        X = positions_unit;
    }

    // MLP forward.
    Eigen::MatrixXd A1 = (X * model.W1.transpose()).rowwise() + model.b1.transpose();
    Eigen::MatrixXd H1 = A1.cwiseMax(0.0);
    Eigen::MatrixXd A2 = (H1 * model.W2.transpose()).rowwise() + model.b2.transpose();
    Eigen::MatrixXd H2 = A2.cwiseMax(0.0);
    Eigen::MatrixXd Z = (H2 * model.W3.transpose()).rowwise() + model.b3.transpose();

    Eigen::MatrixXd V(B, k);
    for (Eigen::Index i = 0; i < B; ++i) {
        Eigen::VectorXd logits = Z.row(i).transpose();
        if (gumbel_noise) {
            logits += gumbel_noise->row(i).transpose();
        }
        V.row(i) = softmax_tempered(logits, gumbel_noise ? tau : 1.0).transpose();
    }
    Eigen::MatrixXd Yhat = (V * model.W4.transpose()).rowwise() + model.b4.transpose();

    BatchEval ev;
    ev.probs = V;
    ev.loss_rec = (Yhat - targets).squaredNorm() / static_cast<double>(B * cfg.output_dim);
    ev.loss_sparsity = cfg.lambda_sparsity > 0.0 ? loss_sparsity(V) : 0.0;
    ev.loss_usage = cfg.lambda_usage > 0.0 ? loss_usage(V) : 0.0;
    ev.loss = ev.loss_rec + cfg.lambda_sparsity * ev.loss_sparsity +
              cfg.lambda_usage * ev.loss_usage;

    if (!grads) {
        return ev;
    }

    // Backward.
    const double rec_scale = 2.0 / static_cast<double>(B * cfg.output_dim);
    Eigen::MatrixXd dYhat = rec_scale * (Yhat - targets);
    grads->W4.noalias() = dYhat.transpose() * V;
    grads->b4 = dYhat.colwise().sum().transpose();
    Eigen::MatrixXd dV = dYhat * model.W4;

    if (cfg.lambda_sparsity > 0.0) {
        dV.array() += (cfg.lambda_sparsity / B) * (-V.array().log() - 1.0);
    }
    if (cfg.lambda_usage > 0.0) {
        const Eigen::VectorXd u = V.colwise().mean().transpose();
        const Eigen::RowVectorXd du = (cfg.lambda_usage / B) * (u.array().log() + 1.0).matrix().transpose();
        dV.rowwise() += du;
    }

    // Softmax Jacobian per row, with the 1/tau chain factor on the Gumbel path.
    Eigen::VectorXd row_dot = (dV.array() * V.array()).rowwise().sum().matrix();
    Eigen::MatrixXd dZ = softmax_scale * (V.array() * (dV.colwise() - row_dot).array()).matrix();

    grads->W3.noalias() = dZ.transpose() * H2;
    grads->b3 = dZ.colwise().sum().transpose();
    Eigen::MatrixXd dA2 = (dZ * model.W3).cwiseProduct((A2.array() > 0.0).cast<double>().matrix());
    grads->W2.noalias() = dA2.transpose() * H1;
    grads->b2 = dA2.colwise().sum().transpose();
    Eigen::MatrixXd dA1 = (dA2 * model.W2).cwiseProduct((A1.array() > 0.0).cast<double>().matrix());
    grads->W1.noalias() = dA1.transpose() * X;
    grads->b1 = dA1.colwise().sum().transpose();

    if (hash) {
        Eigen::MatrixXd dX = dA1 * model.W1;
        Eigen::VectorXd up(cfg.input_dim());
        for (Eigen::Index i = 0; i < B; ++i) {
            up = dX.row(i).transpose();
            encode_backward_cached(caches[i], up, cfg.hash, grads->hash);
        }
    }
    return ev;
}

ForwardResult forward(const Eigen::Vector3d& position, const DisentangleModel& model,
                      double tau, Rng& rng) {
    const NetConfig& cfg = model.config;
    const Eigen::Vector3d unit = model.normalization.to_unit(position);

    Eigen::VectorXd x;
    if (cfg.encoder_kind == EncoderKind::HashGrid) {
        x = encode(unit, model.hash_state);
    } else {
        x = unit;
    }
    Eigen::VectorXd h1 = (model.W1 * x + model.b1).cwiseMax(0.0);
    Eigen::VectorXd h2 = (model.W2 * h1 + model.b2).cwiseMax(0.0);
    Eigen::VectorXd z = model.W3 * h2 + model.b3;

    Eigen::VectorXd v = cfg.activation_kind == ActivationKind::GumbelSoftmax
                            ? gumbel_softmax(z, tau, rng)
                            : softmax_tempered(z, 1.0);
    Eigen::VectorXd yhat = model.W4 * v + model.b4;

    if (!z.allFinite() || !v.allFinite() || !yhat.allFinite()) {
        throw NumericalOverflowError("forward pass produced non-finite values");
    }
    return {z, v, yhat};
}

namespace {

void fill_kaiming_uniform(Eigen::MatrixXd& w, Rng& rng) {
    const double bound = std::sqrt(6.0 / static_cast<double>(w.cols()));
    // Column-major fill matches Eigen storage; order is part of the
    // determinism contract.
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
        for (Eigen::Index i = 0; i < w.rows(); ++i) {
            w(i, j) = rng.uniform(-bound, bound);
        }
    }
}

} // namespace

DisentangleModel init_model(const NetConfig& config, const BoundingTransform& normalization,
                            Rng& rng) {
    config.validate();
    DisentangleModel m;
    m.config = config;
    m.normalization = normalization;
    if (config.encoder_kind == EncoderKind::HashGrid) {
        m.hash_state = init_hash_grid(config.hash, rng);
    } else {
        m.hash_state.config = config.hash;
    }
    m.W1.resize(config.hidden_dim, config.input_dim());
    m.W2.resize(config.hidden_dim, config.hidden_dim);
    m.W3.resize(config.bottleneck_size, config.hidden_dim);
    m.W4.resize(config.output_dim, config.bottleneck_size);
    fill_kaiming_uniform(m.W1, rng);
    fill_kaiming_uniform(m.W2, rng);
    fill_kaiming_uniform(m.W3, rng);
    fill_kaiming_uniform(m.W4, rng);
    m.b1 = Eigen::VectorXd::Zero(config.hidden_dim);
    m.b2 = Eigen::VectorXd::Zero(config.hidden_dim);
    m.b3 = Eigen::VectorXd::Zero(config.bottleneck_size);
    m.b4 = Eigen::VectorXd::Zero(config.output_dim);
    return m;
}

namespace {

struct AdamTensor {
    Eigen::MatrixXd m, v;

    explicit AdamTensor(const Eigen::MatrixXd& shape_like)
        : m(Eigen::MatrixXd::Zero(shape_like.rows(), shape_like.cols())),
          v(Eigen::MatrixXd::Zero(shape_like.rows(), shape_like.cols())) {}

    void update(Eigen::Ref<Eigen::MatrixXd> w, const Eigen::MatrixXd& g, double lr,
                double beta1, double beta2, double eps, double bc1, double bc2) {
        m = beta1 * m + (1.0 - beta1) * g;
        v = beta2 * v + (1.0 - beta2) * g.cwiseProduct(g);
        w.array() -= lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + eps);
    }
};

struct AdamHash {
    std::vector<Eigen::VectorXd> m, v;

    explicit AdamHash(const HashGridState& state) {
        m.resize(state.embeddings.size());
        v.resize(state.embeddings.size());
        for (std::size_t l = 0; l < state.embeddings.size(); ++l) {
            m[l] = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(state.embeddings[l].size()));
            v[l] = m[l];
        }
    }

    void update(HashGridState& state, const HashGridGrad& g, double lr, double beta1,
                double beta2, double eps, double bc1, double bc2) {
        for (std::size_t l = 0; l < state.embeddings.size(); ++l) {
            Eigen::Map<Eigen::VectorXd> w(state.embeddings[l].data(),
                                          static_cast<Eigen::Index>(state.embeddings[l].size()));
            Eigen::Map<const Eigen::VectorXd> grad(g.tables[l].data(),
                                                   static_cast<Eigen::Index>(g.tables[l].size()));
            m[l] = beta1 * m[l] + (1.0 - beta1) * grad;
            v[l] = beta2 * v[l] + (1.0 - beta2) * grad.cwiseProduct(grad);
            w.array() -= lr * (m[l].array() / bc1) / ((v[l].array() / bc2).sqrt() + eps);
        }
    }
};

} // namespace

DisentangleModel train(const Avatar& avatar, const NetConfig& config, TrainLog* log) {
    config.validate();
    if (avatar.gaussians.empty()) {
        throw InvalidArgumentError("train: avatar has no gaussians");
    }

    const Avatar global = to_global_space(avatar);
    std::vector<Eigen::Vector3d> raw_positions(global.size());
    for (std::size_t i = 0; i < global.size(); ++i) {
        raw_positions[i] = global.gaussians[i].mu;
    }
    std::vector<Eigen::Vector3d> unit_positions;
    const BoundingTransform transform = normalize_positions(raw_positions, &unit_positions);

    const std::vector<TrainingTarget> targets = build_targets(global);
    const Eigen::Index N = static_cast<Eigen::Index>(targets.size());
    Eigen::MatrixXd all_positions(N, 3);
    Eigen::MatrixXd all_targets(N, config.output_dim);
    for (Eigen::Index i = 0; i < N; ++i) {
        all_positions.row(i) = unit_positions[i].transpose();
        all_targets.row(i) = targets[i].target.transpose();
    }

    Rng rng(config.seed);
    DisentangleModel model = init_model(config, transform, rng);

    const bool gumbel = config.activation_kind == ActivationKind::GumbelSoftmax;
    const Eigen::Index B = std::min<Eigen::Index>(config.batch_size, N);

    AdamTensor aW1(model.W1), aW2(model.W2), aW3(model.W3), aW4(model.W4);
    AdamTensor ab1(model.b1), ab2(model.b2), ab3(model.b3), ab4(model.b4);
    AdamHash ahash(model.hash_state);

    Gradients grads(config);
    Eigen::MatrixXd batch_pos(B, 3);
    Eigen::MatrixXd batch_tgt(B, config.output_dim);
    Eigen::MatrixXd noise(B, config.bottleneck_size);

    if (log) {
        log->steps.clear();
        log->steps.reserve(config.total_steps);
    }

    for (int step = 0; step < config.total_steps; ++step) {
        const double tau = config.tau_at(step);

        for (Eigen::Index i = 0; i < B; ++i) {
            const Eigen::Index idx = static_cast<Eigen::Index>(rng.index(N));
            batch_pos.row(i) = all_positions.row(idx);
            batch_tgt.row(i) = all_targets.row(idx);
        }
        if (gumbel) {
            for (Eigen::Index i = 0; i < B; ++i) {
                for (int j = 0; j < config.bottleneck_size; ++j) {
                    noise(i, j) = rng.gumbel();
                }
            }
        }

        grads.hash.set_zero();
        const BatchEval ev = eval_batch(model, batch_pos, batch_tgt, tau,
                                        gumbel ? &noise : nullptr, &grads);
        if (!std::isfinite(ev.loss)) {
            throw NumericalOverflowError("training diverged at step " + std::to_string(step) +
                                         " (loss " + std::to_string(ev.loss) + ")");
        }

        const double t = static_cast<double>(step + 1);
        const double bc1 = 1.0 - std::pow(config.beta1, t);
        const double bc2 = 1.0 - std::pow(config.beta2, t);
        if (config.encoder_kind == EncoderKind::HashGrid) {
            ahash.update(model.hash_state, grads.hash, config.learning_rate_hash,
                         config.beta1, config.beta2, config.adam_eps, bc1, bc2);
        }
        aW1.update(model.W1, grads.W1, config.learning_rate, config.beta1, config.beta2,
                   config.adam_eps, bc1, bc2);
        ab1.update(model.b1, grads.b1, config.learning_rate, config.beta1, config.beta2,
                   config.adam_eps, bc1, bc2);
        aW2.update(model.W2, grads.W2, config.learning_rate, config.beta1, config.beta2,
                   config.adam_eps, bc1, bc2);
        ab2.update(model.b2, grads.b2, config.learning_rate, config.beta1, config.beta2,
                   config.adam_eps, bc1, bc2);
        aW3.update(model.W3, grads.W3, config.learning_rate, config.beta1, config.beta2,
                   config.adam_eps, bc1, bc2);
        ab3.update(model.b3, grads.b3, config.learning_rate, config.beta1, config.beta2,
                   config.adam_eps, bc1, bc2);
        aW4.update(model.W4, grads.W4, config.learning_rate, config.beta1, config.beta2,
                   config.adam_eps, bc1, bc2);
        ab4.update(model.b4, grads.b4, config.learning_rate, config.beta1, config.beta2,
                   config.adam_eps, bc1, bc2);

        if (log) {
            log->steps.push_back({step, tau, ev.loss, ev.loss_rec, ev.loss_sparsity,
                                  ev.loss_usage});
        }
    }

    if (log) {
        const BatchEval full = eval_batch(model, all_positions, all_targets,
                                          1.0, nullptr, nullptr);
        log->usage_histogram.assign(config.bottleneck_size, 0);
        for (Eigen::Index i = 0; i < full.probs.rows(); ++i) {
            Eigen::Index best = 0;
            for (Eigen::Index j = 1; j < full.probs.cols(); ++j) {
                if (full.probs(i, j) > full.probs(i, best)) {
                    best = j;
                }
            }
            ++log->usage_histogram[best];
        }
        log->usage_indicator_final = usage_indicator(full.probs);
        log->final_loss_rec = full.loss_rec;
    }
    return model;
}

std::vector<int> assign_segments(const DisentangleModel& model, const Avatar& avatar) {
    const Avatar global = to_global_space(avatar);
    const Eigen::Index N = static_cast<Eigen::Index>(global.size());
    Eigen::MatrixXd positions(N, 3);
    for (Eigen::Index i = 0; i < N; ++i) {
        positions.row(i) = model.normalization.to_unit(global.gaussians[i].mu).transpose();
    }
    Eigen::MatrixXd dummy_targets = Eigen::MatrixXd::Zero(N, model.config.output_dim);
    const BatchEval ev = eval_batch(model, positions, dummy_targets, 1.0, nullptr, nullptr);

    std::vector<int> labels(N);
    for (Eigen::Index i = 0; i < N; ++i) {
        int best = 0;
        for (int j = 1; j < model.config.bottleneck_size; ++j) {
            if (ev.probs(i, j) > ev.probs(i, best)) {
                best = j;
            }
        }
        labels[i] = best;
    }
    return labels;
}

} // namespace splatpart
