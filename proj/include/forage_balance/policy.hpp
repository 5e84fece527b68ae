#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "error.hpp"
#include "level.hpp"
#include "rng.hpp"

namespace forage {

/// Shape of the policy/value network: one tanh hidden layer shared by a
/// softmax policy head and a scalar value head.
struct PolicyArchitecture {
    int input_dim = 0;
    int hidden = 128;
    int action_dim = 2;

    int parameter_count() const noexcept
    {
        return hidden * input_dim + hidden + action_dim * hidden + action_dim + hidden + 1;
    }

    friend bool operator==(const PolicyArchitecture&, const PolicyArchitecture&) = default;
};

/// Flattens an observation for the network. For every cursor plane the tile
/// type under the cursor is appended as a one-hot block, so swap decisions can
/// depend on the selected pair without learning a cell-by-cell conjunction.
inline std::vector<double> policy_features(const ObservationTensor& obs, int tile_channels)
{
    const int cursors = obs.channels - tile_channels;
    std::vector<double> x;
    x.reserve(obs.data.size() + static_cast<std::size_t>(cursors * tile_channels));
    for (float v : obs.data)
        x.push_back(v);
    for (int k = 0; k < cursors; ++k) {
        std::vector<double> under(static_cast<std::size_t>(tile_channels), 0.0);
        for (int r = 0; r < obs.height; ++r)
            for (int c = 0; c < obs.width; ++c)
                if (obs.at(r, c, tile_channels + k) != 0.0f)
                    for (int ch = 0; ch < tile_channels; ++ch)
                        under[static_cast<std::size_t>(ch)] += obs.at(r, c, ch);
        x.insert(x.end(), under.begin(), under.end());
    }
    return x;
}

inline int policy_input_dim(int height, int width, int tile_channels, int cursor_channels)
{
    return height * width * (tile_channels + cursor_channels) + cursor_channels * tile_channels;
}

struct PolicyOutput {
    Eigen::VectorXd hidden;
    Eigen::VectorXd logits;
    Eigen::VectorXd probs;
    Eigen::VectorXd log_probs;
    double value = 0.0;
};

/// Parameters live in one flat vector (W1, b1, Wp, bp, Wv, bv) so optimizers
/// and finite-difference checks can treat them uniformly.
class PolicyNetwork {
public:
    PolicyNetwork() = default;

    explicit PolicyNetwork(PolicyArchitecture arch) : arch_(arch)
    {
        if (arch.input_dim < 1 || arch.hidden < 1 || arch.action_dim < 1)
            throw InvalidArgument("policy dimensions must be positive");
        params_.assign(static_cast<std::size_t>(arch.parameter_count()), 0.0);
    }

    PolicyNetwork(PolicyArchitecture arch, std::vector<double> params) : arch_(arch), params_(std::move(params))
    {
        if (static_cast<int>(params_.size()) != arch_.parameter_count())
            throw InvalidArgument("parameter vector does not match architecture");
    }

    static PolicyNetwork initialized(PolicyArchitecture arch, std::uint64_t seed)
    {
        PolicyNetwork net(arch);
        Rng rng(seed);
        auto fill = [&](double* p, int count, double scale) {
            for (int i = 0; i < count; ++i)
                p[i] = rng.normal() * scale;
        };
        fill(net.w1().data(), arch.hidden * arch.input_dim, 1.0 / std::sqrt(static_cast<double>(arch.input_dim)));
        fill(net.wp().data(), arch.action_dim * arch.hidden, 0.01 / std::sqrt(static_cast<double>(arch.hidden)));
        fill(net.wv().data(), arch.hidden, 1.0 / std::sqrt(static_cast<double>(arch.hidden)));
        return net;
    }

    const PolicyArchitecture& architecture() const noexcept { return arch_; }
    std::vector<double>& parameters() noexcept { return params_; }
    const std::vector<double>& parameters() const noexcept { return params_; }

    using MatMap = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
    using ConstMatMap = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
    using VecMap = Eigen::Map<Eigen::VectorXd>;
    using ConstVecMap = Eigen::Map<const Eigen::VectorXd>;

    MatMap w1() { return {ptr(off_w1()), arch_.hidden, arch_.input_dim}; }
    VecMap b1() { return {ptr(off_b1()), arch_.hidden}; }
    MatMap wp() { return {ptr(off_wp()), arch_.action_dim, arch_.hidden}; }
    VecMap bp() { return {ptr(off_bp()), arch_.action_dim}; }
    MatMap wv() { return {ptr(off_wv()), 1, arch_.hidden}; }
    ConstMatMap w1() const { return {cptr(off_w1()), arch_.hidden, arch_.input_dim}; }
    ConstVecMap b1() const { return {cptr(off_b1()), arch_.hidden}; }
    ConstMatMap wp() const { return {cptr(off_wp()), arch_.action_dim, arch_.hidden}; }
    ConstVecMap bp() const { return {cptr(off_bp()), arch_.action_dim}; }
    ConstMatMap wv() const { return {cptr(off_wv()), 1, arch_.hidden}; }
    double bv() const { return params_[static_cast<std::size_t>(off_bv())]; }

    PolicyOutput forward(std::span<const double> input) const
    {
        if (static_cast<int>(input.size()) != arch_.input_dim)
            throw InvalidArgument("policy input has " + std::to_string(input.size()) + " features, expected " +
                                  std::to_string(arch_.input_dim));
        const ConstVecMap x(input.data(), arch_.input_dim);
        PolicyOutput out;
        out.hidden = (w1() * x + b1()).array().tanh();
        out.logits = wp() * out.hidden + bp();
        const double m = out.logits.maxCoeff();
        const double lse = m + std::log((out.logits.array() - m).exp().sum());
        out.log_probs = out.logits.array() - lse;
        out.probs = out.log_probs.array().exp();
        out.value = (wv() * out.hidden)(0) + bv();
        return out;
    }

    int greedy_action(std::span<const double> input) const
    {
        const PolicyOutput out = forward(input);
        Eigen::Index best = 0;
        out.probs.maxCoeff(&best);
        return static_cast<int>(best);
    }

    int sample_action(std::span<const double> input, Rng& rng) const { return sample_from(forward(input).probs, rng); }

    static int sample_from(const Eigen::VectorXd& probs, Rng& rng)
    {
        double u = rng.uniform01();
        for (Eigen::Index i = 0; i < probs.size(); ++i) {
            u -= probs(i);
            if (u < 0.0)
                return static_cast<int>(i);
        }
        return static_cast<int>(probs.size() - 1);
    }

    int off_w1() const noexcept { return 0; }
    int off_b1() const noexcept { return off_w1() + arch_.hidden * arch_.input_dim; }
    int off_wp() const noexcept { return off_b1() + arch_.hidden; }
    int off_bp() const noexcept { return off_wp() + arch_.action_dim * arch_.hidden; }
    int off_wv() const noexcept { return off_bp() + arch_.action_dim; }
    int off_bv() const noexcept { return off_wv() + arch_.hidden; }

private:
    double* ptr(int off) { return params_.data() + off; }
    const double* cptr(int off) const { return params_.data() + off; }

    PolicyArchitecture arch_{};
    std::vector<double> params_;
};

struct PpoCoefficients {
    double clip_epsilon = 0.2;
    double value_coef = 0.5;
    double entropy_coef = 0.01;
};

/// One stored transition as seen by the update.
struct PpoSample {
    std::vector<double> input;
    int action = 0;
    double old_log_prob = 0.0;
    double advantage = 0.0;
    double return_target = 0.0;
};

struct PpoLoss {
    double total = 0.0;
    double policy = 0.0;
    double value = 0.0;
    double entropy = 0.0;
    double clip_fraction = 0.0;
};

/// Clipped-surrogate loss, mean over the minibatch:
///   -min(r A, clip(r, 1-eps, 1+eps) A) + c_v (V - R)^2 - c_e H(pi)
/// with r = pi(a|s) / pi_old(a|s). When `grad` is non-null it receives the
/// analytic gradient with respect to the flat parameter vector.
inline PpoLoss ppo_loss(const PolicyNetwork& net, std::span<const PpoSample* const> batch, const PpoCoefficients& coef,
                        std::vector<double>* grad = nullptr)
{
    if (batch.empty())
        throw InvalidArgument("empty minibatch");
    const PolicyArchitecture& arch = net.architecture();
    const double inv_m = 1.0 / static_cast<double>(batch.size());

    Eigen::MatrixXd g_w1;
    Eigen::VectorXd g_b1;
    Eigen::MatrixXd g_wp;
    Eigen::VectorXd g_bp;
    Eigen::VectorXd g_wv;
    double g_bv = 0.0;
    if (grad) {
        g_w1.setZero(arch.hidden, arch.input_dim);
        g_b1.setZero(arch.hidden);
        g_wp.setZero(arch.action_dim, arch.hidden);
        g_bp.setZero(arch.action_dim);
        g_wv.setZero(arch.hidden);
    }

    PpoLoss loss;
    for (const PpoSample* s : batch) {
        const PolicyOutput out = net.forward(s->input);
        const double log_p = out.log_probs(s->action);
        const double ratio = std::exp(log_p - s->old_log_prob);
        const double clipped = std::clamp(ratio, 1.0 - coef.clip_epsilon, 1.0 + coef.clip_epsilon);
        const double unclipped_term = ratio * s->advantage;
        const double clipped_term = clipped * s->advantage;
        const bool unclipped_active = unclipped_term <= clipped_term;
        const double surrogate = unclipped_active ? unclipped_term : clipped_term;
        const double entropy = -(out.probs.array() * out.log_probs.array()).sum();
        const double verr = out.value - s->return_target;

        loss.policy += -surrogate * inv_m;
        loss.value += verr * verr * inv_m;
        loss.entropy += entropy * inv_m;
        loss.clip_fraction += (unclipped_active ? 0.0 : 1.0) * inv_m;

        if (!grad)
            continue;
        // d(-surrogate)/d log_p is -r A on the unclipped branch and 0 once clipped.
        const double d_logp = unclipped_active ? -unclipped_term : 0.0;
        Eigen::VectorXd d_logits = -d_logp * out.probs;
        d_logits(s->action) += d_logp;
        // dH/dz_j = -p_j (log p_j + H); the loss carries -c_e H.
        d_logits.array() += coef.entropy_coef * out.probs.array() * (out.log_probs.array() + entropy);
        d_logits *= inv_m;
        const double d_value = 2.0 * coef.value_coef * verr * inv_m;

        g_wp.noalias() += d_logits * out.hidden.transpose();
        g_bp += d_logits;
        g_wv += d_value * out.hidden;
        g_bv += d_value;
        Eigen::VectorXd d_hidden = net.wp().transpose() * d_logits + net.wv().transpose() * d_value;
        d_hidden.array() *= 1.0 - out.hidden.array().square();
        const Eigen::Map<const Eigen::VectorXd> x(s->input.data(), arch.input_dim);
        g_w1.noalias() += d_hidden * x.transpose();
        g_b1 += d_hidden;
    }
    loss.total = loss.policy + coef.value_coef * loss.value - coef.entropy_coef * loss.entropy;

    if (grad) {
        grad->assign(static_cast<std::size_t>(arch.parameter_count()), 0.0);
        double* g = grad->data();
        Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(g + net.off_w1(), arch.hidden,
                                                                                           arch.input_dim) = g_w1;
        Eigen::Map<Eigen::VectorXd>(g + net.off_b1(), arch.hidden) = g_b1;
        Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(g + net.off_wp(), arch.action_dim,
                                                                                           arch.hidden) = g_wp;
        Eigen::Map<Eigen::VectorXd>(g + net.off_bp(), arch.action_dim) = g_bp;
        Eigen::Map<Eigen::VectorXd>(g + net.off_wv(), arch.hidden) = g_wv;
        g[net.off_bv()] = g_bv;
    }
    return loss;
}

/// Adam with optional global gradient-norm clipping. A zero learning rate
/// leaves parameters untouched bit for bit.
class AdamOptimizer {
public:
    AdamOptimizer(std::size_t size, double learning_rate, double max_grad_norm = 0.5)
        : lr_(learning_rate), max_norm_(max_grad_norm), m_(size, 0.0), v_(size, 0.0)
    {
    }

    void step(std::vector<double>& params, std::vector<double> grad)
    {
        if (max_norm_ > 0.0) {
            double sq = 0.0;
            for (double g : grad)
                sq += g * g;
            const double norm = std::sqrt(sq);
            if (norm > max_norm_)
                for (double& g : grad)
                    g *= max_norm_ / norm;
        }
        ++t_;
        const double c1 = 1.0 - std::pow(beta1_, t_);
        const double c2 = 1.0 - std::pow(beta2_, t_);
        for (std::size_t i = 0; i < params.size(); ++i) {
            m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grad[i];
            v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grad[i] * grad[i];
            params[i] -= lr_ * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps_);
        }
    }

private:
    double lr_;
    double max_norm_;
    double beta1_ = 0.9;
    double beta2_ = 0.999;
    double eps_ = 1e-8;
    int t_ = 0;
    std::vector<double> m_;
    std::vector<double> v_;
};

} // namespace forage
