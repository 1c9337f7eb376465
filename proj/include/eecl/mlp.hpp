#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "eecl/math.hpp"

namespace eecl {

// Output layer nonlinearity. Hidden layers are always ReLU.
enum class OutputActivation {
    identity,      // unbounded outputs (critics)
    bounded_tanh,  // bound * tanh(z), outputs in [-bound, bound] (actor)
};

struct MlpGradients {
    std::vector<Eigen::MatrixXd> w;
    std::vector<Eigen::VectorXd> b;
};

// Dense multilayer perceptron with explicit backpropagation.
//
// Layer k maps size[k] -> size[k+1] with weight (size[k+1] x size[k]) and
// bias size[k+1]. Batched calls place one sample per column. All math is
// double precision.
class Mlp {
public:
    Mlp() = default;

    Mlp(std::vector<int> layer_sizes, OutputActivation output_activation,
        double output_bound, std::uint64_t seed)
        : sizes_(std::move(layer_sizes)),
          out_act_(output_activation),
          out_bound_(output_bound) {
        if (sizes_.size() < 2)
            throw std::invalid_argument("Mlp: need at least input and output layer sizes");
        for (int s : sizes_)
            if (s <= 0) throw std::invalid_argument("Mlp: layer sizes must be positive");
        if (out_act_ == OutputActivation::bounded_tanh && out_bound_ <= 0.0)
            throw std::invalid_argument("Mlp: tanh output bound must be positive");

        // Uniform [-1/sqrt(fan_in), 1/sqrt(fan_in)] weights, zero biases.
        std::mt19937_64 rng(seed);
        for (std::size_t k = 0; k + 1 < sizes_.size(); ++k) {
            const int rows = sizes_[k + 1];
            const int cols = sizes_[k];
            const double bound = 1.0 / std::sqrt(static_cast<double>(cols));
            std::uniform_real_distribution<double> dist(-bound, bound);
            Eigen::MatrixXd w(rows, cols);
            for (int r = 0; r < rows; ++r)
                for (int c = 0; c < cols; ++c) w(r, c) = dist(rng);
            w_.push_back(std::move(w));
            b_.emplace_back(Eigen::VectorXd::Zero(rows));
        }
    }

    int input_dim() const { return sizes_.front(); }
    int output_dim() const { return sizes_.back(); }
    std::size_t num_layers() const { return w_.size(); }
    const std::vector<int>& layer_sizes() const { return sizes_; }
    OutputActivation output_activation() const { return out_act_; }
    double output_bound() const { return out_bound_; }

    const std::vector<Eigen::MatrixXd>& weights() const { return w_; }
    const std::vector<Eigen::VectorXd>& biases() const { return b_; }
    std::vector<Eigen::MatrixXd>& weights() { return w_; }
    std::vector<Eigen::VectorXd>& biases() { return b_; }

    bool same_architecture(const Mlp& other) const {
        return sizes_ == other.sizes_ && out_act_ == other.out_act_ &&
               out_bound_ == other.out_bound_;
    }

    // Activations from the forward pass, kept for the backward pass.
    // pre[k] and act[k] hold layer k's pre- and post-activation columns.
    struct ForwardCache {
        Eigen::MatrixXd input;
        std::vector<Eigen::MatrixXd> pre;
        std::vector<Eigen::MatrixXd> act;
    };

    // X has one sample per column (input_dim x N). Returns output_dim x N.
    Eigen::MatrixXd forward_batch(const Eigen::MatrixXd& X, ForwardCache* cache = nullptr) const {
        if (X.rows() != input_dim())
            throw std::invalid_argument("Mlp::forward_batch: input has " +
                                        std::to_string(X.rows()) + " rows, expected " +
                                        std::to_string(input_dim()));
        if (cache) {
            cache->input = X;
            cache->pre.resize(w_.size());
            cache->act.resize(w_.size());
        }
        Eigen::MatrixXd a = X;
        for (std::size_t k = 0; k < w_.size(); ++k) {
            Eigen::MatrixXd z(w_[k].rows(), a.cols());
            z.noalias() = w_[k] * a;
            z.colwise() += b_[k];
            if (cache) cache->pre[k] = z;
            if (k + 1 < w_.size()) {
                a = z.cwiseMax(0.0);
            } else {
                a = apply_output_activation(z);
            }
            if (cache) cache->act[k] = a;
        }
        return a;
    }

    Vec forward(const Vec& input) const {
        check_input(input);
        Eigen::MatrixXd X = Eigen::Map<const Eigen::VectorXd>(input.data(), input.size());
        Eigen::MatrixXd out = forward_batch(X);
        return Vec(out.data(), out.data() + out.rows());
    }

    // Gradients of sum_n upstream(:,n) . output(:,n) with respect to the
    // parameters (if param_grads) and the inputs (if input_grad). The input
    // gradient is what the actor update chains through the critic.
    void backward_batch(const ForwardCache& cache, const Eigen::MatrixXd& upstream,
                        MlpGradients* param_grads, Eigen::MatrixXd* input_grad) const {
        const std::size_t L = w_.size();
        if (upstream.rows() != output_dim() || upstream.cols() != cache.input.cols())
            throw std::invalid_argument("Mlp::backward_batch: upstream gradient shape mismatch");
        if (param_grads) {
            param_grads->w.resize(L);
            param_grads->b.resize(L);
        }

        Eigen::MatrixXd delta = upstream.cwiseProduct(output_activation_grad(cache.pre[L - 1], cache.act[L - 1]));
        for (std::size_t k = L; k-- > 0;) {
            const Eigen::MatrixXd& below = (k == 0) ? cache.input : cache.act[k - 1];
            if (param_grads) {
                param_grads->w[k].noalias() = delta * below.transpose();
                param_grads->b[k] = delta.rowwise().sum();
            }
            if (k > 0) {
                Eigen::MatrixXd next(w_[k].cols(), delta.cols());
                next.noalias() = w_[k].transpose() * delta;
                delta = next.cwiseProduct((cache.pre[k - 1].array() > 0.0).cast<double>().matrix());
            } else if (input_grad) {
                input_grad->noalias() = w_[0].transpose() * delta;
            }
        }
    }

    // Single-sample convenience form: gradients of upstream . output.
    std::pair<MlpGradients, Vec> backward(const Vec& input, const Vec& upstream) const {
        check_input(input);
        if (static_cast<int>(upstream.size()) != output_dim())
            throw std::invalid_argument("Mlp::backward: upstream gradient length mismatch");
        ForwardCache cache;
        Eigen::MatrixXd X = Eigen::Map<const Eigen::VectorXd>(input.data(), input.size());
        forward_batch(X, &cache);
        Eigen::MatrixXd U = Eigen::Map<const Eigen::VectorXd>(upstream.data(), upstream.size());
        MlpGradients grads;
        Eigen::MatrixXd dX;
        backward_batch(cache, U, &grads, &dX);
        return {std::move(grads), Vec(dX.data(), dX.data() + dX.rows())};
    }

private:
    void check_input(const Vec& input) const {
        if (static_cast<int>(input.size()) != input_dim())
            throw std::invalid_argument("Mlp: input has length " + std::to_string(input.size()) +
                                        ", expected " + std::to_string(input_dim()));
    }

    Eigen::MatrixXd apply_output_activation(const Eigen::MatrixXd& z) const {
        switch (out_act_) {
            case OutputActivation::identity:
                return z;
            case OutputActivation::bounded_tanh:
                return out_bound_ * z.array().tanh();
        }
        throw std::logic_error("Mlp: unknown output activation");
    }

    // d(output)/d(pre-activation) at the output layer.
    Eigen::MatrixXd output_activation_grad(const Eigen::MatrixXd& z, const Eigen::MatrixXd& out) const {
        switch (out_act_) {
            case OutputActivation::identity:
                return Eigen::MatrixXd::Ones(z.rows(), z.cols());
            case OutputActivation::bounded_tanh:
                // b * (1 - tanh(z)^2) == b - out^2 / b
                return (out_bound_ - out.array().square() / out_bound_).matrix();
        }
        throw std::logic_error("Mlp: unknown output activation");
    }

    std::vector<int> sizes_;
    std::vector<Eigen::MatrixXd> w_;
    std::vector<Eigen::VectorXd> b_;
    OutputActivation out_act_ = OutputActivation::identity;
    double out_bound_ = 1.0;
};

// Polyak tracking: every target parameter becomes tau*online + (1-tau)*target.
inline void soft_update(Mlp& target, const Mlp& online, double tau) {
    if (!target.same_architecture(online))
        throw std::invalid_argument("soft_update: architecture mismatch");
    if (tau < 0.0 || tau > 1.0)
        throw std::invalid_argument("soft_update: tau must be in [0, 1]");
    for (std::size_t k = 0; k < target.weights().size(); ++k) {
        target.weights()[k] = tau * online.weights()[k] + (1.0 - tau) * target.weights()[k];
        target.biases()[k] = tau * online.biases()[k] + (1.0 - tau) * target.biases()[k];
    }
}

}  // namespace eecl
