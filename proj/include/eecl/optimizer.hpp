#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "eecl/mlp.hpp"

namespace eecl {

// Adam / AdamW over the parameters of one Mlp. Moment tensors shape-match the
// network they were constructed for. AdamW applies decoupled weight decay
// (directly to the parameters, not through the gradient).
class Optimizer {
public:
    enum class Kind { adam, adamw };

    Optimizer() = default;

    Optimizer(Kind kind, const Mlp& net, double learning_rate, double weight_decay = 0.0,
              double beta1 = 0.9, double beta2 = 0.999, double eps_hat = 1e-8)
        : kind_(kind), lr_(learning_rate), beta1_(beta1), beta2_(beta2),
          eps_(eps_hat), weight_decay_(weight_decay) {
        if (lr_ <= 0.0) throw std::invalid_argument("Optimizer: learning rate must be positive");
        if (weight_decay_ < 0.0) throw std::invalid_argument("Optimizer: weight decay must be non-negative");
        if (kind_ == Kind::adam && weight_decay_ != 0.0)
            throw std::invalid_argument("Optimizer: weight decay requires AdamW");
        for (std::size_t k = 0; k < net.weights().size(); ++k) {
            mw_.emplace_back(Eigen::MatrixXd::Zero(net.weights()[k].rows(), net.weights()[k].cols()));
            vw_.emplace_back(Eigen::MatrixXd::Zero(net.weights()[k].rows(), net.weights()[k].cols()));
            mb_.emplace_back(Eigen::VectorXd::Zero(net.biases()[k].size()));
            vb_.emplace_back(Eigen::VectorXd::Zero(net.biases()[k].size()));
        }
    }

    void step(Mlp& net, const MlpGradients& grads) {
        if (grads.w.size() != mw_.size() || grads.b.size() != mb_.size())
            throw std::invalid_argument("Optimizer::step: gradient layer count mismatch");
        for (std::size_t k = 0; k < mw_.size(); ++k) {
            if (grads.w[k].rows() != mw_[k].rows() || grads.w[k].cols() != mw_[k].cols() ||
                grads.b[k].size() != mb_[k].size())
                throw std::invalid_argument("Optimizer::step: gradient shape mismatch at layer " +
                                            std::to_string(k));
            if (!grads.w[k].allFinite() || !grads.b[k].allFinite())
                throw std::runtime_error("Optimizer::step: non-finite gradient at layer " +
                                         std::to_string(k) + " (step " + std::to_string(step_count_ + 1) + ")");
        }
        ++step_count_;
        const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(step_count_));
        const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(step_count_));
        for (std::size_t k = 0; k < mw_.size(); ++k) {
            update(net.weights()[k], grads.w[k], mw_[k], vw_[k], bc1, bc2);
            update(net.biases()[k], grads.b[k], mb_[k], vb_[k], bc1, bc2);
        }
    }

    Kind kind() const { return kind_; }
    std::int64_t step_count() const { return step_count_; }
    double learning_rate() const { return lr_; }
    double beta1() const { return beta1_; }
    double beta2() const { return beta2_; }
    double eps_hat() const { return eps_; }
    double weight_decay() const { return weight_decay_; }

    const std::vector<Eigen::MatrixXd>& weight_first_moments() const { return mw_; }
    const std::vector<Eigen::MatrixXd>& weight_second_moments() const { return vw_; }
    const std::vector<Eigen::VectorXd>& bias_first_moments() const { return mb_; }
    const std::vector<Eigen::VectorXd>& bias_second_moments() const { return vb_; }

    // Checkpoint restore; shapes must match the construction-time network.
    void restore_state(std::int64_t step_count,
                       std::vector<Eigen::MatrixXd> mw, std::vector<Eigen::MatrixXd> vw,
                       std::vector<Eigen::VectorXd> mb, std::vector<Eigen::VectorXd> vb) {
        if (mw.size() != mw_.size() || vw.size() != vw_.size() ||
            mb.size() != mb_.size() || vb.size() != vb_.size())
            throw std::invalid_argument("Optimizer::restore_state: layer count mismatch");
        for (std::size_t k = 0; k < mw_.size(); ++k)
            if (mw[k].rows() != mw_[k].rows() || mw[k].cols() != mw_[k].cols() ||
                vw[k].rows() != vw_[k].rows() || vw[k].cols() != vw_[k].cols() ||
                mb[k].size() != mb_[k].size() || vb[k].size() != vb_[k].size())
                throw std::invalid_argument("Optimizer::restore_state: moment shape mismatch");
        step_count_ = step_count;
        mw_ = std::move(mw);
        vw_ = std::move(vw);
        mb_ = std::move(mb);
        vb_ = std::move(vb);
    }

private:
    template <typename Param, typename Grad, typename Moment>
    void update(Param&& p, const Grad& g, Moment& m, Moment& v, double bc1, double bc2) {
        // Decoupled decay uses the pre-update parameter value.
        if (kind_ == Kind::adamw && weight_decay_ != 0.0) p -= (lr_ * weight_decay_) * p;
        m = beta1_ * m + (1.0 - beta1_) * g;
        v = beta2_ * v + (1.0 - beta2_) * g.cwiseProduct(g);
        p.array() -= lr_ * (m.array() / bc1) / ((v.array() / bc2).sqrt() + eps_);
    }

    Kind kind_ = Kind::adam;
    std::int64_t step_count_ = 0;
    double lr_ = 1e-3;
    double beta1_ = 0.9;
    double beta2_ = 0.999;
    double eps_ = 1e-8;
    double weight_decay_ = 0.0;
    std::vector<Eigen::MatrixXd> mw_, vw_;
    std::vector<Eigen::VectorXd> mb_, vb_;
};

}  // namespace eecl
