#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "eecl/env.hpp"
#include "eecl/math.hpp"
#include "eecl/mlp.hpp"
#include "eecl/novelty.hpp"
#include "eecl/optimizer.hpp"
#include "eecl/replay.hpp"

namespace eecl {

struct Td3Config {
    int state_dim = 0;             // filled in from the environment
    int action_dim = 0;            // filled in from the environment
    double action_bound = 1.0;     // filled in from the environment
    double discount = 0.99;
    double tau = 0.005;
    int policy_delay = 2;
    int batch_size = 128;
    long long replay_capacity = 1000000;
    double actor_lr = 0.001;
    double critic_lr = 0.001;
    double critic_weight_decay = 0.005;
    double explore_sigma = 0.1;    // exploration noise, in units of action_bound
    double smooth_sigma = 0.2;     // target policy smoothing noise
    double smooth_clip = 0.5;      // smoothing noise clipped to [-c, c]
    long long warmup_steps = 1000;
    long long total_steps = 5000;
    int hidden1 = 400;
    int hidden2 = 300;

    void validate() const {
        if (state_dim <= 0 || action_dim <= 0)
            throw std::invalid_argument("td3: state_dim and action_dim must be positive");
        if (action_bound <= 0.0) throw std::invalid_argument("td3: action_bound must be positive");
        if (discount < 0.0 || discount >= 1.0) throw std::invalid_argument("td3: discount must be in [0, 1)");
        if (tau <= 0.0 || tau > 1.0) throw std::invalid_argument("td3: tau must be in (0, 1]");
        if (policy_delay < 1) throw std::invalid_argument("td3: policy_delay must be positive");
        if (batch_size < 1) throw std::invalid_argument("td3: batch_size must be positive");
        if (replay_capacity < 1) throw std::invalid_argument("td3: replay_capacity must be positive");
        if (actor_lr <= 0.0 || critic_lr <= 0.0) throw std::invalid_argument("td3: learning rates must be positive");
        if (critic_weight_decay < 0.0) throw std::invalid_argument("td3: critic_weight_decay must be non-negative");
        if (explore_sigma < 0.0) throw std::invalid_argument("td3: explore_sigma must be non-negative");
        if (smooth_sigma < 0.0) throw std::invalid_argument("td3: smooth_sigma must be non-negative");
        if (smooth_clip <= 0.0) throw std::invalid_argument("td3: smooth_clip must be positive");
        if (warmup_steps < 0) throw std::invalid_argument("td3: warmup_steps must be non-negative");
        if (total_steps < 0) throw std::invalid_argument("td3: total_steps must be non-negative");
        if (hidden1 < 1 || hidden2 < 1) throw std::invalid_argument("td3: hidden sizes must be positive");
    }
};

// Column-per-sample mini-batch view of sampled transitions.
struct Batch {
    Eigen::MatrixXd s;       // state_dim x N
    Eigen::MatrixXd a;       // action_dim x N
    Eigen::VectorXd r;       // N
    Eigen::MatrixXd s_next;  // state_dim x N
    Eigen::VectorXd done;    // N, 0 or 1

    Eigen::Index size() const { return r.size(); }
};

// Uniform random action in [-bound, bound]^dim for the pure-exploration
// warmup phase.
inline Vec warmup_action(int action_dim, double action_bound, Rng& rng) {
    if (action_dim < 1) throw std::invalid_argument("warmup_action: action_dim must be positive");
    if (action_bound < 0.0) throw std::invalid_argument("warmup_action: action_bound must be non-negative");
    Vec a(action_dim);
    for (double& x : a) x = rng.uniform(-action_bound, action_bound);
    return a;
}

struct StepReport {
    double env_reward = 0.0;
    double bonus = 0.0;
    bool novel = false;
    bool done = false;
    bool trained = false;
    double critic1_loss = 0.0;
    double critic2_loss = 0.0;
    std::optional<double> actor_objective;  // set when the delayed update ran
};

// Twin Delayed DDPG learner: twin critics with clipped-double-Q targets and
// target policy smoothing, a bounded-tanh actor updated every `policy_delay`
// steps through critic 1 only, and Polyak-tracked target copies of all three
// networks. Critics use AdamW, the actor Adam.
class Td3Agent {
public:
    Td3Agent(Td3Config config, std::uint64_t seed)
        : cfg_(validated(config)),
          actor_(actor_sizes(config), OutputActivation::bounded_tanh, config.action_bound,
                 mix_seed(seed, 0xAC70F)),
          critic1_(critic_sizes(config), OutputActivation::identity, 1.0, mix_seed(seed, 0xC7171C1)),
          critic2_(critic_sizes(config), OutputActivation::identity, 1.0, mix_seed(seed, 0xC7171C2)),
          target_actor_(actor_),
          target_critic1_(critic1_),
          target_critic2_(critic2_),
          actor_opt_(Optimizer::Kind::adam, actor_, config.actor_lr),
          critic1_opt_(Optimizer::Kind::adamw, critic1_, config.critic_lr, config.critic_weight_decay),
          critic2_opt_(Optimizer::Kind::adamw, critic2_, config.critic_lr, config.critic_weight_decay),
          replay_(static_cast<std::size_t>(config.replay_capacity)) {}

    const Td3Config& config() const { return cfg_; }
    long long step_count() const { return t_; }
    ReplayBuffer& replay() { return replay_; }
    const ReplayBuffer& replay() const { return replay_; }

    const Mlp& actor() const { return actor_; }
    const Mlp& critic1() const { return critic1_; }
    const Mlp& critic2() const { return critic2_; }
    const Mlp& target_actor() const { return target_actor_; }
    const Mlp& target_critic1() const { return target_critic1_; }
    const Mlp& target_critic2() const { return target_critic2_; }
    Mlp& actor() { return actor_; }
    Mlp& critic1() { return critic1_; }
    Mlp& critic2() { return critic2_; }
    Mlp& target_actor() { return target_actor_; }
    Mlp& target_critic1() { return target_critic1_; }
    Mlp& target_critic2() { return target_critic2_; }
    const Optimizer& actor_optimizer() const { return actor_opt_; }
    const Optimizer& critic1_optimizer() const { return critic1_opt_; }
    const Optimizer& critic2_optimizer() const { return critic2_opt_; }
    Optimizer& actor_optimizer() { return actor_opt_; }
    Optimizer& critic1_optimizer() { return critic1_opt_; }
    Optimizer& critic2_optimizer() { return critic2_opt_; }

    // Deterministic policy action, clipped to the action bounds.
    Vec policy_action(const Vec& s) const {
        Vec a = actor_.forward(s);
        clip_inplace(a, -cfg_.action_bound, cfg_.action_bound);
        return a;
    }

    // Policy action with per-component exploration noise
    // N(0, explore_sigma * action_bound), clipped to the bounds.
    Vec select_action(const Vec& s, Rng& rng) const {
        Vec a = actor_.forward(s);
        for (double& x : a)
            x = clip(x + rng.normal(0.0, cfg_.explore_sigma * cfg_.action_bound),
                     -cfg_.action_bound, cfg_.action_bound);
        return a;
    }

    Vec warmup_action(Rng& rng) const {
        return eecl::warmup_action(cfg_.action_dim, cfg_.action_bound, rng);
    }

    Batch sample_batch(Rng& rng, int n) const {
        if (replay_.size() == 0) throw std::logic_error("td3: cannot sample from empty replay");
        Batch b;
        b.s.resize(cfg_.state_dim, n);
        b.a.resize(cfg_.action_dim, n);
        b.r.resize(n);
        b.s_next.resize(cfg_.state_dim, n);
        b.done.resize(n);
        for (int i = 0; i < n; ++i) {
            const Transition& t = replay_.sample(rng);
            for (int d = 0; d < cfg_.state_dim; ++d) {
                b.s(d, i) = t.s[d];
                b.s_next(d, i) = t.s_next[d];
            }
            for (int d = 0; d < cfg_.action_dim; ++d) b.a(d, i) = t.a[d];
            b.r(i) = t.reward;
            b.done(i) = t.done ? 1.0 : 0.0;
        }
        return b;
    }

    // y = r + discount * (1 - done) * min_i Q'_i(s', a~) where a~ is the
    // target policy's action under clipped Gaussian smoothing noise. Uses the
    // target networks only.
    Eigen::VectorXd compute_td_target(const Batch& batch, Rng& rng) const {
        const Eigen::Index n = batch.size();
        Eigen::MatrixXd a_next = target_actor_.forward_batch(batch.s_next);
        for (Eigen::Index i = 0; i < n; ++i)
            for (int d = 0; d < cfg_.action_dim; ++d) {
                const double noise = clip(rng.normal(0.0, cfg_.smooth_sigma),
                                          -cfg_.smooth_clip, cfg_.smooth_clip);
                a_next(d, i) = clip(a_next(d, i) + noise, -cfg_.action_bound, cfg_.action_bound);
            }
        Eigen::MatrixXd x(cfg_.state_dim + cfg_.action_dim, n);
        x.topRows(cfg_.state_dim) = batch.s_next;
        x.bottomRows(cfg_.action_dim) = a_next;
        const Eigen::MatrixXd q1 = target_critic1_.forward_batch(x);
        const Eigen::MatrixXd q2 = target_critic2_.forward_batch(x);
        const Eigen::ArrayXd qmin = q1.row(0).transpose().array().min(q2.row(0).transpose().array());
        return batch.r.array() + cfg_.discount * (1.0 - batch.done.array()) * qmin;
    }

    // One AdamW step per critic on mean squared error against y (y is held
    // constant; no gradient flows through the targets). Returns the pre-step
    // losses.
    std::pair<double, double> update_critics(const Batch& batch, const Eigen::VectorXd& y) {
        Eigen::MatrixXd x(cfg_.state_dim + cfg_.action_dim, batch.size());
        x.topRows(cfg_.state_dim) = batch.s;
        x.bottomRows(cfg_.action_dim) = batch.a;
        const double l1 = critic_mse_step(critic1_, critic1_opt_, x, y);
        const double l2 = critic_mse_step(critic2_, critic2_opt_, x, y);
        return {l1, l2};
    }

    // When step_count % policy_delay == 0: one Adam ascent step on
    // mean_n Q_1(s_n, pi(s_n)) chained through critic 1, then Polyak updates
    // of all three targets. Otherwise changes nothing and reports skipped.
    std::optional<double> update_actor_and_targets(const Batch& batch) {
        if (t_ % cfg_.policy_delay != 0) return std::nullopt;
        const Eigen::Index n = batch.size();

        Mlp::ForwardCache actor_cache;
        const Eigen::MatrixXd actions = actor_.forward_batch(batch.s, &actor_cache);
        Eigen::MatrixXd x(cfg_.state_dim + cfg_.action_dim, n);
        x.topRows(cfg_.state_dim) = batch.s;
        x.bottomRows(cfg_.action_dim) = actions;
        Mlp::ForwardCache critic_cache;
        const Eigen::MatrixXd q = critic1_.forward_batch(x, &critic_cache);
        const double objective = q.mean();

        // Descend -J: d(-J)/dQ = -1/N, chained to the action block of the
        // critic input, then through the actor.
        const Eigen::MatrixXd upstream =
            Eigen::MatrixXd::Constant(1, n, -1.0 / static_cast<double>(n));
        Eigen::MatrixXd dx;
        critic1_.backward_batch(critic_cache, upstream, nullptr, &dx);
        MlpGradients actor_grads;
        actor_.backward_batch(actor_cache, dx.bottomRows(cfg_.action_dim), &actor_grads, nullptr);
        actor_opt_.step(actor_, actor_grads);

        soft_update(target_actor_, actor_, cfg_.tau);
        soft_update(target_critic1_, critic1_, cfg_.tau);
        soft_update(target_critic2_, critic2_, cfg_.tau);
        return objective;
    }

    // One interaction with the environment plus, after warmup, one learning
    // update. When a detector is present, the exploration bonus of the
    // post-transition state is recorded; `inject_bonus` controls whether the
    // bonus is added to the stored reward or only logged.
    StepReport step(Env& env, NoveltyDetector* detector, bool inject_bonus, Rng& rng) {
        const Vec s = env.obs();
        ++t_;
        const Vec a = (t_ <= cfg_.warmup_steps) ? warmup_action(rng) : select_action(s, rng);
        const StepResult res = env.step(a);

        StepReport report;
        report.env_reward = res.reward;
        report.done = res.done;
        if (detector) {
            const std::int64_t before = detector->novel_count();
            report.bonus = detector->record_state(res.obs);
            report.novel = detector->novel_count() > before;
        }
        const double stored = res.reward + (inject_bonus ? report.bonus : 0.0);
        replay_.add({s, a, stored, res.obs, res.terminal});

        if (t_ > cfg_.warmup_steps) {
            const Batch batch = sample_batch(rng, cfg_.batch_size);
            const Eigen::VectorXd y = compute_td_target(batch, rng);
            std::tie(report.critic1_loss, report.critic2_loss) = update_critics(batch, y);
            report.actor_objective = update_actor_and_targets(batch);
            report.trained = true;
        }
        return report;
    }

    // Checkpoint restore.
    void restore_step_count(long long t) { t_ = t; }

private:
    static Td3Config validated(Td3Config c) {
        c.validate();
        return c;
    }

    static std::vector<int> actor_sizes(const Td3Config& c) {
        return {c.state_dim, c.hidden1, c.hidden2, c.action_dim};
    }
    static std::vector<int> critic_sizes(const Td3Config& c) {
        return {c.state_dim + c.action_dim, c.hidden1, c.hidden2, 1};
    }

    double critic_mse_step(Mlp& critic, Optimizer& opt, const Eigen::MatrixXd& x,
                           const Eigen::VectorXd& y) {
        const Eigen::Index n = x.cols();
        Mlp::ForwardCache cache;
        const Eigen::MatrixXd q = critic.forward_batch(x, &cache);
        const Eigen::ArrayXd err = q.row(0).transpose().array() - y.array();
        const double loss = err.square().mean();
        if (!std::isfinite(loss))
            throw std::runtime_error("td3: non-finite critic loss at step " + std::to_string(t_));
        const Eigen::MatrixXd upstream = (2.0 / static_cast<double>(n)) * err.matrix().transpose();
        MlpGradients grads;
        critic.backward_batch(cache, upstream, &grads, nullptr);
        opt.step(critic, grads);
        return loss;
    }

    Td3Config cfg_;
    Mlp actor_, critic1_, critic2_;
    Mlp target_actor_, target_critic1_, target_critic2_;
    Optimizer actor_opt_, critic1_opt_, critic2_opt_;
    ReplayBuffer replay_;
    long long t_ = 0;
};

// Mean undiscounted environment return of the deterministic policy over
// `episodes` episodes (no exploration noise, no warmup logic, no bonuses).
// Episode reset seeds are drawn from `rng`; the agent is untouched.
inline double evaluate(const Td3Agent& agent, Env& env, int episodes, Rng& rng) {
    if (episodes < 1) throw std::invalid_argument("evaluate: episodes must be >= 1");
    double total = 0.0;
    for (int ep = 0; ep < episodes; ++ep) {
        Vec obs = env.reset(rng.next());
        double ret = 0.0;
        while (!env.done()) {
            const StepResult res = env.step(agent.policy_action(obs));
            ret += res.reward;
            obs = res.obs;
        }
        total += ret;
    }
    return total / static_cast<double>(episodes);
}

}  // namespace eecl
