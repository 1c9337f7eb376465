#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>
#include <vector>

#include "eecl/envs.hpp"
#include "eecl/td3.hpp"

using eecl::Batch;
using eecl::Mlp;
using eecl::NoveltyConfig;
using eecl::NoveltyDetector;
using eecl::OutputActivation;
using eecl::PointMassReach;
using eecl::Rng;
using eecl::Td3Agent;
using eecl::Td3Config;
using eecl::Vec;

namespace {

Td3Config small_config(int state_dim = 3, int action_dim = 2) {
    Td3Config cfg;
    cfg.state_dim = state_dim;
    cfg.action_dim = action_dim;
    cfg.action_bound = 1.0;
    cfg.hidden1 = 16;
    cfg.hidden2 = 12;
    cfg.batch_size = 8;
    cfg.replay_capacity = 512;
    cfg.warmup_steps = 10;
    cfg.total_steps = 50;
    return cfg;
}

void zero_net(Mlp& net) {
    for (auto& w : net.weights()) w.setZero();
    for (auto& b : net.biases()) b.setZero();
}

// serialize all parameters for bitwise comparisons
std::string param_bytes(const Mlp& net) {
    std::string bytes;
    for (const auto& w : net.weights())
        bytes.append(reinterpret_cast<const char*>(w.data()), w.size() * sizeof(double));
    for (const auto& b : net.biases())
        bytes.append(reinterpret_cast<const char*>(b.data()), b.size() * sizeof(double));
    return bytes;
}

Batch single_transition_batch(const Td3Config& cfg, double reward, bool done) {
    Batch b;
    b.s = Eigen::MatrixXd::Constant(cfg.state_dim, 1, 0.3);
    b.a = Eigen::MatrixXd::Constant(cfg.action_dim, 1, 0.1);
    b.r = Eigen::VectorXd::Constant(1, reward);
    b.s_next = Eigen::MatrixXd::Constant(cfg.state_dim, 1, -0.2);
    b.done = Eigen::VectorXd::Constant(1, done ? 1.0 : 0.0);
    return b;
}

}  // namespace

TEST_CASE("shipped defaults match the published hyperparameters", "[td3]") {
    const Td3Config cfg;
    REQUIRE(cfg.batch_size == 128);
    REQUIRE(cfg.replay_capacity == 1000000);
    REQUIRE(cfg.actor_lr == 0.001);
    REQUIRE(cfg.critic_lr == 0.001);
    REQUIRE(cfg.critic_weight_decay == 0.005);
    REQUIRE(cfg.smooth_sigma == 0.2);
    REQUIRE(cfg.smooth_clip == 0.5);
    REQUIRE(cfg.policy_delay == 2);
    REQUIRE(cfg.tau == 0.005);
    REQUIRE(cfg.warmup_steps == 1000);
    REQUIRE(cfg.explore_sigma == 0.1);
    REQUIRE(cfg.total_steps == 5000);
    REQUIRE(cfg.hidden1 == 400);
    REQUIRE(cfg.hidden2 == 300);
}

TEST_CASE("targets start as exact copies and critics take state plus action", "[td3]") {
    const Td3Agent agent(small_config(), 3);
    REQUIRE(param_bytes(agent.actor()) == param_bytes(agent.target_actor()));
    REQUIRE(param_bytes(agent.critic1()) == param_bytes(agent.target_critic1()));
    REQUIRE(param_bytes(agent.critic2()) == param_bytes(agent.target_critic2()));
    REQUIRE(param_bytes(agent.critic1()) != param_bytes(agent.critic2()));
    REQUIRE(agent.critic1().input_dim() == 3 + 2);
    REQUIRE(agent.actor().input_dim() == 3);
    REQUIRE(agent.actor().output_dim() == 2);
}

TEST_CASE("zero exploration noise reproduces the deterministic policy", "[td3]") {
    Td3Config cfg = small_config();
    cfg.explore_sigma = 0.0;
    const Td3Agent agent(cfg, 5);
    Rng rng(1);
    const Vec s = {0.1, -0.4, 0.7};
    REQUIRE(agent.select_action(s, rng) == agent.policy_action(s));
}

TEST_CASE("noisy actions stay inside the bounds", "[td3]") {
    Td3Config cfg = small_config();
    cfg.explore_sigma = 5.0;  // noise much larger than the bound
    const Td3Agent agent(cfg, 5);
    Rng rng(7);
    for (int i = 0; i < 200; ++i) {
        const Vec a = agent.select_action({0.5, 0.5, -0.5}, rng);
        for (double x : a) {
            REQUIRE(x <= cfg.action_bound);
            REQUIRE(x >= -cfg.action_bound);
        }
    }
}

TEST_CASE("action selection is deterministic given the generator state", "[td3]") {
    const Td3Agent agent(small_config(), 5);
    Rng r1(99), r2(99);
    const Vec s = {0.2, 0.0, -0.1};
    REQUIRE(agent.select_action(s, r1) == agent.select_action(s, r2));
}

TEST_CASE("warmup actions are uniform, seeded, and respect the bound", "[td3]") {
    Rng rng(4);
    double mean[2] = {0.0, 0.0};
    const int draws = 10000;
    for (int i = 0; i < draws; ++i) {
        const Vec a = eecl::warmup_action(2, 1.0, rng);
        mean[0] += a[0];
        mean[1] += a[1];
    }
    REQUIRE(std::abs(mean[0] / draws) < 0.05);
    REQUIRE(std::abs(mean[1] / draws) < 0.05);

    Rng z(0);
    REQUIRE(eecl::warmup_action(3, 0.0, z) == Vec{0.0, 0.0, 0.0});

    Rng s1(42), s2(42);
    REQUIRE(eecl::warmup_action(4, 0.7, s1) == eecl::warmup_action(4, 0.7, s2));
}

TEST_CASE("terminal transitions back up the raw reward", "[td3]") {
    const Td3Agent agent(small_config(), 11);
    Rng rng(0);
    const Batch b = single_transition_batch(agent.config(), 1.75, true);
    const Eigen::VectorXd y = agent.compute_td_target(b, rng);
    REQUIRE(y(0) == 1.75);
}

TEST_CASE("constant critics give y = r + gamma * min(q1, q2)", "[td3]") {
    Td3Config cfg = small_config();
    cfg.discount = 0.99;
    Td3Agent agent(cfg, 11);
    zero_net(agent.target_critic1());
    zero_net(agent.target_critic2());
    agent.target_critic1().biases().back()(0) = 2.0;  // Q'_1 == 2
    agent.target_critic2().biases().back()(0) = 3.0;  // Q'_2 == 3
    Rng rng(0);
    const Batch b = single_transition_batch(cfg, 1.0, false);
    const Eigen::VectorXd y = agent.compute_td_target(b, rng);
    REQUIRE(y(0) == Catch::Approx(2.98).margin(1e-12));
}

TEST_CASE("zero smoothing noise uses the target policy action directly", "[td3]") {
    Td3Config cfg = small_config();
    cfg.smooth_sigma = 0.0;
    const Td3Agent agent(cfg, 13);
    Rng rng(0);
    Batch b = single_transition_batch(cfg, 0.5, false);
    const Eigen::VectorXd y = agent.compute_td_target(b, rng);

    // manual recomputation through the target networks
    const Eigen::MatrixXd a_next = agent.target_actor().forward_batch(b.s_next);
    Eigen::MatrixXd x(cfg.state_dim + cfg.action_dim, 1);
    x.topRows(cfg.state_dim) = b.s_next;
    x.bottomRows(cfg.action_dim) = a_next;
    const double q1 = agent.target_critic1().forward_batch(x)(0, 0);
    const double q2 = agent.target_critic2().forward_batch(x)(0, 0);
    const double expected = 0.5 + cfg.discount * std::min(q1, q2);
    REQUIRE(y(0) == Catch::Approx(expected).margin(1e-14));
}

TEST_CASE("clipped double-Q: the target never exceeds either critic's backup", "[td3]") {
    Td3Config cfg = small_config();
    cfg.smooth_sigma = 0.0;  // deterministic a~ so the test can recompute it
    const Td3Agent agent(cfg, 21);
    Rng rng(3);
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    Batch b;
    const int n = 32;
    b.s = Eigen::MatrixXd::NullaryExpr(cfg.state_dim, n, [&]() { return d(gen); });
    b.a = Eigen::MatrixXd::NullaryExpr(cfg.action_dim, n, [&]() { return d(gen); });
    b.s_next = Eigen::MatrixXd::NullaryExpr(cfg.state_dim, n, [&]() { return d(gen); });
    b.r = Eigen::VectorXd::NullaryExpr(n, [&]() { return d(gen); });
    b.done = Eigen::VectorXd::NullaryExpr(n, [&]() { return d(gen) > 0.5 ? 1.0 : 0.0; });
    const Eigen::VectorXd y = agent.compute_td_target(b, rng);

    Eigen::MatrixXd a_next = agent.target_actor().forward_batch(b.s_next);
    Eigen::MatrixXd x(cfg.state_dim + cfg.action_dim, n);
    x.topRows(cfg.state_dim) = b.s_next;
    x.bottomRows(cfg.action_dim) = a_next;
    const Eigen::MatrixXd q1 = agent.target_critic1().forward_batch(x);
    const Eigen::MatrixXd q2 = agent.target_critic2().forward_batch(x);
    for (int i = 0; i < n; ++i) {
        const double masked = cfg.discount * (1.0 - b.done(i));
        REQUIRE(y(i) <= b.r(i) + masked * q1(0, i) + 1e-12);
        REQUIRE(y(i) <= b.r(i) + masked * q2(0, i) + 1e-12);
    }
}

TEST_CASE("matching targets give zero loss and decay-only parameter motion", "[td3]") {
    Td3Config cfg = small_config();
    Td3Agent agent(cfg, 31);
    const Batch b = single_transition_batch(cfg, 0.0, false);
    Eigen::MatrixXd x(cfg.state_dim + cfg.action_dim, 1);
    x.topRows(cfg.state_dim) = b.s;
    x.bottomRows(cfg.action_dim) = b.a;
    const double q1 = agent.critic1().forward_batch(x)(0, 0);

    const Eigen::MatrixXd w_before = agent.critic1().weights()[0];
    Eigen::VectorXd y(1);
    y(0) = q1;
    // use critic1's own output; critic2 differs so only critic1's loss is 0
    const auto [l1, l2] = agent.update_critics(b, y);
    REQUIRE(l1 == 0.0);
    REQUIRE(l2 > 0.0);
    const Eigen::MatrixXd expected = w_before - (cfg.critic_lr * cfg.critic_weight_decay) * w_before;
    REQUIRE((agent.critic1().weights()[0] - expected).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("single transition loss equals the squared error", "[td3]") {
    Td3Config cfg = small_config();
    cfg.critic_weight_decay = 0.0;
    Td3Agent agent(cfg, 33);
    const Batch b = single_transition_batch(cfg, 0.0, false);
    Eigen::MatrixXd x(cfg.state_dim + cfg.action_dim, 1);
    x.topRows(cfg.state_dim) = b.s;
    x.bottomRows(cfg.action_dim) = b.a;
    const double q1 = agent.critic1().forward_batch(x)(0, 0);
    Eigen::VectorXd y(1);
    y(0) = q1 + 0.3;
    const auto [l1, l2] = agent.update_critics(b, y);
    REQUIRE(l1 == Catch::Approx(0.09).margin(1e-12));
    (void)l2;
}

TEST_CASE("critic loss gradients match finite differences", "[td3]") {
    // standalone mean-squared-error gradient through a small critic
    Mlp critic({4, 6, 1}, OutputActivation::identity, 1.0, 3);
    const int n = 3;
    std::mt19937_64 gen(8);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    Eigen::MatrixXd x(4, n);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        for (int r = 0; r < 4; ++r) x(r, i) = d(gen);
        y(i) = d(gen);
    }
    const auto loss_of = [&]() {
        const Eigen::MatrixXd q = critic.forward_batch(x);
        return (q.row(0).transpose().array() - y.array()).square().mean();
    };

    Mlp::ForwardCache cache;
    const Eigen::MatrixXd q = critic.forward_batch(x, &cache);
    const Eigen::MatrixXd upstream =
        (2.0 / n) * (q.row(0).transpose().array() - y.array()).matrix().transpose();
    eecl::MlpGradients grads;
    critic.backward_batch(cache, upstream, &grads, nullptr);

    const double h = 1e-5;
    for (std::size_t k = 0; k < critic.num_layers(); ++k) {
        auto& w = critic.weights()[k];
        for (Eigen::Index r = 0; r < w.rows(); ++r)
            for (Eigen::Index c = 0; c < w.cols(); ++c) {
                const double saved = w(r, c);
                w(r, c) = saved + h;
                const double plus = loss_of();
                w(r, c) = saved - h;
                const double minus = loss_of();
                w(r, c) = saved;
                const double fd = (plus - minus) / (2 * h);
                REQUIRE(grads.w[k](r, c) ==
                        Catch::Approx(fd).margin(1e-6).epsilon(1e-4));
            }
    }
}

TEST_CASE("actor objective gradients match finite differences", "[td3]") {
    // gradient of mean_n Q(s_n, pi(s_n)) with respect to the actor parameters,
    // chained through the critic's input gradient
    Mlp actor({3, 5, 2}, OutputActivation::bounded_tanh, 1.0, 4);
    const Mlp critic({5, 7, 1}, OutputActivation::identity, 1.0, 5);
    const int n = 4;
    std::mt19937_64 gen(10);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    Eigen::MatrixXd s(3, n);
    for (int i = 0; i < n; ++i)
        for (int r = 0; r < 3; ++r) s(r, i) = d(gen);

    const auto objective = [&]() {
        const Eigen::MatrixXd a = actor.forward_batch(s);
        Eigen::MatrixXd x(5, n);
        x.topRows(3) = s;
        x.bottomRows(2) = a;
        return critic.forward_batch(x).mean();
    };

    Mlp::ForwardCache actor_cache, critic_cache;
    const Eigen::MatrixXd a = actor.forward_batch(s, &actor_cache);
    Eigen::MatrixXd x(5, n);
    x.topRows(3) = s;
    x.bottomRows(2) = a;
    critic.forward_batch(x, &critic_cache);
    const Eigen::MatrixXd upstream = Eigen::MatrixXd::Constant(1, n, 1.0 / n);
    Eigen::MatrixXd dx;
    critic.backward_batch(critic_cache, upstream, nullptr, &dx);
    eecl::MlpGradients grads;
    actor.backward_batch(actor_cache, dx.bottomRows(2), &grads, nullptr);

    const double h = 1e-5;
    for (std::size_t k = 0; k < actor.num_layers(); ++k) {
        auto& w = actor.weights()[k];
        for (Eigen::Index r = 0; r < w.rows(); ++r)
            for (Eigen::Index c = 0; c < w.cols(); ++c) {
                const double saved = w(r, c);
                w(r, c) = saved + h;
                const double plus = objective();
                w(r, c) = saved - h;
                const double minus = objective();
                w(r, c) = saved;
                const double fd = (plus - minus) / (2 * h);
                REQUIRE(grads.w[k](r, c) ==
                        Catch::Approx(fd).margin(1e-6).epsilon(1e-4));
            }
    }
}

TEST_CASE("off-delay steps leave the actor and targets bitwise unchanged", "[td3]") {
    Td3Config cfg = small_config();
    Td3Agent agent(cfg, 41);
    agent.restore_step_count(1);  // odd step with policy_delay = 2
    const std::string actor_before = param_bytes(agent.actor());
    const std::string t_actor_before = param_bytes(agent.target_actor());
    const std::string t_c1_before = param_bytes(agent.target_critic1());
    const Batch b = single_transition_batch(cfg, 0.2, false);
    const auto result = agent.update_actor_and_targets(b);
    REQUIRE_FALSE(result.has_value());
    REQUIRE(param_bytes(agent.actor()) == actor_before);
    REQUIRE(param_bytes(agent.target_actor()) == t_actor_before);
    REQUIRE(param_bytes(agent.target_critic1()) == t_c1_before);

    agent.restore_step_count(2);
    REQUIRE(agent.update_actor_and_targets(b).has_value());
    REQUIRE(param_bytes(agent.actor()) != actor_before);
}

TEST_CASE("an action-independent critic gives a zero actor gradient", "[td3]") {
    Td3Config cfg = small_config();
    Td3Agent agent(cfg, 43);
    zero_net(agent.critic1());  // Q1 is constant (zero) in everything
    agent.restore_step_count(2);
    const std::string actor_before = param_bytes(agent.actor());
    const Batch b = single_transition_batch(cfg, 0.0, false);
    const auto objective = agent.update_actor_and_targets(b);
    REQUIRE(objective.has_value());
    REQUIRE(*objective == 0.0);
    REQUIRE(param_bytes(agent.actor()) == actor_before);
}

TEST_CASE("training steps honor warmup and the policy delay schedule", "[td3]") {
    Td3Config cfg = small_config();
    cfg.warmup_steps = 6;
    cfg.total_steps = 30;
    cfg.batch_size = 4;
    auto env = eecl::make_env("pointmass");
    Td3Config pcfg = cfg;
    pcfg.state_dim = env->spec().state_dim;
    pcfg.action_dim = env->spec().action_dim;
    Td3Agent pagent(pcfg, 51);
    env->reset(0);
    Rng rng(77);
    const std::string init_actor = param_bytes(pagent.actor());
    const std::string init_critic = param_bytes(pagent.critic1());
    for (long long t = 1; t <= cfg.total_steps; ++t) {
        const std::string actor_before = param_bytes(pagent.actor());
        const auto report = pagent.step(*env, nullptr, false, rng);
        if (env->done()) env->reset(t);
        if (t <= cfg.warmup_steps) {
            REQUIRE_FALSE(report.trained);
            REQUIRE(param_bytes(pagent.actor()) == init_actor);
            REQUIRE(param_bytes(pagent.critic1()) == init_critic);
        } else {
            REQUIRE(report.trained);
            REQUIRE(param_bytes(pagent.critic1()) != init_critic);
            if (t % cfg.policy_delay == 0) {
                REQUIRE(report.actor_objective.has_value());
                REQUIRE(param_bytes(pagent.actor()) != actor_before);
            } else {
                REQUIRE_FALSE(report.actor_objective.has_value());
                REQUIRE(param_bytes(pagent.actor()) == actor_before);
            }
        }
    }
    // after tau < 1 updates the targets lag the online networks
    REQUIRE(param_bytes(pagent.critic1()) != param_bytes(pagent.target_critic1()));
    REQUIRE(param_bytes(pagent.actor()) != param_bytes(pagent.target_actor()));
}

TEST_CASE("a permissive detector reproduces the geometric bonus sequence", "[td3]") {
    Td3Config cfg = small_config();
    cfg.warmup_steps = 100;
    auto env = eecl::make_env("pointmass");
    cfg.state_dim = env->spec().state_dim;
    cfg.action_dim = env->spec().action_dim;
    Td3Agent agent(cfg, 61);
    NoveltyConfig nc;
    nc.state_dim = env->spec().state_dim;
    nc.epsilon = 1e-12;  // every state is novel
    NoveltyDetector detector(nc);
    env->reset(0);
    Rng rng(5);
    for (int t = 0; t < 60; ++t) {
        const auto report = agent.step(*env, &detector, true, rng);
        REQUIRE(report.novel);
        REQUIRE(report.bonus == 0.75 * std::pow(0.997, t));
        // the stored reward carries the bonus
        REQUIRE(agent.replay()[t].reward == report.env_reward + report.bonus);
        if (env->done()) env->reset(t + 1);
    }
}

TEST_CASE("without a detector the stored reward is the environment reward", "[td3]") {
    Td3Config cfg = small_config();
    cfg.warmup_steps = 100;
    auto env = eecl::make_env("pointmass");
    cfg.state_dim = env->spec().state_dim;
    cfg.action_dim = env->spec().action_dim;
    Td3Agent agent(cfg, 71);
    env->reset(0);
    Rng rng(9);
    for (int t = 0; t < 20; ++t) {
        const auto report = agent.step(*env, nullptr, false, rng);
        REQUIRE(report.bonus == 0.0);
        REQUIRE(agent.replay()[t].reward == report.env_reward);
        if (env->done()) env->reset(t + 1);
    }
}

namespace {

// test-local environments for the evaluation contract
class FixedEpisodeEnv final : public eecl::Env {
public:
    FixedEpisodeEnv() { inner_.reset(42); }
    const eecl::EnvSpec& spec() const override { return inner_.spec(); }
    Vec reset(std::uint64_t) override { return inner_.reset(42); }  // every episode identical
    eecl::StepResult step(const Vec& a) override { return inner_.step(a); }
    const Vec& obs() const override { return inner_.obs(); }
    bool done() const override { return inner_.done(); }

private:
    PointMassReach inner_;
};

class ZeroRewardEnv final : public eecl::Env {
public:
    ZeroRewardEnv() { inner_.reset(0); }
    const eecl::EnvSpec& spec() const override { return inner_.spec(); }
    Vec reset(std::uint64_t seed) override { return inner_.reset(seed); }
    eecl::StepResult step(const Vec& a) override {
        auto r = inner_.step(a);
        r.reward = 0.0;
        return r;
    }
    const Vec& obs() const override { return inner_.obs(); }
    bool done() const override { return inner_.done(); }

private:
    PointMassReach inner_;
};

}  // namespace

TEST_CASE("evaluation is deterministic and leaves the agent untouched", "[td3]") {
    Td3Config cfg = small_config();
    auto env = eecl::make_env("pointmass");
    cfg.state_dim = env->spec().state_dim;
    cfg.action_dim = env->spec().action_dim;
    const Td3Agent agent(cfg, 81);

    FixedEpisodeEnv fixed;
    Rng r1(0), r2(1);
    const double one = eecl::evaluate(agent, fixed, 1, r1);
    const double many = eecl::evaluate(agent, fixed, 10, r2);
    // identical episodes: the mean over 10 equals the single-episode return
    REQUIRE(many == Catch::Approx(one).margin(1e-9));

    ZeroRewardEnv zero;
    Rng r3(0);
    REQUIRE(eecl::evaluate(agent, zero, 3, r3) == 0.0);

    REQUIRE_THROWS_AS(eecl::evaluate(agent, fixed, 0, r3), std::invalid_argument);
}
