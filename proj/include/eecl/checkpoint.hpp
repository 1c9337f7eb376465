#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "eecl/novelty.hpp"
#include "eecl/td3.hpp"

namespace eecl {

// Versioned little-endian binary checkpoint: all six networks, optimizer
// states, replay ring metadata (not contents), the step counter, and the
// novelty detector's memory. Loading and then evaluating reproduces the
// saved agent's behavior bit for bit.

namespace ckpt_detail {

inline constexpr char kMagic[8] = {'E', 'E', 'C', 'L', 'T', 'D', '3', 'C'};
inline constexpr std::uint32_t kVersion = 1;

inline void write_raw(std::ostream& out, const void* p, std::size_t n) {
    out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

inline void read_raw(std::istream& in, void* p, std::size_t n, const char* what) {
    in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (in.gcount() != static_cast<std::streamsize>(n))
        throw std::runtime_error(std::string("corrupt checkpoint: truncated while reading ") + what);
}

inline void write_u32(std::ostream& o, std::uint32_t v) { write_raw(o, &v, sizeof v); }
inline void write_i64(std::ostream& o, std::int64_t v) { write_raw(o, &v, sizeof v); }
inline void write_u64(std::ostream& o, std::uint64_t v) { write_raw(o, &v, sizeof v); }
inline void write_f64(std::ostream& o, double v) { write_raw(o, &v, sizeof v); }

inline std::uint32_t read_u32(std::istream& i, const char* w) { std::uint32_t v; read_raw(i, &v, sizeof v, w); return v; }
inline std::int64_t read_i64(std::istream& i, const char* w) { std::int64_t v; read_raw(i, &v, sizeof v, w); return v; }
inline std::uint64_t read_u64(std::istream& i, const char* w) { std::uint64_t v; read_raw(i, &v, sizeof v, w); return v; }
inline double read_f64(std::istream& i, const char* w) { double v; read_raw(i, &v, sizeof v, w); return v; }

inline void write_string(std::ostream& o, const std::string& s) {
    write_u64(o, s.size());
    write_raw(o, s.data(), s.size());
}

inline std::string read_string(std::istream& i, const char* w) {
    const std::uint64_t n = read_u64(i, w);
    if (n > (1u << 20)) throw std::runtime_error(std::string("corrupt checkpoint: oversized string for ") + w);
    std::string s(n, '\0');
    read_raw(i, s.data(), n, w);
    return s;
}

inline void write_matrix(std::ostream& o, const Eigen::MatrixXd& m) {
    write_u64(o, static_cast<std::uint64_t>(m.rows()));
    write_u64(o, static_cast<std::uint64_t>(m.cols()));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) write_f64(o, m(r, c));
}

inline Eigen::MatrixXd read_matrix(std::istream& i, const char* w) {
    const auto rows = read_u64(i, w);
    const auto cols = read_u64(i, w);
    if (rows > (1u << 24) || cols > (1u << 24))
        throw std::runtime_error(std::string("corrupt checkpoint: absurd matrix shape for ") + w);
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = read_f64(i, w);
    return m;
}

inline void write_vector(std::ostream& o, const Eigen::VectorXd& v) {
    write_u64(o, static_cast<std::uint64_t>(v.size()));
    for (Eigen::Index k = 0; k < v.size(); ++k) write_f64(o, v(k));
}

inline Eigen::VectorXd read_vector(std::istream& i, const char* w) {
    const auto n = read_u64(i, w);
    if (n > (1u << 26)) throw std::runtime_error(std::string("corrupt checkpoint: absurd vector size for ") + w);
    Eigen::VectorXd v(static_cast<Eigen::Index>(n));
    for (Eigen::Index k = 0; k < v.size(); ++k) v(k) = read_f64(i, w);
    return v;
}

inline void write_mlp(std::ostream& o, const Mlp& net) {
    write_u64(o, net.layer_sizes().size());
    for (int s : net.layer_sizes()) write_i64(o, s);
    write_u32(o, net.output_activation() == OutputActivation::bounded_tanh ? 1u : 0u);
    write_f64(o, net.output_bound());
    for (std::size_t k = 0; k < net.weights().size(); ++k) {
        write_matrix(o, net.weights()[k]);
        write_vector(o, net.biases()[k]);
    }
}

inline Mlp read_mlp(std::istream& i, const char* w) {
    const auto n_sizes = read_u64(i, w);
    if (n_sizes < 2 || n_sizes > 64)
        throw std::runtime_error(std::string("corrupt checkpoint: bad layer count for ") + w);
    std::vector<int> sizes(n_sizes);
    for (auto& s : sizes) s = static_cast<int>(read_i64(i, w));
    const std::uint32_t act = read_u32(i, w);
    const double bound = read_f64(i, w);
    Mlp net(sizes, act == 1 ? OutputActivation::bounded_tanh : OutputActivation::identity,
            act == 1 ? bound : 1.0, 0);
    for (std::size_t k = 0; k < net.weights().size(); ++k) {
        Eigen::MatrixXd m = read_matrix(i, w);
        Eigen::VectorXd b = read_vector(i, w);
        if (m.rows() != net.weights()[k].rows() || m.cols() != net.weights()[k].cols() ||
            b.size() != net.biases()[k].size())
            throw std::runtime_error(std::string("corrupt checkpoint: parameter shape mismatch in ") + w);
        net.weights()[k] = std::move(m);
        net.biases()[k] = std::move(b);
    }
    return net;
}

inline void write_optimizer(std::ostream& o, const Optimizer& opt) {
    write_u32(o, opt.kind() == Optimizer::Kind::adamw ? 1u : 0u);
    write_i64(o, opt.step_count());
    write_f64(o, opt.learning_rate());
    write_f64(o, opt.beta1());
    write_f64(o, opt.beta2());
    write_f64(o, opt.eps_hat());
    write_f64(o, opt.weight_decay());
    write_u64(o, opt.weight_first_moments().size());
    for (std::size_t k = 0; k < opt.weight_first_moments().size(); ++k) {
        write_matrix(o, opt.weight_first_moments()[k]);
        write_matrix(o, opt.weight_second_moments()[k]);
        write_vector(o, opt.bias_first_moments()[k]);
        write_vector(o, opt.bias_second_moments()[k]);
    }
}

inline void read_optimizer_into(std::istream& i, Optimizer& opt, const char* w) {
    const std::uint32_t kind = read_u32(i, w);
    const std::int64_t steps = read_i64(i, w);
    read_f64(i, w);  // lr
    read_f64(i, w);  // beta1
    read_f64(i, w);  // beta2
    read_f64(i, w);  // eps
    read_f64(i, w);  // weight decay
    if ((kind == 1u) != (opt.kind() == Optimizer::Kind::adamw))
        throw std::runtime_error(std::string("checkpoint optimizer kind mismatch for ") + w);
    const auto layers = read_u64(i, w);
    std::vector<Eigen::MatrixXd> mw, vw;
    std::vector<Eigen::VectorXd> mb, vb;
    for (std::uint64_t k = 0; k < layers; ++k) {
        mw.push_back(read_matrix(i, w));
        vw.push_back(read_matrix(i, w));
        mb.push_back(read_vector(i, w));
        vb.push_back(read_vector(i, w));
    }
    opt.restore_state(steps, std::move(mw), std::move(vw), std::move(mb), std::move(vb));
}

inline void write_td3_config(std::ostream& o, const Td3Config& c) {
    write_i64(o, c.state_dim);
    write_i64(o, c.action_dim);
    write_f64(o, c.action_bound);
    write_f64(o, c.discount);
    write_f64(o, c.tau);
    write_i64(o, c.policy_delay);
    write_i64(o, c.batch_size);
    write_i64(o, c.replay_capacity);
    write_f64(o, c.actor_lr);
    write_f64(o, c.critic_lr);
    write_f64(o, c.critic_weight_decay);
    write_f64(o, c.explore_sigma);
    write_f64(o, c.smooth_sigma);
    write_f64(o, c.smooth_clip);
    write_i64(o, c.warmup_steps);
    write_i64(o, c.total_steps);
    write_i64(o, c.hidden1);
    write_i64(o, c.hidden2);
}

inline Td3Config read_td3_config(std::istream& i) {
    Td3Config c;
    c.state_dim = static_cast<int>(read_i64(i, "td3 config"));
    c.action_dim = static_cast<int>(read_i64(i, "td3 config"));
    c.action_bound = read_f64(i, "td3 config");
    c.discount = read_f64(i, "td3 config");
    c.tau = read_f64(i, "td3 config");
    c.policy_delay = static_cast<int>(read_i64(i, "td3 config"));
    c.batch_size = static_cast<int>(read_i64(i, "td3 config"));
    c.replay_capacity = read_i64(i, "td3 config");
    c.actor_lr = read_f64(i, "td3 config");
    c.critic_lr = read_f64(i, "td3 config");
    c.critic_weight_decay = read_f64(i, "td3 config");
    c.explore_sigma = read_f64(i, "td3 config");
    c.smooth_sigma = read_f64(i, "td3 config");
    c.smooth_clip = read_f64(i, "td3 config");
    c.warmup_steps = read_i64(i, "td3 config");
    c.total_steps = read_i64(i, "td3 config");
    c.hidden1 = static_cast<int>(read_i64(i, "td3 config"));
    c.hidden2 = static_cast<int>(read_i64(i, "td3 config"));
    return c;
}

}  // namespace ckpt_detail

inline void save_checkpoint(const std::string& path, const std::string& env_name,
                            const Td3Agent& agent, const NoveltyDetector* detector) {
    using namespace ckpt_detail;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open checkpoint for writing: " + path);
    write_raw(out, kMagic, sizeof kMagic);
    write_u32(out, kVersion);
    write_string(out, env_name);
    write_i64(out, agent.step_count());
    write_td3_config(out, agent.config());
    write_mlp(out, agent.actor());
    write_mlp(out, agent.critic1());
    write_mlp(out, agent.critic2());
    write_mlp(out, agent.target_actor());
    write_mlp(out, agent.target_critic1());
    write_mlp(out, agent.target_critic2());
    write_optimizer(out, agent.actor_optimizer());
    write_optimizer(out, agent.critic1_optimizer());
    write_optimizer(out, agent.critic2_optimizer());
    write_u64(out, agent.replay().capacity());
    write_u64(out, agent.replay().size());
    write_u64(out, agent.replay().cursor());
    write_u32(out, detector ? 1u : 0u);
    if (detector) {
        const NoveltyConfig& nc = detector->config();
        write_i64(out, nc.state_dim);
        write_f64(out, nc.epsilon);
        write_f64(out, nc.r_max);
        write_f64(out, nc.decay);
        write_i64(out, nc.max_states);
        write_i64(out, detector->novel_count());
        write_f64(out, detector->cumulative_exploration_reward());
        const auto states = detector->states();
        write_u64(out, states.size());
        for (const Vec& s : states)
            for (double x : s) write_f64(out, x);
    }
    if (!out) throw std::runtime_error("checkpoint write failed: " + path);
}

struct LoadedCheckpoint {
    std::string env_name;
    Td3Agent agent;
    std::optional<NoveltyDetector> detector;
};

// Reads a checkpoint into a freshly constructed agent/detector pair.
inline LoadedCheckpoint load_checkpoint(const std::string& path) {
    using namespace ckpt_detail;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
    char magic[8];
    read_raw(in, magic, sizeof magic, "magic");
    if (std::memcmp(magic, kMagic, sizeof kMagic) != 0)
        throw std::runtime_error("not a checkpoint file (bad magic): " + path);
    const std::uint32_t version = read_u32(in, "version");
    if (version != kVersion)
        throw std::runtime_error("unsupported checkpoint version " + std::to_string(version) +
                                 " (expected " + std::to_string(kVersion) + "): " + path);
    std::string env_name = read_string(in, "env name");
    const std::int64_t t = read_i64(in, "step counter");
    const Td3Config cfg = read_td3_config(in);

    Td3Agent agent(cfg, 0);
    agent.actor() = read_mlp(in, "actor");
    agent.critic1() = read_mlp(in, "critic1");
    agent.critic2() = read_mlp(in, "critic2");
    agent.target_actor() = read_mlp(in, "target actor");
    agent.target_critic1() = read_mlp(in, "target critic1");
    agent.target_critic2() = read_mlp(in, "target critic2");
    read_optimizer_into(in, agent.actor_optimizer(), "actor optimizer");
    read_optimizer_into(in, agent.critic1_optimizer(), "critic1 optimizer");
    read_optimizer_into(in, agent.critic2_optimizer(), "critic2 optimizer");
    read_u64(in, "replay capacity");
    read_u64(in, "replay size");
    const std::uint64_t cursor = read_u64(in, "replay cursor");
    agent.replay().restore_cursor(cursor);
    agent.restore_step_count(t);

    std::optional<NoveltyDetector> detector;
    if (read_u32(in, "detector flag") == 1u) {
        NoveltyConfig nc;
        nc.state_dim = static_cast<int>(read_i64(in, "novelty config"));
        nc.epsilon = read_f64(in, "novelty config");
        nc.r_max = read_f64(in, "novelty config");
        nc.decay = read_f64(in, "novelty config");
        nc.max_states = static_cast<int>(read_i64(in, "novelty config"));
        const std::int64_t novel_count = read_i64(in, "novelty count");
        const double reward_sum = read_f64(in, "novelty reward sum");
        const std::uint64_t n_states = read_u64(in, "novelty state count");
        if (n_states > static_cast<std::uint64_t>(nc.max_states))
            throw std::runtime_error("corrupt checkpoint: detector state count exceeds max_states");
        std::vector<Vec> states(n_states, Vec(nc.state_dim));
        for (auto& s : states)
            for (double& x : s) x = read_f64(in, "novelty state");
        detector = NoveltyDetector::restore(nc, std::move(states), novel_count, reward_sum);
    }
    return {std::move(env_name), std::move(agent), std::move(detector)};
}

// Loads a checkpoint into an existing agent/detector, rejecting architecture
// mismatches explicitly.
inline void load_checkpoint_into(Td3Agent& agent, std::optional<NoveltyDetector>& detector,
                                 const std::string& path) {
    LoadedCheckpoint loaded = load_checkpoint(path);
    const Td3Config& a = agent.config();
    const Td3Config& b = loaded.agent.config();
    if (a.state_dim != b.state_dim || a.action_dim != b.action_dim ||
        a.hidden1 != b.hidden1 || a.hidden2 != b.hidden2 || a.action_bound != b.action_bound)
        throw std::runtime_error(
            "checkpoint architecture mismatch: stored (state_dim=" + std::to_string(b.state_dim) +
            ", action_dim=" + std::to_string(b.action_dim) + ", hidden=" + std::to_string(b.hidden1) +
            "/" + std::to_string(b.hidden2) + "), agent (state_dim=" + std::to_string(a.state_dim) +
            ", action_dim=" + std::to_string(a.action_dim) + ", hidden=" + std::to_string(a.hidden1) +
            "/" + std::to_string(a.hidden2) + ")");
    agent = std::move(loaded.agent);
    detector = std::move(loaded.detector);
}

}  // namespace eecl
