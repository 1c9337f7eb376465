#pragma once

#include <cmath>
#include <cstdint>
#include <deque>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "eecl/kdtree.hpp"
#include "eecl/math.hpp"

namespace eecl {

struct NoveltyConfig {
    int state_dim = 0;        // filled in from the environment
    double epsilon = 0.1;     // distance threshold for novelty
    double r_max = 0.75;      // reward for the first novel state
    double decay = 0.997;     // per-discovery reward decay
    int max_states = 1000;    // bounded state memory

    void validate() const {
        if (state_dim <= 0) throw std::invalid_argument("novelty: state_dim must be positive");
        if (epsilon <= 0.0) throw std::invalid_argument("novelty: epsilon must be positive");
        if (r_max < 0.0) throw std::invalid_argument("novelty: r_max must be non-negative");
        if (decay <= 0.0 || decay > 1.0) throw std::invalid_argument("novelty: decay must be in (0, 1]");
        if (max_states < 1) throw std::invalid_argument("novelty: max_states must be >= 1");
    }
};

// Distance-threshold novelty detector: a bounded FIFO memory of visited
// states indexed by a kd-tree. A state is novel when its nearest stored
// neighbor is at least epsilon away (or the memory is empty). The n-th
// accepted state earns r_max * decay^n, counting from n = 0, so the first
// discovery earns exactly r_max.
//
// One training loop writes; the const queries are safe to call concurrently
// when no writer is active.
class NoveltyDetector {
public:
    explicit NoveltyDetector(NoveltyConfig config) : cfg_(config), tree_(config.state_dim) {
        cfg_.validate();
    }

    const NoveltyConfig& config() const { return cfg_; }
    std::size_t size() const { return buffer_.size(); }
    std::int64_t novel_count() const { return novel_count_; }
    const KdTree& tree() const { return tree_; }

    // States in FIFO order, oldest first.
    std::vector<Vec> states() const { return {buffer_.begin(), buffer_.end()}; }

    // True iff the memory is empty or the nearest neighbor is >= epsilon
    // away. Distance exactly epsilon counts as novel. Does not mutate.
    bool novelty_check(const Vec& state) const {
        check_dim(state);
        if (buffer_.empty()) return true;
        return tree_.nearest(state)->distance >= cfg_.epsilon;
    }

    // Reward the next accepted state would earn.
    double exploration_reward() const {
        return cfg_.r_max * std::pow(cfg_.decay, static_cast<double>(novel_count_));
    }

    // Running total of all rewards paid out.
    double cumulative_exploration_reward() const { return reward_sum_; }

    // If the state is novel: pays the current exploration reward, stores the
    // state (evicting the oldest when full), and updates the tree. Returns 0
    // and mutates nothing otherwise.
    double record_state(const Vec& state) {
        if (!novelty_check(state)) return 0.0;
        const double reward = exploration_reward();
        if (buffer_.size() == static_cast<std::size_t>(cfg_.max_states)) {
            buffer_.pop_front();
            buffer_.push_back(state);
            rebuild_tree();
        } else {
            buffer_.push_back(state);
            tree_.insert(state);
            if (++inserts_since_rebuild_ >= kRebuildInterval) rebuild_tree();
        }
        ++novel_count_;
        reward_sum_ += reward;
        return reward;
    }

    // Checkpoint restore; `states` must be in FIFO order.
    static NoveltyDetector restore(NoveltyConfig config, std::vector<Vec> states,
                                   std::int64_t novel_count, double reward_sum) {
        NoveltyDetector d(config);
        if (states.size() > static_cast<std::size_t>(config.max_states))
            throw std::invalid_argument("novelty: restored state list exceeds max_states");
        d.buffer_.assign(states.begin(), states.end());
        d.tree_ = KdTree::build(config.state_dim, std::move(states));
        d.novel_count_ = novel_count;
        d.reward_sum_ = reward_sum;
        return d;
    }

private:
    static constexpr int kRebuildInterval = 256;

    void check_dim(const Vec& state) const {
        if (static_cast<int>(state.size()) != cfg_.state_dim)
            throw std::invalid_argument("novelty: state has dimension " + std::to_string(state.size()) +
                                        ", expected " + std::to_string(cfg_.state_dim));
    }

    void rebuild_tree() {
        tree_ = KdTree::build(cfg_.state_dim, {buffer_.begin(), buffer_.end()});
        inserts_since_rebuild_ = 0;
    }

    NoveltyConfig cfg_;
    std::deque<Vec> buffer_;
    KdTree tree_;
    std::int64_t novel_count_ = 0;
    double reward_sum_ = 0.0;
    int inserts_since_rebuild_ = 0;
};

}  // namespace eecl
