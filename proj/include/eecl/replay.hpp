#pragma once

#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include "eecl/math.hpp"

namespace eecl {

// One unit of replay. `reward` is the environment reward plus any exploration
// bonus granted at collection time. `done` marks absorbing terminals only;
// horizon cut-offs are stored as non-terminal so targets bootstrap through
// them.
struct Transition {
    Vec s;
    Vec a;
    double reward = 0.0;
    Vec s_next;
    bool done = false;
};

// Fixed-capacity ring buffer; once full, new insertions overwrite the oldest
// entry. Sampling is uniform with replacement over current contents.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
        if (capacity == 0) throw std::invalid_argument("ReplayBuffer: capacity must be positive");
    }

    std::size_t capacity() const { return capacity_; }
    std::size_t size() const { return data_.size(); }
    std::size_t cursor() const { return next_; }

    void add(Transition t) {
        if (data_.size() < capacity_) {
            data_.push_back(std::move(t));
        } else {
            data_[next_] = std::move(t);
        }
        next_ = (next_ + 1) % capacity_;
    }

    const Transition& sample(Rng& rng) const {
        if (data_.empty()) throw std::logic_error("ReplayBuffer: sample from empty buffer");
        return data_[rng.index(data_.size())];
    }

    const Transition& operator[](std::size_t i) const { return data_[i]; }

    // Checkpoint restore of the ring position (contents are not persisted).
    void restore_cursor(std::size_t cursor) { next_ = cursor % capacity_; }

private:
    std::size_t capacity_;
    std::size_t next_ = 0;
    std::vector<Transition> data_;
};

}  // namespace eecl
