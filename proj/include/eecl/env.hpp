#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>

#include "eecl/math.hpp"

namespace eecl {

struct EnvSpec {
    std::string name;
    int state_dim = 0;
    int action_dim = 0;
    double action_bound = 1.0;
    int episode_horizon = 0;
};

struct StepResult {
    Vec obs;
    double reward = 0.0;
    bool done = false;      // episode over (success or horizon)
    bool terminal = false;  // absorbing end (success); horizon cut-offs are
                            // not terminal, so value bootstrapping continues
                            // through them
};

// Deterministic episodic environment: trajectories are pure functions of the
// reset seed and the action sequence. Stepping a finished episode is an error.
class Env {
public:
    virtual ~Env() = default;
    virtual const EnvSpec& spec() const = 0;
    virtual Vec reset(std::uint64_t seed) = 0;
    virtual StepResult step(const Vec& action) = 0;
    virtual const Vec& obs() const = 0;
    virtual bool done() const = 0;

protected:
    void check_action(const Vec& action) const {
        if (static_cast<int>(action.size()) != spec().action_dim)
            throw std::invalid_argument(spec().name + ": action has length " +
                                        std::to_string(action.size()) + ", expected " +
                                        std::to_string(spec().action_dim));
        if (done())
            throw std::logic_error(spec().name + ": step() called on a finished episode");
    }
};

}  // namespace eecl
