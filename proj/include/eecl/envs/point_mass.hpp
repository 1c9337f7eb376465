#pragma once

#include <cmath>
#include <numbers>

#include "eecl/env.hpp"

namespace eecl {

// 2-D velocity-damped double integrator steering toward a goal sampled on an
// annulus around the origin. Observation [px, py, vx, vy, gx, gy]; action is
// a force in [-1, 1]^2. Per-step reward is -(distance to goal), plus +5 with
// the episode ending in success once within 0.05 of the goal.
class PointMassReach final : public Env {
public:
    static constexpr double kDt = 0.05;
    static constexpr double kForceGain = 2.0;
    static constexpr double kDamping = 2.0;
    static constexpr double kPosLimit = 2.0;
    static constexpr double kVelLimit = 3.0;
    static constexpr double kGoalRadiusMin = 0.4;
    static constexpr double kGoalRadiusMax = 1.0;
    static constexpr double kSuccessRadius = 0.05;
    static constexpr double kSuccessBonus = 5.0;
    // |reward| never exceeds this: worst distance is a corner to the far
    // goal ring (2*sqrt(2) + 1.5 < 4.4), success adds 5.
    static constexpr double kRewardBound = 10.0;

    PointMassReach() {
        spec_ = EnvSpec{"pointmass", 6, 2, 1.0, 200};
        reset(0);
    }

    const EnvSpec& spec() const override { return spec_; }
    const Vec& obs() const override { return obs_; }
    bool done() const override { return done_; }

    Vec reset(std::uint64_t seed) override {
        Rng rng(seed);
        const double radius = rng.uniform(kGoalRadiusMin, kGoalRadiusMax);
        const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
        goal_[0] = radius * std::cos(angle);
        goal_[1] = radius * std::sin(angle);
        pos_[0] = pos_[1] = 0.0;
        vel_[0] = vel_[1] = 0.0;
        steps_ = 0;
        done_ = false;
        update_obs();
        return obs_;
    }

    StepResult step(const Vec& action) override {
        check_action(action);
        for (int i = 0; i < 2; ++i) {
            const double a = clip(action[i], -spec_.action_bound, spec_.action_bound);
            vel_[i] = clip(vel_[i] + (kForceGain * a - kDamping * vel_[i]) * kDt, -kVelLimit, kVelLimit);
            pos_[i] = clip(pos_[i] + vel_[i] * kDt, -kPosLimit, kPosLimit);
        }
        ++steps_;
        const double dx = pos_[0] - goal_[0];
        const double dy = pos_[1] - goal_[1];
        const double dist = std::sqrt(dx * dx + dy * dy);
        double reward = -dist;
        const bool success = dist <= kSuccessRadius;
        if (success) reward += kSuccessBonus;
        done_ = success || steps_ >= spec_.episode_horizon;
        update_obs();
        return {obs_, reward, done_, success};
    }

private:
    void update_obs() { obs_ = {pos_[0], pos_[1], vel_[0], vel_[1], goal_[0], goal_[1]}; }

    EnvSpec spec_;
    double pos_[2] = {0, 0};
    double vel_[2] = {0, 0};
    double goal_[2] = {0, 0};
    int steps_ = 0;
    bool done_ = false;
    Vec obs_;
};

}  // namespace eecl
