#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <span>

#include "eecl/env.hpp"

namespace eecl {

// End-effector position of a revolute chain: link i contributes
// l_i * (cos, sin) of the accumulated joint angle.
inline std::array<double, 2> forward_kinematics(std::span<const double> angles,
                                                std::span<const double> link_lengths) {
    double x = 0.0, y = 0.0, acc = 0.0;
    for (std::size_t i = 0; i < angles.size(); ++i) {
        acc += angles[i];
        x += link_lengths[i] * std::cos(acc);
        y += link_lengths[i] * std::sin(acc);
    }
    return {x, y};
}

// Kinematic reach-grasp-lift surrogate in a vertical plane. A 3-joint arm
// (links 0.4, 0.3, 0.2, base at the origin) must bring its end effector
// within 0.05 of an object resting on the table line y = 0 while commanding
// the gripper (> 0.5), then raise it. The grasp is a sticky threshold event,
// and the held object's height only ratchets upward:
//   h <- max(h, ee_y)   while grasped; untouched otherwise.
//
// Observation: [theta(3), omega(3), ee_x, ee_y, obj_x, obj_h, grasped].
// Action: 3 joint torques + 1 gripper command, all in [-1, 1].
// Reward: -(end-effector-to-object distance) until grasped, then
// 10 * (height gain per step), +50 with success once the height passes 0.3.
class PlanarArmLift final : public Env {
public:
    static constexpr int kJoints = 3;
    static constexpr double kDt = 0.05;
    static constexpr double kTorqueGain = 2.0;
    static constexpr double kDamping = 0.5;
    static constexpr double kOmegaLimit = 3.0;
    static constexpr std::array<double, 3> kLinkLengths = {0.4, 0.3, 0.2};
    static constexpr double kObjectRadiusMin = 0.5;
    static constexpr double kObjectRadiusMax = 0.8;
    static constexpr double kGraspRadius = 0.05;
    static constexpr double kGripThreshold = 0.5;
    static constexpr double kLiftRewardGain = 10.0;
    static constexpr double kSuccessHeight = 0.3;
    static constexpr double kSuccessBonus = 50.0;
    // Reach phase: distance <= 0.9 + 0.8. Lift phase: per-step height gain is
    // below omega*sum(l)*dt < 0.14, so 10*gain + 50 < 52.
    static constexpr double kRewardBound = 60.0;

    PlanarArmLift() {
        spec_ = EnvSpec{"armlift", 11, 4, 1.0, 300};
        reset(0);
    }

    const EnvSpec& spec() const override { return spec_; }
    const Vec& obs() const override { return obs_; }
    bool done() const override { return done_; }

    Vec reset(std::uint64_t seed) override {
        Rng rng(seed);
        for (int i = 0; i < kJoints; ++i) {
            theta_[i] = rng.uniform(-0.1, 0.1);
            omega_[i] = 0.0;
        }
        const double side = rng.uniform(0.0, 1.0) < 0.5 ? -1.0 : 1.0;
        obj_x_ = side * rng.uniform(kObjectRadiusMin, kObjectRadiusMax);
        obj_h_ = 0.0;
        grasped_ = false;
        steps_ = 0;
        done_ = false;
        update_obs();
        return obs_;
    }

    StepResult step(const Vec& action) override {
        check_action(action);
        for (int i = 0; i < kJoints; ++i) {
            const double torque = clip(action[i], -1.0, 1.0);
            omega_[i] = clip(omega_[i] + (kTorqueGain * torque - kDamping * omega_[i]) * kDt,
                             -kOmegaLimit, kOmegaLimit);
            theta_[i] = wrap_angle(theta_[i] + omega_[i] * kDt);
        }
        const double grip = clip(action[kJoints], -1.0, 1.0);
        ++steps_;

        const auto [ee_x, ee_y] = forward_kinematics(theta_, kLinkLengths);
        double reward;
        if (!grasped_) {
            const double dx = ee_x - obj_x_;
            const double dy = ee_y - obj_h_;
            const double dist = std::sqrt(dx * dx + dy * dy);
            if (dist <= kGraspRadius && grip > kGripThreshold) grasped_ = true;
            if (grasped_) {
                const double lifted = std::max(obj_h_, ee_y);
                reward = kLiftRewardGain * (lifted - obj_h_);
                obj_h_ = lifted;
                obj_x_ = ee_x;
            } else {
                reward = -dist;
            }
        } else {
            const double lifted = std::max(obj_h_, ee_y);
            reward = kLiftRewardGain * (lifted - obj_h_);
            obj_h_ = lifted;
            obj_x_ = ee_x;
        }
        const bool success = obj_h_ > kSuccessHeight;
        if (success) reward += kSuccessBonus;
        done_ = success || steps_ >= spec_.episode_horizon;
        update_obs();
        return {obs_, reward, done_, success};
    }

private:
    static double wrap_angle(double a) {
        // into (-pi, pi]
        constexpr double two_pi = 2.0 * std::numbers::pi;
        a = std::fmod(a + std::numbers::pi, two_pi);
        if (a <= 0.0) a += two_pi;
        return a - std::numbers::pi;
    }

    void update_obs() {
        const auto [ee_x, ee_y] = forward_kinematics(theta_, kLinkLengths);
        obs_ = {theta_[0], theta_[1], theta_[2], omega_[0], omega_[1], omega_[2],
                ee_x,      ee_y,      obj_x_,    obj_h_,    grasped_ ? 1.0 : 0.0};
    }

    EnvSpec spec_;
    std::array<double, kJoints> theta_ = {0, 0, 0};
    std::array<double, kJoints> omega_ = {0, 0, 0};
    double obj_x_ = 0.0;
    double obj_h_ = 0.0;
    bool grasped_ = false;
    int steps_ = 0;
    bool done_ = false;
    Vec obs_;
};

}  // namespace eecl
