#pragma once

#include <memory>
#include <stdexcept>
#include <string>

#include "eecl/env.hpp"
#include "eecl/envs/planar_arm.hpp"
#include "eecl/envs/point_mass.hpp"

namespace eecl {

inline std::unique_ptr<Env> make_env(const std::string& name) {
    if (name == "pointmass") return std::make_unique<PointMassReach>();
    if (name == "armlift") return std::make_unique<PlanarArmLift>();
    throw std::invalid_argument("unknown environment '" + name +
                                "' (expected 'pointmass' or 'armlift')");
}

}  // namespace eecl
