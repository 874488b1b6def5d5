#pragma once

#include <cstdint>

#include "mbdsim/scenario.hpp"

namespace mbdsim {

/// Grid parameters sized for roughly 100 concurrently live vehicles at
/// steady state (900 m side).
SynthParams dense_grid_params(double duration = 1000.0);

/// Lower-density variant, roughly 30 concurrent vehicles on a 600 m grid.
SynthParams sparse_grid_params(double duration = 1000.0);

/// Builds a grid scenario with roles assigned and pseudonyms finalized.
Scenario make_grid_scenario(const SynthParams& params, const AttackConfig& attack,
                            std::uint64_t seed,
                            const PseudonymConfig& pseudonym = PseudonymConfig{});

/// Two vehicles in adjacent lanes driving a straight road for `duration`
/// seconds at constant speed; no attackers. Pseudonym phase is zero so both
/// rotate exactly on period boundaries.
Scenario make_two_vehicle_straight(double duration, double pseudonym_period = 100.0);

/// `count` vehicles equally spaced on a circle (closed scenario, everyone
/// present from t = 0); constant speed, exact centripetal acceleration.
Scenario make_ring_scenario(int count, double radius, double speed, double duration);

/// Two honest vehicles plus one attacker driving parallel lanes; attack
/// config left for the caller to assign.
Scenario make_parallel_trio(double duration);

}  // namespace mbdsim
