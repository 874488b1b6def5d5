#include "mbdsim/presets.hpp"

#include <cmath>
#include <numbers>

namespace mbdsim {

namespace {
constexpr double kPi = std::numbers::pi;

Trajectory constant_velocity(LocalPoint start, double heading, double speed, double duration,
                             double dt) {
  Trajectory tr;
  tr.spawn = 0.0;
  tr.despawn = duration;
  const auto steps = static_cast<long long>(std::llround(duration / dt));
  tr.samples.reserve(static_cast<std::size_t>(steps));
  const Vec2 v = Vec2{std::cos(heading), std::sin(heading)} * speed;
  for (long long k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) * dt;
    tr.samples.push_back(
        TrajectorySample{t, start + v * t, heading, speed, Vec2{0.0, 0.0}});
  }
  return tr;
}
}  // namespace

SynthParams dense_grid_params(double duration) {
  SynthParams p;
  p.blocks = 6;
  p.block_len = 150.0;
  p.lanes = 2;
  p.spawn_rate = 0.9;
  p.duration = duration;
  p.warm_start = 150.0;  // open on a populated grid
  return p;
}

SynthParams sparse_grid_params(double duration) {
  SynthParams p;
  p.blocks = 4;
  p.block_len = 150.0;
  p.lanes = 2;
  p.spawn_rate = 0.36;
  p.duration = duration;
  p.warm_start = 150.0;
  return p;
}

Scenario make_grid_scenario(const SynthParams& params, const AttackConfig& attack,
                            std::uint64_t seed, const PseudonymConfig& pseudonym) {
  Scenario sc = synth_grid(params, seed);
  sc.pseudonym = pseudonym;
  assign_roles(sc, attack, seed);
  sc.finalize();
  return sc;
}

Scenario make_two_vehicle_straight(double duration, double pseudonym_period) {
  Scenario sc;
  sc.duration = duration;
  sc.dt = 0.1;
  sc.seed = 1;
  sc.pseudonym.period = pseudonym_period;
  sc.pseudonym.random_phase = false;
  sc.vehicles.push_back(constant_velocity({0.0, 0.0}, 0.0, 10.0, duration, sc.dt));
  sc.vehicles.push_back(constant_velocity({0.0, 3.5}, 0.0, 10.0, duration, sc.dt));
  sc.attack.attacker_ratio = 0.0;
  sc.finalize();
  return sc;
}

Scenario make_ring_scenario(int count, double radius, double speed, double duration) {
  Scenario sc;
  sc.duration = duration;
  sc.dt = 0.1;
  sc.seed = 2;
  const double omega = speed / radius;
  const auto steps = static_cast<long long>(std::llround(duration / sc.dt));
  for (int v = 0; v < count; ++v) {
    Trajectory tr;
    tr.spawn = 0.0;
    tr.despawn = duration;
    tr.samples.reserve(static_cast<std::size_t>(steps));
    const double theta0 = 2.0 * kPi * v / count;
    for (long long k = 0; k < steps; ++k) {
      const double t = static_cast<double>(k) * sc.dt;
      const double th = theta0 + omega * t;
      const LocalPoint pos{radius * std::cos(th), radius * std::sin(th)};
      const double heading = normalize_heading(th + kPi / 2.0);
      const Vec2 accel{-speed * omega * std::cos(th), -speed * omega * std::sin(th)};
      tr.samples.push_back(TrajectorySample{t, pos, heading, speed, accel});
    }
    sc.vehicles.push_back(std::move(tr));
  }
  sc.attack.attacker_ratio = 0.0;
  sc.finalize();
  return sc;
}

Scenario make_parallel_trio(double duration) {
  // 50 m spacing: everyone inside everyone's 80 m sensor, yet far enough that
  // a falsified claim (<= 40 m offset) can never land within the association
  // radius of an honest vehicle.
  Scenario sc;
  sc.duration = duration;
  sc.dt = 0.1;
  sc.seed = 3;
  sc.vehicles.push_back(constant_velocity({0.0, 0.0}, 0.0, 12.0, duration, sc.dt));
  sc.vehicles.push_back(constant_velocity({50.0, 3.5}, 0.0, 12.0, duration, sc.dt));
  sc.vehicles.push_back(constant_velocity({100.0, 7.0}, 0.0, 12.0, duration, sc.dt));
  sc.finalize();
  return sc;
}

}  // namespace mbdsim
