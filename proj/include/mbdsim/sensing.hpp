#pragma once

#include <numbers>
#include <span>
#include <vector>

#include "mbdsim/geo.hpp"
#include "mbdsim/messages.hpp"

namespace mbdsim {

enum class SensorKind { Front, Omni };

struct SensorConfig {
  SensorKind kind = SensorKind::Front;
  double fov = std::numbers::pi / 3.0;  // radians
  double range = 80.0;                  // meters

  static SensorConfig front() { return {SensorKind::Front, std::numbers::pi / 3.0, 80.0}; }
  static SensorConfig omni() { return {SensorKind::Omni, 2.0 * std::numbers::pi, 80.0}; }
  static SensorConfig of(SensorKind kind) {
    return kind == SensorKind::Front ? front() : omni();
  }
};

/// Oriented rectangle used for line-of-sight occlusion.
struct VehicleFootprint {
  LocalPoint center;
  double heading = 0.0;
  double length = 4.5;
  double width = 1.8;
};

/// True when the open segment a-b touches the rectangle.
bool segment_intersects_footprint(LocalPoint a, LocalPoint b, const VehicleFootprint& rect);

/// Indices of vehicles whose centers sit inside the sensor sector with an
/// unobstructed line of sight from the sensor origin, sorted by ascending
/// distance (ties by index). `others` must not contain the perceiving
/// vehicle itself.
std::vector<std::size_t> perceive(const Pose& self_pose, std::span<const VehicleFootprint> others,
                                  const SensorConfig& cfg);

/// Converts the nearest `cap` perceived vehicles into sender-relative
/// perceived objects. `truth[i]` is the ground-truth kinematic state of
/// `others[i]`.
std::vector<PerceivedObject> build_cpm_objects(const KinematicReport& self_state,
                                               double self_heading,
                                               std::span<const std::size_t> perceived,
                                               std::span<const KinematicReport> truth,
                                               std::size_t cap = kMaxCpmObjects);

}  // namespace mbdsim
