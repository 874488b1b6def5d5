#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "mbdsim/geo.hpp"
#include "mbdsim/messages.hpp"

namespace mbdsim {

struct TrajectorySample {
  double t = 0.0;
  LocalPoint pos;
  double heading = 0.0;  // radians CCW from +x
  double speed = 0.0;    // m/s, along heading
  Vec2 accel;

  bool operator==(const TrajectorySample&) const = default;
};

/// Ground-truth motion of one vehicle over [spawn, despawn).
struct Trajectory {
  double spawn = 0.0;
  double despawn = 0.0;
  std::vector<TrajectorySample> samples;  // strictly time-ordered

  struct State {
    KinematicReport report;
    double heading = 0.0;
  };

  /// Linear interpolation between bracketing samples (clamped at the ends);
  /// velocity is speed resolved along heading.
  State state_at(double t) const;

  bool alive(double t) const { return t >= spawn && t < despawn; }
  bool operator==(const Trajectory&) const = default;
};

/// Checks sample ordering and that finite-difference speed agrees with the
/// stored speed within 10% on straight steps (heading changes above ~10
/// degrees per step are exempt as cornering chords). Throws on violation.
void validate_trajectory(const Trajectory& tr, std::size_t vehicle_index);

enum class OffsetMode { Meters, Degrees };

struct AttackConfig {
  double attacker_ratio = 0.10;
  double falsify_prob = 0.30;
  double offset_min = 3.0;   // meters
  double offset_max = 40.0;  // meters
  OffsetMode offset_mode = OffsetMode::Meters;
  // Degrees mode reproduces the per-axis add/subtract reading; converted to
  // meters at origin_lat via the same projection as trace ingestion.
  double deg_min = 0.00003;
  double deg_max = 0.00050;
  double origin_lat = 49.6;

  bool valid() const {
    return attacker_ratio >= 0 && attacker_ratio <= 1 && falsify_prob >= 0 && falsify_prob <= 1 &&
           offset_min > 0 && offset_min <= offset_max && deg_min > 0 && deg_min <= deg_max;
  }
};

struct PseudonymConfig {
  double period = 100.0;     // seconds
  bool random_phase = true;  // per-vehicle rotation phase in [0, period)
};

struct SynthParams {
  int blocks = 6;            // grid blocks per side
  double block_len = 150.0;  // meters
  int lanes = 2;             // per direction
  double spawn_rate = 1.0;   // vehicles per second (Poisson)
  double speed_min = 8.0;    // m/s cruise draw
  double speed_max = 14.0;
  double duration = 1000.0;  // seconds
  double turn_radius = 6.0;
  double turn_speed = 5.0;   // m/s through corners
  double accel = 2.0;        // m/s^2 longitudinal
  double decel = 2.5;
  // Lets the spawn process run this long before t = 0 so the recorded window
  // opens on a grid already at steady traffic density.
  double warm_start = 0.0;

  bool valid() const {
    return blocks >= 1 && block_len > 2 * turn_radius + 20 && lanes >= 1 && spawn_rate >= 0 &&
           speed_min > 0 && speed_min <= speed_max && duration > 0 && turn_radius > 0 &&
           turn_speed > 0 && accel > 0 && decel > 0 && warm_start >= 0;
  }
};

/// Time-indexed ground truth plus attacker assignment and the pseudonym
/// rotation schedule. Station IDs are precomputed per (vehicle, epoch) and
/// globally unique, so consecutive epochs always differ and live vehicles
/// never collide.
struct Scenario {
  double duration = 0.0;
  double dt = 0.1;
  std::uint64_t seed = 0;
  std::vector<Trajectory> vehicles;
  std::vector<std::uint8_t> attacker_flags;
  std::vector<double> pseudonym_phase;
  PseudonymConfig pseudonym;
  AttackConfig attack;
  std::optional<SynthParams> synth_recipe;  // set when built by synth_grid

  StationId pseudonym_at(std::size_t vehicle, double t) const;
  std::size_t attacker_count() const;
  /// Mean number of concurrently alive vehicles over [from, duration).
  double mean_concurrency(double from = 0.0) const;

  /// Rebuilds pseudonym phases and the station-ID table from the seed. Must
  /// run after any change to vehicles, seed, or pseudonym config.
  void finalize();

 private:
  std::vector<std::vector<StationId>> pseudonym_ids_;  // [vehicle][epoch]
};

/// Manhattan-grid traffic: Poisson arrivals at boundary entries, random turn
/// decisions, trapezoidal speed profiles through filleted corners. Identical
/// seeds produce bit-identical scenarios.
Scenario synth_grid(const SynthParams& params, std::uint64_t seed);

/// Flags each vehicle as an attacker independently with probability
/// attack.attacker_ratio, drawn from the scenario's role stream.
void assign_roles(Scenario& scenario, const AttackConfig& attack, std::uint64_t seed);

/// FCD-style trace replay. CSV columns: t, veh, lat, lon (or x, y), speed,
/// heading, accel — heading in degrees CCW from east, accel along heading.
Scenario load_trace(const std::filesystem::path& path, const GeoOrigin& origin);

struct FalsifyResult {
  CamMessage cam;
  bool falsified = false;
};

/// With probability falsify_prob, displaces the CAM position by a random
/// offset (magnitude uniform in [offset_min, offset_max] at a uniform angle,
/// or the per-axis degree variant). Everything but the position is untouched.
FalsifyResult falsify_position(const CamMessage& cam, const AttackConfig& cfg,
                               std::mt19937_64& rng);

std::string scenario_to_json(const Scenario& scenario);
Scenario scenario_from_json(const std::string& text);
void save_scenario(const Scenario& scenario, const std::filesystem::path& path);
Scenario load_scenario(const std::filesystem::path& path);

}  // namespace mbdsim
