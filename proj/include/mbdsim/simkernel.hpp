#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>

#include "mbdsim/detector.hpp"
#include "mbdsim/metrics.hpp"
#include "mbdsim/radio.hpp"
#include "mbdsim/scenario.hpp"

namespace mbdsim {

struct KernelConfig {
  RadioConfig radio;
  EmissionSchedule schedule;
  FilterParams filter;
  SensorConfig sensor = SensorConfig::front();
  bool cpm_enabled = true;
  double s_max = 100.0;
  double assoc_radius = 3.0;
  std::uint64_t seed = 0;
  int threads = 1;
};

/// CPM-side diagnostic counters (CPM verdicts stay out of the TP/FP rates).
struct CpmDiagnostics {
  std::uint64_t received = 0;
  std::uint64_t rejected = 0;
  std::array<std::uint64_t, 4> object_actions{};  // indexed by ObjectAction
};

struct RunArtifacts {
  MetricsAccumulator metrics;
  std::uint64_t cam_emissions = 0;
  std::uint64_t cpm_emissions = 0;
  std::uint64_t cam_deliveries = 0;
  std::uint64_t cpm_deliveries = 0;
  std::uint64_t verdicts = 0;
  CpmDiagnostics cpm;
  std::uint64_t cam_stream_hash = 0;   // FNV over CAM emission trace records
  std::uint64_t audit_hash = 0;        // FNV over all audit bytes
};

/// Receives audit/emission lines in deterministic order. Lines arrive with a
/// trailing newline.
using LineSink = std::function<void(std::string_view)>;

/// Candidate receivers for one emission: live vehicles other than the sender
/// within r_max (inclusive), each kept with probability 1 - p_loss.
std::vector<std::size_t> deliver(LocalPoint sender_pos, std::size_t sender_index,
                                 std::span<const LocalPoint> positions,
                                 std::span<const std::size_t> live_indices,
                                 const RadioConfig& radio, std::mt19937_64& rng);

/// Fixed-step simulation loop: ground truth advance, scheduled CAM/CPM
/// emission (attackers falsify CAM positions), unit-disk lossy delivery, and
/// per-receiver detector processing in (rx_time, sender id) order. Identical
/// scenario, config, and seed give bit-identical artifacts.
RunArtifacts run(const Scenario& scenario, const KernelConfig& cfg, LineSink audit_sink = {},
                 LineSink emission_sink = {});

}  // namespace mbdsim
