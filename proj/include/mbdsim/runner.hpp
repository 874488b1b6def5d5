#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "mbdsim/simkernel.hpp"

namespace mbdsim {

/// One experiment cell: everything the kernel needs plus reporting knobs.
struct RunConfig {
  std::optional<std::string> scenario_path;  // omitted when the scenario is in-memory
  std::uint64_t seed = 0;
  bool cpm_enabled = true;
  SensorKind sensor = SensorKind::Front;
  FilterParams filter;
  RadioConfig radio;
  EmissionSchedule schedule;
  double s_max = 100.0;
  double assoc_radius = 3.0;
  double warmup = 500.0;
  bool audit = true;
  double duration = 0.0;  // filled in from the scenario when the run starts

  KernelConfig kernel() const;
  void validate() const;  // throws ConfigError before any simulation
};

std::string run_config_to_json(const RunConfig& cfg);
RunConfig run_config_from_json(const std::string& text);

/// 16-hex-digit FNV-1a content hash used for artifact provenance.
std::string config_hash(const std::string& config_json);

struct RunOutputs {
  RunArtifacts artifacts;
  RunSummary summary;
  std::string config_json;
  std::string hash;
  std::filesystem::path audit_path;     // empty when audit disabled
  std::filesystem::path metrics_path;
  std::filesystem::path summary_tsv_path;
  std::filesystem::path summary_json_path;
};

/// Runs one cell and, when `out_dir` is given, writes config.json plus
/// hash-stamped audit/metrics/summary artifacts into it.
RunOutputs execute_run(const Scenario& scenario, const RunConfig& cfg, const std::string& label,
                       const std::optional<std::filesystem::path>& out_dir);

std::string summary_json(const std::string& label, const RunConfig& cfg, const RunArtifacts& art,
                         const RunSummary& summary);

}  // namespace mbdsim
