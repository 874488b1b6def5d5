#include "mbdsim/runner.hpp"

#include <cstdlib>
#include <fstream>
#include <thread>

#include <json.hpp>

#include "mbdsim/errors.hpp"
#include "mbdsim/rng.hpp"

namespace mbdsim {

namespace {
using njson = nlohmann::json;

// Artifacts are byte-identical for any thread count; MBDSIM_THREADS only caps
// how many receivers are processed concurrently.
int thread_budget() {
  int threads = static_cast<int>(std::thread::hardware_concurrency());
  threads = std::max(1, std::min(threads, 8));
  if (const char* env = std::getenv("MBDSIM_THREADS")) {
    const int cap = std::atoi(env);
    if (cap >= 1) threads = std::min(threads, cap);
  }
  return threads;
}

const char* sensor_name(SensorKind k) { return k == SensorKind::Front ? "front" : "omni"; }

SensorKind sensor_from(const std::string& name) {
  if (name == "front") return SensorKind::Front;
  if (name == "omni") return SensorKind::Omni;
  throw ConfigError("unknown sensor kind '" + name + "' (expected front|omni)");
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << content;
}
}  // namespace

KernelConfig RunConfig::kernel() const {
  KernelConfig k;
  k.radio = radio;
  k.schedule = schedule;
  k.filter = filter;
  k.sensor = SensorConfig::of(sensor);
  k.cpm_enabled = cpm_enabled;
  k.s_max = s_max;
  k.assoc_radius = assoc_radius;
  k.seed = seed;
  k.threads = thread_budget();
  return k;
}

void RunConfig::validate() const {
  if (!filter.valid()) throw ConfigError("config: filter params must be strictly positive");
  if (!radio.valid()) throw ConfigError("config: radio requires 0 <= p_loss < 1 and 0 < d_margin < r_max");
  if (s_max < SensorConfig::of(sensor).range) {
    throw ConfigError("config: s_max must be >= sensor range");
  }
  if (assoc_radius <= 0) throw ConfigError("config: assoc_radius must be positive");
  if (warmup < 0) throw ConfigError("config: warmup must be non-negative");
  if (schedule.cam_period <= 0 || schedule.cpm_period <= 0) {
    throw ConfigError("config: emission periods must be positive");
  }
}

std::string run_config_to_json(const RunConfig& cfg) {
  njson j{{"scenario", cfg.scenario_path ? njson(*cfg.scenario_path) : njson(nullptr)},
          {"seed", cfg.seed},
          {"cpm", cfg.cpm_enabled},
          {"sensor", sensor_name(cfg.sensor)},
          {"filter",
           njson{{"q", cfg.filter.q},
                 {"sigma_pos", cfg.filter.sigma_pos},
                 {"sigma_vel", cfg.filter.sigma_vel},
                 {"theta_pos", cfg.filter.theta_pos},
                 {"theta_vel", cfg.filter.theta_vel},
                 {"t_stale", cfg.filter.t_stale}}},
          {"radio",
           njson{{"r_max", cfg.radio.r_max},
                 {"p_loss", cfg.radio.p_loss},
                 {"d_margin", cfg.radio.d_margin}}},
          {"schedule",
           njson{{"cam_period", cfg.schedule.cam_period},
                 {"cpm_period", cfg.schedule.cpm_period},
                 {"phase_jitter", cfg.schedule.phase_jitter}}},
          {"s_max", cfg.s_max},
          {"assoc_radius", cfg.assoc_radius},
          {"warmup", cfg.warmup},
          {"audit", cfg.audit},
          {"duration", cfg.duration}};
  return j.dump(2) + "\n";
}

RunConfig run_config_from_json(const std::string& text) {
  njson j;
  try {
    j = njson::parse(text);
  } catch (const njson::parse_error& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  try {
    RunConfig cfg;
    if (j.contains("scenario") && !j.at("scenario").is_null()) {
      cfg.scenario_path = j.at("scenario").get<std::string>();
    }
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("cpm")) cfg.cpm_enabled = j.at("cpm").get<bool>();
    if (j.contains("sensor")) cfg.sensor = sensor_from(j.at("sensor").get<std::string>());
    if (j.contains("filter")) {
      const auto& f = j.at("filter");
      cfg.filter.q = f.value("q", cfg.filter.q);
      cfg.filter.sigma_pos = f.value("sigma_pos", cfg.filter.sigma_pos);
      cfg.filter.sigma_vel = f.value("sigma_vel", cfg.filter.sigma_vel);
      cfg.filter.theta_pos = f.value("theta_pos", cfg.filter.theta_pos);
      cfg.filter.theta_vel = f.value("theta_vel", cfg.filter.theta_vel);
      cfg.filter.t_stale = f.value("t_stale", cfg.filter.t_stale);
    }
    if (j.contains("radio")) {
      const auto& r = j.at("radio");
      cfg.radio.r_max = r.value("r_max", cfg.radio.r_max);
      cfg.radio.p_loss = r.value("p_loss", cfg.radio.p_loss);
      cfg.radio.d_margin = r.value("d_margin", cfg.radio.d_margin);
    }
    if (j.contains("schedule")) {
      const auto& s = j.at("schedule");
      cfg.schedule.cam_period = s.value("cam_period", cfg.schedule.cam_period);
      cfg.schedule.cpm_period = s.value("cpm_period", cfg.schedule.cpm_period);
      cfg.schedule.phase_jitter = s.value("phase_jitter", cfg.schedule.phase_jitter);
    }
    cfg.s_max = j.value("s_max", cfg.s_max);
    cfg.assoc_radius = j.value("assoc_radius", cfg.assoc_radius);
    cfg.warmup = j.value("warmup", cfg.warmup);
    cfg.audit = j.value("audit", cfg.audit);
    cfg.duration = j.value("duration", cfg.duration);
    return cfg;
  } catch (const njson::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

std::string config_hash(const std::string& config_json) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a(config_json)));
  return std::string(buf);
}

std::string summary_json(const std::string& label, const RunConfig& cfg, const RunArtifacts& art,
                         const RunSummary& s) {
  njson windows = njson::array();
  for (const auto& w : art.metrics.windows()) {
    const WindowRates r = rates(w);
    windows.push_back(njson{{"window_start", w.window_start},
                            {"tp", r.tp ? njson(*r.tp) : njson(nullptr)},
                            {"fp", r.fp ? njson(*r.fp) : njson(nullptr)},
                            {"attack_received", w.attack_received},
                            {"attack_rejected", w.attack_rejected},
                            {"valid_received", w.valid_received},
                            {"valid_rejected", w.valid_rejected}});
  }
  njson j{{"label", label},
          {"warmup", s.warmup},
          {"steady_windows", s.steady_windows},
          {"tp_avg", s.tp_avg},
          {"tp_worst", s.tp_worst},
          {"fp_avg", s.fp_avg},
          {"fp_best", s.fp_best},
          {"tp_receiver_avg", s.tp_receiver_avg ? njson(*s.tp_receiver_avg) : njson(nullptr)},
          {"fp_receiver_avg", s.fp_receiver_avg ? njson(*s.fp_receiver_avg) : njson(nullptr)},
          {"cam_emissions", art.cam_emissions},
          {"cpm_emissions", art.cpm_emissions},
          {"cam_deliveries", art.cam_deliveries},
          {"cpm_deliveries", art.cpm_deliveries},
          {"verdicts", art.verdicts},
          {"cpm_rejected", art.cpm.rejected},
          {"cpm_object_actions",
           njson{{"matched_no_update", art.cpm.object_actions[0]},
                 {"created_track", art.cpm.object_actions[1]},
                 {"discarded_range_bound", art.cpm.object_actions[2]},
                 {"discarded_out_of_sector", art.cpm.object_actions[3]}}},
          {"cam_stream_hash", art.cam_stream_hash},
          {"audit_hash", art.audit_hash},
          {"sensor", sensor_name(cfg.sensor)},
          {"cpm", cfg.cpm_enabled},
          {"seed", cfg.seed},
          {"windows", std::move(windows)}};
  return j.dump(2) + "\n";
}

RunOutputs execute_run(const Scenario& scenario, const RunConfig& cfg, const std::string& label,
                       const std::optional<std::filesystem::path>& out_dir) {
  cfg.validate();
  RunConfig stamped = cfg;
  stamped.duration = scenario.duration;
  RunOutputs out;
  out.config_json = run_config_to_json(stamped);
  out.hash = config_hash(out.config_json);

  std::ofstream audit_file;
  LineSink audit_sink;
  if (out_dir) {
    std::filesystem::create_directories(*out_dir);
    write_file(*out_dir / "config.json", out.config_json);
    if (cfg.audit) {
      out.audit_path = *out_dir / ("audit_" + out.hash + ".jsonl");
      audit_file.open(out.audit_path, std::ios::binary);
      if (!audit_file) throw ConfigError("cannot write " + out.audit_path.string());
      audit_sink = [&audit_file](std::string_view chunk) {
        audit_file.write(chunk.data(), static_cast<std::streamsize>(chunk.size()));
      };
    }
  }

  out.artifacts = run(scenario, cfg.kernel(), audit_sink);
  if (audit_file.is_open()) audit_file.close();
  out.summary = out.artifacts.metrics.summarize(cfg.warmup);

  if (out_dir) {
    out.metrics_path = *out_dir / ("metrics_" + out.hash + ".csv");
    write_file(out.metrics_path, metrics_csv(out.artifacts.metrics.windows()));
    out.summary_tsv_path = *out_dir / ("summary_" + out.hash + ".tsv");
    write_file(out.summary_tsv_path,
               "config\ttp_avg\ttp_worst\tfp_avg\tfp_best\n" + summary_tsv(label, out.summary));
    out.summary_json_path = *out_dir / ("summary_" + out.hash + ".json");
    write_file(out.summary_json_path, summary_json(label, cfg, out.artifacts, out.summary));
  }
  return out;
}

}  // namespace mbdsim
