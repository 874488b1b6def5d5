#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mbdsim/errors.hpp"
#include "mbdsim/metrics.hpp"
#include "mbdsim/presets.hpp"
#include "mbdsim/runner.hpp"
#include "mbdsim/scenario.hpp"
#include "mbdsim/simkernel.hpp"

namespace fs = std::filesystem;
using namespace mbdsim;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct GenOptions {
  std::string out;
  std::string preset;
  bool synth = false;
  std::string trace;
  double origin_lat = 49.6;
  double origin_lon = 6.1;
  SynthParams params;
  AttackConfig attack;
  PseudonymConfig pseudonym;
  std::uint64_t seed = 1;
  double duration = 1000.0;
  std::string offset_mode = "meters";
  bool pseudonym_fixed_phase = false;
};

int cmd_gen(const GenOptions& opt) {
  Scenario sc;
  AttackConfig attack = opt.attack;
  attack.offset_mode = opt.offset_mode == "degrees" ? OffsetMode::Degrees : OffsetMode::Meters;
  PseudonymConfig pseudonym = opt.pseudonym;
  pseudonym.random_phase = !opt.pseudonym_fixed_phase;

  if (!opt.trace.empty()) {
    sc = load_trace(opt.trace, GeoOrigin{opt.origin_lat, opt.origin_lon});
    sc.seed = opt.seed;
    sc.pseudonym = pseudonym;
    assign_roles(sc, attack, opt.seed);
    sc.finalize();
  } else {
    SynthParams params = opt.params;
    if (opt.preset == "dense") params = dense_grid_params(opt.duration);
    else if (opt.preset == "sparse") params = sparse_grid_params(opt.duration);
    else if (!opt.preset.empty()) throw ConfigError("unknown preset '" + opt.preset + "'");
    params.duration = opt.duration;
    sc = make_grid_scenario(params, attack, opt.seed, pseudonym);
  }

  save_scenario(sc, opt.out);
  const double mean_all = sc.mean_concurrency(0.0);
  const double mean_steady = sc.mean_concurrency(std::min(500.0, sc.duration / 2.0));
  std::printf("scenario: %s\n", opt.out.c_str());
  std::printf("vehicles: %zu (%zu attackers)\n", sc.vehicles.size(), sc.attacker_count());
  std::printf("duration: %.1f s, dt %.2f s\n", sc.duration, sc.dt);
  std::printf("mean concurrency: %.1f (steady %.1f)\n", mean_all, mean_steady);
  if (sc.vehicles.empty()) std::fprintf(stderr, "warning: scenario has no vehicles\n");
  return 0;
}

struct RunOptions {
  std::string scenario_path;
  std::string config_path;
  std::string out_dir = "runs/out";
  std::string label;
  bool matrix = false;
  // overrides; negative/empty mean "not set"
  std::optional<std::uint64_t> seed;
  std::optional<std::string> cpm;
  std::optional<std::string> sensor;
  std::optional<double> attacker_ratio, falsify_prob, offset_min, offset_max;
  std::optional<double> rmax, dmargin, smax, theta_pos, theta_vel, tstale, ploss, warmup;
  std::optional<double> pseudonym_period;
  std::optional<std::string> audit;
};

RunConfig build_config(const RunOptions& opt) {
  RunConfig cfg;
  if (!opt.config_path.empty()) cfg = run_config_from_json(read_file(opt.config_path));
  cfg.scenario_path = opt.scenario_path;
  if (opt.seed) cfg.seed = *opt.seed;
  if (opt.cpm) cfg.cpm_enabled = *opt.cpm != "off";
  if (opt.sensor) {
    if (*opt.sensor != "front" && *opt.sensor != "omni") {
      throw ConfigError("--sensor must be front or omni");
    }
    cfg.sensor = *opt.sensor == "front" ? SensorKind::Front : SensorKind::Omni;
  }
  if (opt.rmax) cfg.radio.r_max = *opt.rmax;
  if (opt.dmargin) cfg.radio.d_margin = *opt.dmargin;
  if (opt.ploss) cfg.radio.p_loss = *opt.ploss;
  if (opt.smax) cfg.s_max = *opt.smax;
  if (opt.theta_pos) cfg.filter.theta_pos = *opt.theta_pos;
  if (opt.theta_vel) cfg.filter.theta_vel = *opt.theta_vel;
  if (opt.tstale) cfg.filter.t_stale = *opt.tstale;
  if (opt.warmup) cfg.warmup = *opt.warmup;
  if (opt.audit) cfg.audit = *opt.audit != "off";
  return cfg;
}

void apply_scenario_overrides(Scenario& sc, const RunOptions& opt) {
  bool reassign = false;
  AttackConfig attack = sc.attack;
  if (opt.attacker_ratio) {
    attack.attacker_ratio = *opt.attacker_ratio;
    reassign = true;
  }
  if (opt.falsify_prob) attack.falsify_prob = *opt.falsify_prob;
  if (opt.offset_min) attack.offset_min = *opt.offset_min;
  if (opt.offset_max) attack.offset_max = *opt.offset_max;
  sc.attack = attack;
  if (reassign) assign_roles(sc, attack, sc.seed);
  if (opt.pseudonym_period) {
    sc.pseudonym.period = *opt.pseudonym_period;
    sc.finalize();
  }
}

void print_summary(const std::string& label, const RunSummary& s) {
  std::printf("%-16s tp_avg %6.2f  tp_worst %6.2f  fp_avg %6.2f  fp_best %6.2f\n", label.c_str(),
              s.tp_avg, s.tp_worst, s.fp_avg, s.fp_best);
}

int cmd_run(const RunOptions& opt) {
  if (opt.scenario_path.empty()) throw ConfigError("run: --scenario is required");
  Scenario sc = load_scenario(opt.scenario_path);
  apply_scenario_overrides(sc, opt);
  RunConfig base = build_config(opt);

  if (!opt.matrix) {
    const std::string label =
        !opt.label.empty()
            ? opt.label
            : std::string(base.cpm_enabled ? "CAM+CPM/" : "CAM/") +
                  (base.sensor == SensorKind::Front ? "front" : "omni");
    const auto out = execute_run(sc, base, label, fs::path(opt.out_dir));
    print_summary(label, out.summary);
    std::printf("artifacts: %s (config hash %s)\n", opt.out_dir.c_str(), out.hash.c_str());
    return 0;
  }

  // 2x2 experiment matrix on the same scenario and seed. CAM-side streams are
  // seed-isolated, so the CAM traffic must be identical across cells.
  struct Cell {
    const char* dir;
    const char* label;
    bool cpm;
    SensorKind sensor;
  };
  const Cell cells[] = {{"cam_front", "CAM/front", false, SensorKind::Front},
                        {"cam_omni", "CAM/omni", false, SensorKind::Omni},
                        {"camcpm_front", "CAM+CPM/front", true, SensorKind::Front},
                        {"camcpm_omni", "CAM+CPM/omni", true, SensorKind::Omni}};
  std::string table = "config\ttp_avg\ttp_worst\tfp_avg\tfp_best\n";
  std::uint64_t cam_hash = 0;
  bool first = true;
  for (const Cell& cell : cells) {
    RunConfig cfg = base;
    cfg.cpm_enabled = cell.cpm;
    cfg.sensor = cell.sensor;
    const auto out = execute_run(sc, cfg, cell.label, fs::path(opt.out_dir) / cell.dir);
    print_summary(cell.label, out.summary);
    table += summary_tsv(cell.label, out.summary);
    if (first) {
      cam_hash = out.artifacts.cam_stream_hash;
      first = false;
    } else if (out.artifacts.cam_stream_hash != cam_hash) {
      throw std::runtime_error("matrix: CAM emission streams diverged across cells");
    }
  }
  std::ofstream tf(fs::path(opt.out_dir) / "matrix_summary.tsv");
  tf << table;
  std::printf("CAM streams identical across cells (hash %016llx)\n",
              static_cast<unsigned long long>(cam_hash));
  return 0;
}

struct ReportOptions {
  std::string run_dir;
};

int cmd_report(const ReportOptions& opt) {
  const fs::path dir(opt.run_dir);
  const fs::path config_path = dir / "config.json";
  if (!fs::exists(config_path)) throw ConfigError("report: missing " + config_path.string());
  const std::string config_json = read_file(config_path);
  const RunConfig cfg = run_config_from_json(config_json);
  const std::string hash = config_hash(config_json);

  const fs::path audit_path = dir / ("audit_" + hash + ".jsonl");
  if (!fs::exists(audit_path)) throw ConfigError("report: missing " + audit_path.string());
  if (cfg.duration <= 0) throw ConfigError("report: config lacks a positive duration");

  // The report is recomputed from the audit log alone.
  MetricsAccumulator acc(cfg.duration);
  std::ifstream in(audit_path, std::ios::binary);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(audit_path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    if (j.at("msg_type").get<std::string>() != "cam") continue;
    acc.record(j.at("receiver").get<std::uint32_t>(),
               j.at("decision").get<std::string>() == "reject", j.at("falsified").get<bool>(),
               j.at("rx_time").get<double>());
  }

  const fs::path report_path = dir / ("report_" + hash + ".csv");
  std::ofstream out(report_path, std::ios::binary);
  out << metrics_csv(acc.windows());
  out.close();

  const RunSummary s = acc.summarize(cfg.warmup);
  std::printf("windows: %zu\n", acc.windows().size());
  std::printf("config\ttp_avg\ttp_worst\tfp_avg\tfp_best\n");
  std::printf("%s", summary_tsv("run", s).c_str());
  std::printf("report: %s\n", report_path.string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mbdsim: V2X misbehavior detection simulator"};
  app.require_subcommand(1);

  GenOptions gen;
  auto* g = app.add_subcommand("gen", "generate a scenario file");
  g->add_option("--out", gen.out, "output scenario JSON")->required();
  g->add_option("--preset", gen.preset, "dense|sparse grid preset");
  g->add_flag("--synth", gen.synth, "synthetic grid from explicit parameters");
  g->add_option("--trace", gen.trace, "FCD-style trace file (CSV or JSON lines)");
  g->add_option("--origin-lat", gen.origin_lat, "projection origin latitude");
  g->add_option("--origin-lon", gen.origin_lon, "projection origin longitude");
  g->add_option("--blocks", gen.params.blocks, "grid blocks per side");
  g->add_option("--block-len", gen.params.block_len, "block edge length, m");
  g->add_option("--lanes", gen.params.lanes, "lanes per direction");
  g->add_option("--spawn-rate", gen.params.spawn_rate, "vehicles per second");
  g->add_option("--speed-min", gen.params.speed_min, "cruise speed lower bound, m/s");
  g->add_option("--speed-max", gen.params.speed_max, "cruise speed upper bound, m/s");
  g->add_option("--warm-start", gen.params.warm_start,
                "run the spawn process this long before t=0, s");
  g->add_option("--duration", gen.duration, "scenario duration, s");
  g->add_option("--seed", gen.seed, "scenario seed");
  g->add_option("--attacker-ratio", gen.attack.attacker_ratio, "attacker probability per vehicle");
  g->add_option("--falsify-prob", gen.attack.falsify_prob, "per-CAM falsification probability");
  g->add_option("--offset-min", gen.attack.offset_min, "attack offset lower bound, m");
  g->add_option("--offset-max", gen.attack.offset_max, "attack offset upper bound, m");
  g->add_option("--offset-mode", gen.offset_mode, "meters|degrees");
  g->add_option("--pseudonym-period", gen.pseudonym.period, "pseudonym change period, s");
  g->add_flag("--pseudonym-phase-zero", gen.pseudonym_fixed_phase,
              "rotate all vehicles on the same boundary");

  RunOptions run_opt;
  auto* r = app.add_subcommand("run", "run an experiment");
  r->add_option("--scenario", run_opt.scenario_path, "scenario JSON")->required();
  r->add_option("--config", run_opt.config_path, "config JSON (flags override)");
  r->add_option("--out", run_opt.out_dir, "artifact directory");
  r->add_option("--label", run_opt.label, "row label for the summary table");
  r->add_flag("--matrix", run_opt.matrix, "run the 2x2 message-set x sensor matrix");
  r->add_option("--seed", run_opt.seed, "run seed (radio loss, emission phases)");
  r->add_option("--cpm", run_opt.cpm, "on|off")->check(CLI::IsMember({"on", "off"}));
  r->add_option("--sensor", run_opt.sensor, "front|omni")->check(CLI::IsMember({"front", "omni"}));
  r->add_option("--attacker-ratio", run_opt.attacker_ratio, "override attacker ratio");
  r->add_option("--falsify-prob", run_opt.falsify_prob, "override falsification probability");
  r->add_option("--offset-min", run_opt.offset_min, "override offset lower bound, m");
  r->add_option("--offset-max", run_opt.offset_max, "override offset upper bound, m");
  r->add_option("--rmax", run_opt.rmax, "radio range, m");
  r->add_option("--dmargin", run_opt.dmargin, "margin distance, m");
  r->add_option("--smax", run_opt.smax, "CPM perception upper bound, m");
  r->add_option("--theta-pos", run_opt.theta_pos, "position gate, m");
  r->add_option("--theta-vel", run_opt.theta_vel, "velocity gate, m/s");
  r->add_option("--tstale", run_opt.tstale, "track staleness bound, s");
  r->add_option("--pseudonym-period", run_opt.pseudonym_period, "pseudonym change period, s");
  r->add_option("--ploss", run_opt.ploss, "packet loss probability");
  r->add_option("--warmup", run_opt.warmup, "steady-state boundary, s");
  r->add_option("--audit", run_opt.audit, "on|off")->check(CLI::IsMember({"on", "off"}));

  ReportOptions rep;
  auto* p = app.add_subcommand("report", "re-render tables from run artifacts");
  p->add_option("--run", rep.run_dir, "run artifact directory")->required();

  try {
    app.parse(argc, argv);
    if (g->parsed()) return cmd_gen(gen);
    if (r->parsed()) return cmd_run(run_opt);
    if (p->parsed()) return cmd_report(rep);
    return 2;
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "mbdsim: %s\n", e.what());
    return 2;
  } catch (const ParseError& e) {
    std::fprintf(stderr, "mbdsim: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "mbdsim: %s\n", e.what());
    return 1;
  }
}
