#include "mbdsim/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <json.hpp>

#include "mbdsim/errors.hpp"
#include "mbdsim/rng.hpp"

namespace mbdsim {

namespace {
using njson = nlohmann::json;
constexpr double kPi = std::numbers::pi;

double lerp(double a, double b, double w) { return a + (b - a) * w; }

double lerp_heading(double a, double b, double w) {
  double d = std::fmod(b - a, 2.0 * kPi);
  if (d > kPi) d -= 2.0 * kPi;
  if (d < -kPi) d += 2.0 * kPi;
  return normalize_heading(a + d * w);
}
}  // namespace

Trajectory::State Trajectory::state_at(double t) const {
  const TrajectorySample* lo = &samples.front();
  const TrajectorySample* hi = &samples.back();
  if (t <= lo->t) {
    hi = lo;
  } else if (t >= hi->t) {
    lo = hi;
  } else {
    const auto it = std::upper_bound(samples.begin(), samples.end(), t,
                                     [](double v, const TrajectorySample& s) { return v < s.t; });
    hi = &*it;
    lo = hi - 1;
  }
  State st;
  if (lo == hi) {
    st.heading = lo->heading;
    st.report.position = lo->pos;
    st.report.acceleration = lo->accel;
    st.report.velocity = Vec2{std::cos(lo->heading), std::sin(lo->heading)} * lo->speed;
    return st;
  }
  const double w = (t - lo->t) / (hi->t - lo->t);
  st.heading = lerp_heading(lo->heading, hi->heading, w);
  st.report.position = LocalPoint{lerp(lo->pos.x, hi->pos.x, w), lerp(lo->pos.y, hi->pos.y, w)};
  st.report.acceleration = Vec2{lerp(lo->accel.x, hi->accel.x, w), lerp(lo->accel.y, hi->accel.y, w)};
  const double speed = lerp(lo->speed, hi->speed, w);
  st.report.velocity = Vec2{std::cos(st.heading), std::sin(st.heading)} * speed;
  return st;
}

void validate_trajectory(const Trajectory& tr, std::size_t vehicle_index) {
  const std::string who = "vehicle " + std::to_string(vehicle_index);
  if (tr.samples.empty()) throw ParseError(who + ": trajectory has no samples");
  for (std::size_t k = 0; k < tr.samples.size(); ++k) {
    const auto& s = tr.samples[k];
    if (!std::isfinite(s.pos.x) || !std::isfinite(s.pos.y) || !std::isfinite(s.speed) ||
        !std::isfinite(s.heading)) {
      throw ParseError(who + ": non-finite sample at index " + std::to_string(k));
    }
    if (s.speed < 0.0) {
      throw ParseError(who + ": negative speed at index " + std::to_string(k));
    }
    if (k == 0) continue;
    const auto& p = tr.samples[k - 1];
    if (!(s.t > p.t)) {
      throw ParseError(who + ": non-monotone sample time at index " + std::to_string(k));
    }
    // Finite-difference consistency on straight steps; cornering chords are
    // shorter than the path and get a pass.
    if (angular_offset(s.heading, p.heading) > 10.0 * kPi / 180.0) continue;
    const double avg_speed = (s.speed + p.speed) / 2.0;
    if (avg_speed < 0.5) continue;
    const double fd_speed = distance(s.pos, p.pos) / (s.t - p.t);
    if (std::abs(fd_speed - avg_speed) > 0.10 * std::max(avg_speed, 1.0)) {
      throw ParseError(who + ": kinematically inconsistent step at index " + std::to_string(k) +
                       " (finite-difference speed " + std::to_string(fd_speed) +
                       " vs stored " + std::to_string(avg_speed) + ")");
    }
  }
}

StationId Scenario::pseudonym_at(std::size_t vehicle, double t) const {
  const double phase = vehicle < pseudonym_phase.size() ? pseudonym_phase[vehicle] : 0.0;
  const auto epoch = static_cast<std::size_t>(std::floor((t + phase) / pseudonym.period));
  return pseudonym_ids_.at(vehicle).at(epoch);
}

std::size_t Scenario::attacker_count() const {
  return static_cast<std::size_t>(
      std::count(attacker_flags.begin(), attacker_flags.end(), std::uint8_t{1}));
}

double Scenario::mean_concurrency(double from) const {
  if (duration <= from) return 0.0;
  const auto steps = static_cast<std::size_t>(std::llround(duration / dt));
  std::size_t total = 0, counted_steps = 0;
  for (std::size_t i = 0; i < steps; ++i) {
    const double t = static_cast<double>(i) * dt;
    if (t < from) continue;
    ++counted_steps;
    for (const auto& v : vehicles) {
      if (v.alive(t)) ++total;
    }
  }
  return counted_steps == 0 ? 0.0 : static_cast<double>(total) / static_cast<double>(counted_steps);
}

void Scenario::finalize() {
  const std::size_t n = vehicles.size();
  if (attacker_flags.size() != n) attacker_flags.assign(n, 0);

  pseudonym_phase.assign(n, 0.0);
  if (pseudonym.random_phase) {
    for (std::size_t i = 0; i < n; ++i) {
      auto rng = make_stream(seed, "pseudophase", i);
      pseudonym_phase[i] =
          std::uniform_real_distribution<double>(0.0, pseudonym.period)(rng);
    }
  }

  // Globally unique station IDs per (vehicle, epoch): stronger than liveness
  // uniqueness and independent of which vehicles happen to coexist.
  const auto epochs =
      static_cast<std::size_t>(std::floor((duration + pseudonym.period) / pseudonym.period)) + 2;
  pseudonym_ids_.assign(n, {});
  std::set<std::uint32_t> used;
  for (std::size_t v = 0; v < n; ++v) {
    pseudonym_ids_[v].reserve(epochs);
    for (std::size_t e = 0; e < epochs; ++e) {
      std::uint64_t salt = 0;
      std::uint32_t id;
      do {
        id = static_cast<std::uint32_t>(
            stream_seed(seed, "pseudonym", (v * 0x9E3779B9ull + e) * 0x10001ull + salt));
        ++salt;
      } while (id == 0 || !used.insert(id).second);
      pseudonym_ids_[v].push_back(StationId{id});
    }
  }
}

void assign_roles(Scenario& scenario, const AttackConfig& attack, std::uint64_t seed) {
  if (!attack.valid()) throw ConfigError("attack config invalid");
  scenario.attack = attack;
  scenario.attacker_flags.assign(scenario.vehicles.size(), 0);
  auto rng = make_stream(seed, "roles");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (auto& flag : scenario.attacker_flags) {
    flag = unit(rng) < attack.attacker_ratio ? 1 : 0;
  }
}

FalsifyResult falsify_position(const CamMessage& cam, const AttackConfig& cfg,
                               std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (unit(rng) >= cfg.falsify_prob) return {cam, false};

  FalsifyResult out{cam, true};
  if (cfg.offset_mode == OffsetMode::Meters) {
    const double mag = std::uniform_real_distribution<double>(cfg.offset_min, cfg.offset_max)(rng);
    const double ang = std::uniform_real_distribution<double>(0.0, 2.0 * kPi)(rng);
    out.cam.body.position = out.cam.body.position + Vec2{mag * std::cos(ang), mag * std::sin(ang)};
  } else {
    std::uniform_real_distribution<double> deg(cfg.deg_min, cfg.deg_max);
    const double dlat = deg(rng);
    const double dlon = deg(rng);
    const double sign_lat = unit(rng) < 0.5 ? -1.0 : 1.0;
    const double sign_lon = unit(rng) < 0.5 ? -1.0 : 1.0;
    const double to_rad = kPi / 180.0;
    out.cam.body.position =
        out.cam.body.position +
        Vec2{sign_lon * kEarthRadiusMeters * std::cos(cfg.origin_lat * to_rad) * dlon * to_rad,
             sign_lat * kEarthRadiusMeters * dlat * to_rad};
  }
  return out;
}

// ---------------------------------------------------------------------------
// Trace ingestion
// ---------------------------------------------------------------------------

namespace {

struct TraceRecord {
  double t;
  long veh;
  double x, y;
  double speed;
  double heading;  // radians, after conversion
  double accel;    // longitudinal
};

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_num(const std::string& s, std::size_t line_no, const char* field) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ParseError("trace line " + std::to_string(line_no) + ": field '" + field +
                     "' is not a number: '" + s + "'");
  }
}

}  // namespace

Scenario load_trace(const std::filesystem::path& path, const GeoOrigin& origin) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open trace file: " + path.string());

  std::string line;
  std::size_t line_no = 0;
  std::vector<TraceRecord> records;
  bool json_mode = false;
  bool header_done = false;
  std::vector<std::string> cols;

  auto column = [&](const char* name) -> int {
    const auto it = std::find(cols.begin(), cols.end(), name);
    return it == cols.end() ? -1 : static_cast<int>(it - cols.begin());
  };

  int c_t = -1, c_veh = -1, c_lat = -1, c_lon = -1, c_x = -1, c_y = -1, c_speed = -1,
      c_heading = -1, c_accel = -1;

  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (!header_done) {
      json_mode = line[line.find_first_not_of(" \t")] == '{';
      if (!json_mode) {
        cols = split_csv(line);
        c_t = column("t");
        c_veh = column("veh");
        c_lat = column("lat");
        c_lon = column("lon");
        c_x = column("x");
        c_y = column("y");
        c_speed = column("speed");
        c_heading = column("heading");
        c_accel = column("accel");
        if (c_t < 0 || c_veh < 0 || c_speed < 0 || c_heading < 0 || c_accel < 0 ||
            ((c_lat < 0 || c_lon < 0) && (c_x < 0 || c_y < 0))) {
          throw ParseError("trace line 1: header must name t, veh, speed, heading, accel and "
                           "either lat/lon or x/y");
        }
        header_done = true;
        continue;
      }
      header_done = true;
    }

    TraceRecord rec{};
    if (json_mode) {
      njson j;
      try {
        j = njson::parse(line);
        rec.t = j.at("t").get<double>();
        rec.veh = j.at("veh").get<long>();
        if (j.contains("lat")) {
          const LocalPoint p =
              latlon_to_local(j.at("lat").get<double>(), j.at("lon").get<double>(), origin);
          rec.x = p.x;
          rec.y = p.y;
        } else {
          rec.x = j.at("x").get<double>();
          rec.y = j.at("y").get<double>();
        }
        rec.speed = j.at("speed").get<double>();
        rec.heading = normalize_heading(j.at("heading").get<double>() * kPi / 180.0);
        rec.accel = j.at("accel").get<double>();
      } catch (const njson::exception& e) {
        throw ParseError("trace line " + std::to_string(line_no) + ": " + e.what());
      }
    } else {
      const auto fields = split_csv(line);
      if (fields.size() != cols.size()) {
        throw ParseError("trace line " + std::to_string(line_no) + ": expected " +
                         std::to_string(cols.size()) + " fields, got " +
                         std::to_string(fields.size()));
      }
      rec.t = parse_num(fields[c_t], line_no, "t");
      rec.veh = static_cast<long>(parse_num(fields[c_veh], line_no, "veh"));
      if (c_lat >= 0 && c_lon >= 0) {
        const LocalPoint p = latlon_to_local(parse_num(fields[c_lat], line_no, "lat"),
                                             parse_num(fields[c_lon], line_no, "lon"), origin);
        rec.x = p.x;
        rec.y = p.y;
      } else {
        rec.x = parse_num(fields[c_x], line_no, "x");
        rec.y = parse_num(fields[c_y], line_no, "y");
      }
      rec.speed = parse_num(fields[c_speed], line_no, "speed");
      rec.heading = normalize_heading(parse_num(fields[c_heading], line_no, "heading") * kPi / 180.0);
      rec.accel = parse_num(fields[c_accel], line_no, "accel");
    }
    if (rec.speed < 0.0) {
      throw ParseError("trace line " + std::to_string(line_no) + ": negative speed");
    }
    records.push_back(rec);
  }
  if (records.empty()) throw ParseError("trace file has no records: " + path.string());

  // Group records per vehicle, keeping first-appearance order.
  std::vector<long> order;
  std::vector<std::vector<const TraceRecord*>> grouped;
  for (const auto& rec : records) {
    auto it = std::find(order.begin(), order.end(), rec.veh);
    std::size_t idx;
    if (it == order.end()) {
      order.push_back(rec.veh);
      grouped.emplace_back();
      idx = grouped.size() - 1;
    } else {
      idx = static_cast<std::size_t>(it - order.begin());
    }
    grouped[idx].push_back(&rec);
  }

  Scenario sc;
  sc.dt = 0.1;
  for (std::size_t v = 0; v < grouped.size(); ++v) {
    Trajectory tr;
    for (const TraceRecord* rec : grouped[v]) {
      const double h = rec->heading;
      tr.samples.push_back(TrajectorySample{
          rec->t, LocalPoint{rec->x, rec->y}, h, rec->speed,
          Vec2{std::cos(h), std::sin(h)} * rec->accel});
    }
    for (std::size_t k = 1; k < tr.samples.size(); ++k) {
      if (!(tr.samples[k].t > tr.samples[k - 1].t)) {
        throw ParseError("vehicle " + std::to_string(order[v]) +
                         ": non-monotone time at sample " + std::to_string(k));
      }
    }
    tr.spawn = tr.samples.front().t;
    tr.despawn = tr.samples.back().t;
    validate_trajectory(tr, v);
    sc.vehicles.push_back(std::move(tr));
  }
  sc.duration = 0.0;
  for (const auto& tr : sc.vehicles) sc.duration = std::max(sc.duration, tr.despawn);
  sc.finalize();
  return sc;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

namespace {

njson attack_to_json(const AttackConfig& a) {
  return njson{{"attacker_ratio", a.attacker_ratio},
               {"falsify_prob", a.falsify_prob},
               {"offset_min", a.offset_min},
               {"offset_max", a.offset_max},
               {"offset_mode", a.offset_mode == OffsetMode::Meters ? "meters" : "degrees"},
               {"deg_min", a.deg_min},
               {"deg_max", a.deg_max},
               {"origin_lat", a.origin_lat}};
}

AttackConfig attack_from_json(const njson& j) {
  AttackConfig a;
  a.attacker_ratio = j.at("attacker_ratio").get<double>();
  a.falsify_prob = j.at("falsify_prob").get<double>();
  a.offset_min = j.at("offset_min").get<double>();
  a.offset_max = j.at("offset_max").get<double>();
  const std::string mode = j.at("offset_mode").get<std::string>();
  if (mode != "meters" && mode != "degrees") {
    throw ParseError("scenario: unknown offset_mode '" + mode + "'");
  }
  a.offset_mode = mode == "meters" ? OffsetMode::Meters : OffsetMode::Degrees;
  a.deg_min = j.at("deg_min").get<double>();
  a.deg_max = j.at("deg_max").get<double>();
  a.origin_lat = j.at("origin_lat").get<double>();
  return a;
}

njson synth_to_json(const SynthParams& p) {
  return njson{{"blocks", p.blocks},         {"block_len", p.block_len},
               {"lanes", p.lanes},           {"spawn_rate", p.spawn_rate},
               {"speed_min", p.speed_min},   {"speed_max", p.speed_max},
               {"duration", p.duration},     {"turn_radius", p.turn_radius},
               {"turn_speed", p.turn_speed}, {"accel", p.accel},
               {"decel", p.decel},           {"warm_start", p.warm_start}};
}

SynthParams synth_from_json(const njson& j) {
  SynthParams p;
  p.blocks = j.at("blocks").get<int>();
  p.block_len = j.at("block_len").get<double>();
  p.lanes = j.at("lanes").get<int>();
  p.spawn_rate = j.at("spawn_rate").get<double>();
  p.speed_min = j.at("speed_min").get<double>();
  p.speed_max = j.at("speed_max").get<double>();
  p.duration = j.at("duration").get<double>();
  p.turn_radius = j.at("turn_radius").get<double>();
  p.turn_speed = j.at("turn_speed").get<double>();
  p.accel = j.at("accel").get<double>();
  p.decel = j.at("decel").get<double>();
  p.warm_start = j.value("warm_start", 0.0);
  return p;
}

}  // namespace

std::string scenario_to_json(const Scenario& sc) {
  njson j{{"format", "mbdsim-scenario"},
          {"version", 1},
          {"kind", sc.synth_recipe ? "synth" : "explicit"},
          {"duration", sc.duration},
          {"dt", sc.dt},
          {"seed", sc.seed},
          {"attack", attack_to_json(sc.attack)},
          {"pseudonym",
           njson{{"period", sc.pseudonym.period}, {"random_phase", sc.pseudonym.random_phase}}}};
  if (sc.synth_recipe) {
    j["synth"] = synth_to_json(*sc.synth_recipe);
  } else {
    njson vehicles = njson::array();
    for (std::size_t v = 0; v < sc.vehicles.size(); ++v) {
      const auto& tr = sc.vehicles[v];
      njson samples = njson::array();
      for (const auto& s : tr.samples) {
        samples.push_back(
            njson::array({s.t, s.pos.x, s.pos.y, s.heading, s.speed, s.accel.x, s.accel.y}));
      }
      vehicles.push_back(njson{{"spawn", tr.spawn},
                               {"despawn", tr.despawn},
                               {"attacker", sc.attacker_flags[v] != 0},
                               {"samples", std::move(samples)}});
    }
    j["vehicles"] = std::move(vehicles);
  }
  return j.dump();
}

Scenario scenario_from_json(const std::string& text) {
  njson j;
  try {
    j = njson::parse(text);
  } catch (const njson::parse_error& e) {
    throw ParseError(std::string("scenario: invalid JSON: ") + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != "mbdsim-scenario") {
      throw ParseError("scenario: unrecognized format tag");
    }
    const std::string kind = j.at("kind").get<std::string>();
    const auto seed = j.at("seed").get<std::uint64_t>();
    const AttackConfig attack = attack_from_json(j.at("attack"));
    PseudonymConfig pseudonym;
    pseudonym.period = j.at("pseudonym").at("period").get<double>();
    pseudonym.random_phase = j.at("pseudonym").at("random_phase").get<bool>();

    Scenario sc;
    if (kind == "synth") {
      sc = synth_grid(synth_from_json(j.at("synth")), seed);
      sc.pseudonym = pseudonym;
      assign_roles(sc, attack, seed);
    } else if (kind == "explicit") {
      sc.seed = seed;
      sc.duration = j.at("duration").get<double>();
      sc.dt = j.at("dt").get<double>();
      sc.attack = attack;
      sc.pseudonym = pseudonym;
      for (const auto& vj : j.at("vehicles")) {
        Trajectory tr;
        tr.spawn = vj.at("spawn").get<double>();
        tr.despawn = vj.at("despawn").get<double>();
        for (const auto& s : vj.at("samples")) {
          tr.samples.push_back(TrajectorySample{
              s.at(0).get<double>(), LocalPoint{s.at(1).get<double>(), s.at(2).get<double>()},
              s.at(3).get<double>(), s.at(4).get<double>(),
              Vec2{s.at(5).get<double>(), s.at(6).get<double>()}});
        }
        sc.vehicles.push_back(std::move(tr));
        sc.attacker_flags.push_back(vj.at("attacker").get<bool>() ? 1 : 0);
      }
    } else {
      throw ParseError("scenario: unknown kind '" + kind + "'");
    }
    sc.finalize();
    return sc;
  } catch (const njson::exception& e) {
    throw ParseError(std::string("scenario: ") + e.what());
  }
}

void save_scenario(const Scenario& sc, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write scenario file: " + path.string());
  out << scenario_to_json(sc) << "\n";
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open scenario file: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return scenario_from_json(ss.str());
}

}  // namespace mbdsim
