#include "mbdsim/simkernel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <memory>
#include <thread>

#include "mbdsim/errors.hpp"
#include "mbdsim/rng.hpp"

namespace mbdsim {

namespace {

void append_double(std::string& out, double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, ptr);
}

long long period_steps(double period, double dt, const char* what) {
  const double ratio = period / dt;
  const long long steps = std::llround(ratio);
  if (steps < 1 || std::abs(ratio - static_cast<double>(steps)) > 1e-9) {
    throw ConfigError(std::string(what) + " must be a positive multiple of the scenario step");
  }
  return steps;
}

struct StepMessage {
  const SimEnvelope* env;
  StationId sender_id;
  bool is_cam;
};

/// Audit line: verdict fields plus the ground-truth falsified flag so that
/// reports and replay checks can re-score the run from the log alone.
void format_audit_line(std::string& out, double rx_time, std::size_t receiver, StationId sid,
                       bool is_cam, const Verdict& v, bool falsified) {
  out += R"({"rx_time":)";
  append_double(out, rx_time);
  out += R"(,"receiver":)";
  out += std::to_string(receiver);
  out += R"(,"station_id":)";
  out += std::to_string(sid.value);
  out += R"(,"msg_type":")";
  out += is_cam ? "cam" : "cpm";
  out += R"(","decision":")";
  out += to_string(v.decision);
  out += '"';
  if (std::isfinite(v.d_pos)) {
    out += R"(,"d_pos":)";
    append_double(out, v.d_pos);
    out += R"(,"d_vel":)";
    append_double(out, v.d_vel);
  }
  out += R"(,"falsified":)";
  out += falsified ? "true" : "false";
  out += "}\n";
}

}  // namespace

std::vector<std::size_t> deliver(LocalPoint sender_pos, std::size_t sender_index,
                                 std::span<const LocalPoint> positions,
                                 std::span<const std::size_t> live_indices,
                                 const RadioConfig& radio, std::mt19937_64& rng) {
  std::vector<std::size_t> receivers;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double r2 = radio.r_max * radio.r_max;
  for (std::size_t k = 0; k < live_indices.size(); ++k) {
    if (live_indices[k] == sender_index) continue;
    if (distance_sq(sender_pos, positions[k]) > r2) continue;
    if (radio.p_loss > 0.0 && unit(rng) < radio.p_loss) continue;
    receivers.push_back(k);
  }
  return receivers;
}

RunArtifacts run(const Scenario& sc, const KernelConfig& cfg, LineSink audit_sink,
                 LineSink emission_sink) {
  if (!cfg.radio.valid()) throw ConfigError("kernel: invalid radio config");
  if (!cfg.filter.valid()) throw ConfigError("kernel: filter params must be strictly positive");
  if (cfg.s_max < cfg.sensor.range) throw ConfigError("kernel: s_max must be >= sensor range");
  if (!sc.attack.valid()) throw ConfigError("kernel: invalid attack config");
  if (sc.dt <= 0.0 || sc.duration <= 0.0) throw ConfigError("kernel: invalid scenario timing");

  const std::size_t n = sc.vehicles.size();
  const auto steps = static_cast<long long>(std::llround(sc.duration / sc.dt));
  const long long cam_steps = period_steps(cfg.schedule.cam_period, sc.dt, "cam_period");
  const long long cpm_steps = period_steps(cfg.schedule.cpm_period, sc.dt, "cpm_period");

  // Per-vehicle emission phases. CPM phases are drawn whether or not CPM is
  // enabled so that toggling it cannot shift any other stream.
  std::vector<long long> cam_phase(n, 0), cpm_phase(n, 0);
  if (cfg.schedule.phase_jitter) {
    for (std::size_t i = 0; i < n; ++i) {
      auto rng = make_stream(cfg.seed, "phase", i);
      cam_phase[i] = std::uniform_int_distribution<long long>(0, cam_steps - 1)(rng);
      cpm_phase[i] = std::uniform_int_distribution<long long>(0, cpm_steps - 1)(rng);
    }
  }

  std::vector<long long> spawn_step(n), despawn_step(n);
  for (std::size_t i = 0; i < n; ++i) {
    spawn_step[i] = static_cast<long long>(std::ceil(sc.vehicles[i].spawn / sc.dt - 1e-9));
    despawn_step[i] = static_cast<long long>(std::ceil(sc.vehicles[i].despawn / sc.dt - 1e-9));
  }

  auto cam_radio_rng = make_stream(cfg.seed, "cam_radio");
  auto cpm_radio_rng = make_stream(cfg.seed, "cpm_radio");
  std::vector<std::unique_ptr<std::mt19937_64>> attack_rng(n);

  std::vector<std::unique_ptr<TrackRegistry>> registries(n);

  RunArtifacts art;
  art.metrics = MetricsAccumulator(sc.duration, 50.0, std::min<std::size_t>(n, 4096));
  std::uint64_t cam_hash = kFnvOffsetBasis;
  std::uint64_t audit_hash = kFnvOffsetBasis;

  const int threads = std::max(1, cfg.threads);

  // Reused per-step buffers.
  std::vector<std::size_t> live;
  std::vector<LocalPoint> positions;
  std::vector<Trajectory::State> states;
  std::vector<std::vector<StepMessage>> inboxes(n);
  std::vector<std::string> audit_buf(n);

  for (long long step = 0; step < steps; ++step) {
    const double t = static_cast<double>(step) * sc.dt;

    live.clear();
    positions.clear();
    states.clear();
    for (std::size_t i = 0; i < n; ++i) {
      if (step >= spawn_step[i] && step < despawn_step[i]) {
        live.push_back(i);
      } else if (registries[i]) {
        registries[i].reset();
      }
    }
    states.reserve(live.size());
    positions.reserve(live.size());
    for (std::size_t i : live) {
      states.push_back(sc.vehicles[i].state_at(t));
      positions.push_back(states.back().report.position);
      if (!registries[i]) registries[i] = std::make_unique<TrackRegistry>(cfg.filter);
    }

    // Phase 2: emissions.
    std::vector<SimEnvelope> emissions;
    std::vector<std::size_t> emission_sender_live;  // index into live arrays
    for (std::size_t li = 0; li < live.size(); ++li) {
      const std::size_t i = live[li];
      if ((step + cam_phase[i]) % cam_steps == 0) {
        CamMessage cam{sc.pseudonym_at(i, t), t, states[li].report};
        bool falsified = false;
        if (sc.attacker_flags[i]) {
          if (!attack_rng[i]) {
            attack_rng[i] = std::make_unique<std::mt19937_64>(make_stream(sc.seed, "attack", i));
          }
          auto r = falsify_position(cam, sc.attack, *attack_rng[i]);
          cam = r.cam;
          falsified = r.falsified;
        }
        emissions.push_back(SimEnvelope{cam, static_cast<std::uint32_t>(i), falsified, t});
        emission_sender_live.push_back(li);
        ++art.cam_emissions;
        const std::string line = encode_trace_record(emissions.back());
        cam_hash = fnv1a(line, cam_hash);
        cam_hash = fnv1a("\n", cam_hash);
        if (emission_sink) emission_sink(line + "\n");
      }
      if (cfg.cpm_enabled && (step + cpm_phase[i]) % cpm_steps == 0) {
        // Sense the scene with the sender excluded from the footprint list.
        std::vector<VehicleFootprint> others;
        std::vector<KinematicReport> truth;
        others.reserve(live.size() - 1);
        truth.reserve(live.size() - 1);
        for (std::size_t lj = 0; lj < live.size(); ++lj) {
          if (lj == li) continue;
          others.push_back(VehicleFootprint{positions[lj], states[lj].heading});
          truth.push_back(states[lj].report);
        }
        const Pose self_pose{positions[li], states[li].heading};
        const auto perceived = perceive(self_pose, others, cfg.sensor);
        auto objects = build_cpm_objects(states[li].report, states[li].heading, perceived, truth);
        CpmMessage cpm{sc.pseudonym_at(i, t), t, states[li].report, states[li].heading,
                       std::move(objects)};
        emissions.push_back(
            SimEnvelope{std::move(cpm), static_cast<std::uint32_t>(i), false, t});
        emission_sender_live.push_back(li);
        ++art.cpm_emissions;
        if (emission_sink) emission_sink(encode_trace_record(emissions.back()) + "\n");
      }
    }

    // Phase 3: delivery. CAM and CPM losses come from separate streams.
    for (std::size_t e = 0; e < emissions.size(); ++e) {
      const SimEnvelope& env = emissions[e];
      const bool is_cam = std::holds_alternative<CamMessage>(env.payload);
      const StationId sid = is_cam ? std::get<CamMessage>(env.payload).station_id
                                   : std::get<CpmMessage>(env.payload).station_id;
      auto& rng = is_cam ? cam_radio_rng : cpm_radio_rng;
      const LocalPoint sender_pos = positions[emission_sender_live[e]];
      const auto receivers =
          deliver(sender_pos, env.true_sender, positions, live, cfg.radio, rng);
      for (std::size_t rk : receivers) {
        inboxes[live[rk]].push_back(StepMessage{&env, sid, is_cam});
      }
      if (is_cam) {
        art.cam_deliveries += receivers.size();
      } else {
        art.cpm_deliveries += receivers.size();
      }
    }

    // Phase 4: per-receiver processing; receivers are independent.
    std::vector<CpmDiagnostics> cpm_diag(live.size());
    std::vector<std::vector<std::array<bool, 2>>> cam_events(live.size());

    auto process_receiver = [&](std::size_t lj) {
      const std::size_t j = live[lj];
      auto& inbox = inboxes[j];
      audit_buf[j].clear();
      if (inbox.empty()) return;
      std::sort(inbox.begin(), inbox.end(), [](const StepMessage& a, const StepMessage& b) {
        if (a.sender_id.value != b.sender_id.value) return a.sender_id.value < b.sender_id.value;
        return a.is_cam && !b.is_cam;
      });

      TrackRegistry& reg = *registries[j];

      // The sensed set backs the sensor-confirmation branch; only needed when
      // some inbox sender is not already a fresh bound track.
      std::vector<LocalPoint> sensed;
      for (const StepMessage& m : inbox) {
        if (!reg.lookup(m.sender_id, t)) {
          std::vector<VehicleFootprint> others;
          others.reserve(live.size() - 1);
          for (std::size_t lk = 0; lk < live.size(); ++lk) {
            if (lk == lj) continue;
            others.push_back(VehicleFootprint{positions[lk], states[lk].heading});
          }
          const auto idxs =
              perceive(Pose{positions[lj], states[lj].heading}, others, cfg.sensor);
          sensed.reserve(idxs.size());
          for (std::size_t k : idxs) sensed.push_back(others[k].center);
          break;
        }
      }

      DetectorContext ctx{states[lj].report, states[lj].heading, &reg,      cfg.sensor,
                          cfg.radio,         cfg.s_max,          cfg.assoc_radius,
                          t,                 sensed};

      for (const StepMessage& m : inbox) {
        if (m.is_cam) {
          const auto& cam = std::get<CamMessage>(m.env->payload);
          const Verdict v = verify_cam(cam, ctx);
          cam_events[lj].push_back({v.decision == Decision::Reject, m.env->falsified});
          format_audit_line(audit_buf[j], t, j, m.sender_id, true, v, m.env->falsified);
        } else {
          const auto& cpm = std::get<CpmMessage>(m.env->payload);
          const CpmResult r = verify_cpm(cpm, ctx);
          ++cpm_diag[lj].received;
          if (!r.sender.accepted()) ++cpm_diag[lj].rejected;
          for (ObjectAction a : r.object_actions) {
            ++cpm_diag[lj].object_actions[static_cast<std::size_t>(a)];
          }
          format_audit_line(audit_buf[j], t, j, m.sender_id, false, r.sender, false);
        }
      }
    };

    if (threads <= 1 || live.size() < 8) {
      for (std::size_t lj = 0; lj < live.size(); ++lj) process_receiver(lj);
    } else {
      const std::size_t nt = std::min<std::size_t>(threads, live.size());
      std::vector<std::thread> pool;
      pool.reserve(nt);
      for (std::size_t w = 0; w < nt; ++w) {
        pool.emplace_back([&, w] {
          for (std::size_t lj = w; lj < live.size(); lj += nt) process_receiver(lj);
        });
      }
      for (auto& th : pool) th.join();
    }

    // Merge results in receiver order: deterministic regardless of threads.
    for (std::size_t lj = 0; lj < live.size(); ++lj) {
      const std::size_t j = live[lj];
      for (const auto& ev : cam_events[lj]) {
        art.metrics.record(static_cast<std::uint32_t>(j), ev[0], ev[1], t);
        ++art.verdicts;
      }
      art.cpm.received += cpm_diag[lj].received;
      art.cpm.rejected += cpm_diag[lj].rejected;
      art.verdicts += cpm_diag[lj].received;
      for (std::size_t k = 0; k < 4; ++k) {
        art.cpm.object_actions[k] += cpm_diag[lj].object_actions[k];
      }
      if (!audit_buf[j].empty()) {
        audit_hash = fnv1a(audit_buf[j], audit_hash);
        if (audit_sink) audit_sink(audit_buf[j]);
      }
      inboxes[j].clear();
    }

    // Phase 5: staleness sweep.
    for (std::size_t i : live) registries[i]->sweep(t);
  }

  art.cam_stream_hash = cam_hash;
  art.audit_hash = audit_hash;
  return art;
}

}  // namespace mbdsim
