#include "mbdsim/detector.hpp"

#include "mbdsim/errors.hpp"

namespace mbdsim {

const char* to_string(Decision d) {
  switch (d) {
    case Decision::AcceptKnown: return "accept_known";
    case Decision::AcceptPseudonymChange: return "accept_pseudonym_change";
    case Decision::AcceptNewMargin: return "accept_new_margin";
    case Decision::AcceptNewSensed: return "accept_new_sensed";
    case Decision::Reject: return "reject";
  }
  return "?";
}

const char* to_string(ObjectAction a) {
  switch (a) {
    case ObjectAction::MatchedNoUpdate: return "matched_no_update";
    case ObjectAction::CreatedTrack: return "created_track";
    case ObjectAction::DiscardedRangeBound: return "discarded_range_bound";
    case ObjectAction::DiscardedOutOfSector: return "discarded_out_of_sector";
  }
  return "?";
}

void DetectorContext::validate() const {
  if (registry == nullptr) throw ConfigError("detector: registry missing");
  if (!radio.valid()) throw ConfigError("detector: d_margin must satisfy 0 < d_margin < r_max");
  if (s_max < sensor.range) throw ConfigError("detector: s_max must be >= sensor range");
  if (assoc_radius <= 0.0) throw ConfigError("detector: assoc_radius must be positive");
}

namespace {

bool sensor_confirms(const DetectorContext& ctx, LocalPoint claimed) {
  for (const LocalPoint& p : ctx.sensed) {
    if (distance(p, claimed) <= ctx.assoc_radius) return true;
  }
  return false;
}

/// Shared pipeline for CAM bodies and CPM sender reports.
Verdict verify_sender(StationId id, const KinematicReport& body, DetectorContext& ctx) {
  TrackRegistry& reg = *ctx.registry;

  if (id.value == 0 || is_malformed(body)) return Verdict{Decision::Reject};

  // (1) known id: gate against its own filter; an implausible known sender is
  // rejected outright, never re-admitted through the branches below.
  if (auto idx = reg.lookup(id, ctx.now)) {
    const Deviation dev = reg.track_deviation(reg.track(*idx), body, body.acceleration, ctx.now);
    if (plausible(dev, reg.params())) {
      reg.update_track(*idx, body, ctx.now);
      return Verdict{Decision::AcceptKnown, reg.track(*idx).key, dev.d_pos, dev.d_vel};
    }
    return Verdict{Decision::Reject, std::nullopt, dev.d_pos, dev.d_vel};
  }

  // (2) pseudonym change: nearest fresh track, bound or not.
  if (auto m = reg.best_match(body, body.acceleration, ctx.now)) {
    if (plausible(Deviation{m->d_pos, m->d_vel}, reg.params())) {
      reg.rebind(m->index, id, body, ctx.now);
      return Verdict{Decision::AcceptPseudonymChange, reg.track(m->index).key, m->d_pos, m->d_vel};
    }
  }

  // (3) new vehicle: margin annulus, then sensor confirmation of the claim.
  const double d = distance(body.position, ctx.self_state.position);
  if (d >= ctx.radio.r_max - ctx.radio.d_margin) {
    const std::size_t idx = reg.insert_new(body, id, TrackOrigin::CamDirect, ctx.now);
    return Verdict{Decision::AcceptNewMargin, reg.track(idx).key};
  }
  if (in_sector(body.position, Pose{ctx.self_state.position, ctx.self_heading}, ctx.sensor.fov,
                ctx.sensor.range) &&
      sensor_confirms(ctx, body.position)) {
    const std::size_t idx = reg.insert_new(body, id, TrackOrigin::CamDirect, ctx.now);
    return Verdict{Decision::AcceptNewSensed, reg.track(idx).key};
  }

  return Verdict{Decision::Reject};
}

}  // namespace

Verdict verify_cam(const CamMessage& cam, DetectorContext& ctx) {
  return verify_sender(cam.station_id, cam.body, ctx);
}

ObjectAction process_perceived_object(const PerceivedObject& obj, const KinematicReport& sender,
                                      double sender_heading, DetectorContext& ctx) {
  TrackRegistry& reg = *ctx.registry;
  const KinematicReport global = object_to_global(obj, sender, sender_heading);

  if (distance(global.position, sender.position) > ctx.s_max) {
    return ObjectAction::DiscardedRangeBound;
  }

  if (auto m = reg.best_match(global, global.acceleration, ctx.now)) {
    if (plausible(Deviation{m->d_pos, m->d_vel}, reg.params())) {
      // Indirect evidence: the matching filter is left untouched so it cannot
      // disorder the direct CAM/CPM-sender update stream.
      return ObjectAction::MatchedNoUpdate;
    }
  }

  if (in_sector(global.position, Pose{sender.position, sender_heading}, ctx.sensor.fov,
                ctx.sensor.range)) {
    reg.insert_new(global, std::nullopt, TrackOrigin::CpmPerceived, ctx.now);
    return ObjectAction::CreatedTrack;
  }
  return ObjectAction::DiscardedOutOfSector;
}

CpmResult verify_cpm(const CpmMessage& cpm, DetectorContext& ctx) {
  if (!std::isfinite(cpm.sender_heading) || cpm.objects.size() > kMaxCpmObjects) {
    return {Verdict{Decision::Reject}, {}};
  }
  Verdict sender = verify_sender(cpm.station_id, cpm.sender, ctx);
  if (!sender.accepted()) return {sender, {}};

  CpmResult result{sender, {}};
  result.object_actions.reserve(cpm.objects.size());
  for (const PerceivedObject& obj : cpm.objects) {
    result.object_actions.push_back(
        process_perceived_object(obj, cpm.sender, cpm.sender_heading, ctx));
  }
  return result;
}

}  // namespace mbdsim
