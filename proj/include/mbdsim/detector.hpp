#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "mbdsim/radio.hpp"
#include "mbdsim/registry.hpp"
#include "mbdsim/sensing.hpp"

namespace mbdsim {

enum class Decision {
  AcceptKnown,
  AcceptPseudonymChange,
  AcceptNewMargin,
  AcceptNewSensed,
  Reject,
};

const char* to_string(Decision d);

/// Per-message outcome. d_pos/d_vel are NaN when the taken branch computed no
/// deviation (margin and sensed admissions).
struct Verdict {
  Decision decision = Decision::Reject;
  std::optional<std::uint64_t> matched_track;
  double d_pos = std::numeric_limits<double>::quiet_NaN();
  double d_vel = std::numeric_limits<double>::quiet_NaN();

  bool accepted() const { return decision != Decision::Reject; }
};

enum class ObjectAction {
  MatchedNoUpdate,
  CreatedTrack,
  DiscardedRangeBound,
  DiscardedOutOfSector,
};

const char* to_string(ObjectAction a);

/// Everything the verification pipeline may consult for one receiver at one
/// instant. `sensed` carries the ground-truth positions currently visible to
/// the receiver's own sensor; it backs the sensor-confirmation admission
/// branch only.
struct DetectorContext {
  KinematicReport self_state;
  double self_heading = 0.0;
  TrackRegistry* registry = nullptr;
  SensorConfig sensor;
  RadioConfig radio;
  double s_max = 100.0;        // CPM perception upper bound, meters
  double assoc_radius = 3.0;   // sensor-confirmation association radius, meters
  double now = 0.0;
  std::span<const LocalPoint> sensed;

  void validate() const;  // throws ConfigError on invariant violations
};

/// CAM verification: known-ID gate, pseudonym re-association, then
/// new-vehicle admission via the range margin or sensor confirmation.
/// Accepted messages, and only accepted messages, mutate the registry.
Verdict verify_cam(const CamMessage& cam, DetectorContext& ctx);

struct CpmResult {
  Verdict sender;
  std::vector<ObjectAction> object_actions;
};

/// CPM verification: the sender passes through the exact CAM pipeline; only
/// an accepted sender gets its perceived objects processed, in container
/// order.
CpmResult verify_cpm(const CpmMessage& cpm, DetectorContext& ctx);

/// One perceived object: globalize, apply the perception range bound, match
/// against existing tracks (matches are deliberately not updated), or admit
/// as a new unbound track when it lies in the sender's sensor sector.
ObjectAction process_perceived_object(const PerceivedObject& obj, const KinematicReport& sender,
                                      double sender_heading, DetectorContext& ctx);

}  // namespace mbdsim
