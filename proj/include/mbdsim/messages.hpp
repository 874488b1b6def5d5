#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mbdsim/geo.hpp"

namespace mbdsim {

/// Short-lived station identifier taken from the PDU header. Nonzero for any
/// live sender.
struct StationId {
  std::uint32_t value = 0;

  constexpr auto operator<=>(const StationId&) const = default;
};

/// Flat kinematic payload shared by CAM bodies, CPM sender info, and
/// globalized perceived objects.
struct KinematicReport {
  LocalPoint position;
  Vec2 velocity;
  Vec2 acceleration;

  constexpr bool operator==(const KinematicReport&) const = default;
};

inline constexpr double kMaxPlausibleSpeed = 70.0;   // m/s
inline constexpr double kMaxPlausibleAccel = 12.0;   // m/s^2
inline constexpr std::size_t kMaxCpmObjects = 5;

/// Field-level sanity check: non-finite or physically impossible values make
/// a report malformed (detectors reject such messages outright).
bool is_malformed(const KinematicReport& report);

struct CamMessage {
  StationId station_id;
  double gen_time = 0.0;
  KinematicReport body;

  bool operator==(const CamMessage&) const = default;
};

/// One entry of the perceived-object container, in the sender-centric frame
/// (x along the sender heading).
struct PerceivedObject {
  Vec2 rel_position;
  Vec2 rel_velocity;
  Vec2 rel_acceleration;

  bool operator==(const PerceivedObject&) const = default;
};

struct CpmMessage {
  StationId station_id;
  double gen_time = 0.0;
  KinematicReport sender;
  double sender_heading = 0.0;
  std::vector<PerceivedObject> objects;  // length <= kMaxCpmObjects

  bool operator==(const CpmMessage&) const = default;
};

/// Simulation envelope around a payload. Ground truth (true_sender,
/// falsified) rides here, out-of-band: detector entry points only ever see
/// the payload, so scoring data cannot leak into decisions.
struct SimEnvelope {
  std::variant<CamMessage, CpmMessage> payload;
  std::uint32_t true_sender = 0;
  bool falsified = false;
  double rx_time = 0.0;

  bool operator==(const SimEnvelope&) const = default;
};

/// Rotates the object's relative kinematics by the sender heading and adds
/// the sender's own position/velocity/acceleration.
KinematicReport object_to_global(const PerceivedObject& obj, const KinematicReport& sender,
                                 double sender_heading);

/// Inverse transform; produces the sender-relative object for a known global
/// state.
PerceivedObject global_to_object(const KinematicReport& object, const KinematicReport& sender,
                                 double sender_heading);

/// One self-describing JSON line per envelope. decode_trace_record inverts it
/// bit-exactly and rejects malformed lines with a position-annotated
/// ParseError.
std::string encode_trace_record(const SimEnvelope& env);
SimEnvelope decode_trace_record(std::string_view line);

}  // namespace mbdsim
