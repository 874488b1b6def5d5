#include "mbdsim/messages.hpp"

#include <charconv>
#include <cmath>

#include <json.hpp>

#include "mbdsim/errors.hpp"

namespace mbdsim {

namespace {

using njson = nlohmann::json;

bool finite(double v) { return std::isfinite(v); }
bool finite(Vec2 v) { return finite(v.x) && finite(v.y); }

void append_double(std::string& out, double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, ptr);
}

void append_pair(std::string& out, double a, double b) {
  out += '[';
  append_double(out, a);
  out += ',';
  append_double(out, b);
  out += ']';
}

Vec2 vec2_from(const njson& j, const char* field) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw ParseError(std::string("trace record: field '") + field + "' must be a [x, y] pair");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

KinematicReport report_from(const njson& j) {
  const Vec2 p = vec2_from(j.at("pos"), "pos");
  return {LocalPoint{p.x, p.y}, vec2_from(j.at("vel"), "vel"), vec2_from(j.at("acc"), "acc")};
}

}  // namespace

bool is_malformed(const KinematicReport& report) {
  if (!finite(report.position.x) || !finite(report.position.y) || !finite(report.velocity) ||
      !finite(report.acceleration)) {
    return true;
  }
  if (report.velocity.norm() > kMaxPlausibleSpeed) return true;
  if (report.acceleration.norm() > kMaxPlausibleAccel) return true;
  return false;
}

KinematicReport object_to_global(const PerceivedObject& obj, const KinematicReport& sender,
                                 double sender_heading) {
  const Vec2 dp = obj.rel_position.rotated(sender_heading);
  return {sender.position + dp,
          sender.velocity + obj.rel_velocity.rotated(sender_heading),
          sender.acceleration + obj.rel_acceleration.rotated(sender_heading)};
}

PerceivedObject global_to_object(const KinematicReport& object, const KinematicReport& sender,
                                 double sender_heading) {
  return {(object.position - sender.position).rotated(-sender_heading),
          (object.velocity - sender.velocity).rotated(-sender_heading),
          (object.acceleration - sender.acceleration).rotated(-sender_heading)};
}

std::string encode_trace_record(const SimEnvelope& env) {
  std::string out;
  out.reserve(192);
  const bool is_cam = std::holds_alternative<CamMessage>(env.payload);
  out += R"({"type":")";
  out += is_cam ? "cam" : "cpm";
  out += R"(","station_id":)";
  const StationId sid = is_cam ? std::get<CamMessage>(env.payload).station_id
                               : std::get<CpmMessage>(env.payload).station_id;
  out += std::to_string(sid.value);
  out += R"(,"gen_time":)";
  if (is_cam) {
    const auto& cam = std::get<CamMessage>(env.payload);
    append_double(out, cam.gen_time);
    out += R"(,"pos":)";
    append_pair(out, cam.body.position.x, cam.body.position.y);
    out += R"(,"vel":)";
    append_pair(out, cam.body.velocity.x, cam.body.velocity.y);
    out += R"(,"acc":)";
    append_pair(out, cam.body.acceleration.x, cam.body.acceleration.y);
  } else {
    const auto& cpm = std::get<CpmMessage>(env.payload);
    append_double(out, cpm.gen_time);
    out += R"(,"pos":)";
    append_pair(out, cpm.sender.position.x, cpm.sender.position.y);
    out += R"(,"vel":)";
    append_pair(out, cpm.sender.velocity.x, cpm.sender.velocity.y);
    out += R"(,"acc":)";
    append_pair(out, cpm.sender.acceleration.x, cpm.sender.acceleration.y);
    out += R"(,"heading":)";
    append_double(out, cpm.sender_heading);
    out += R"(,"objects":[)";
    for (std::size_t i = 0; i < cpm.objects.size(); ++i) {
      if (i > 0) out += ',';
      const auto& o = cpm.objects[i];
      out += R"({"pos":)";
      append_pair(out, o.rel_position.x, o.rel_position.y);
      out += R"(,"vel":)";
      append_pair(out, o.rel_velocity.x, o.rel_velocity.y);
      out += R"(,"acc":)";
      append_pair(out, o.rel_acceleration.x, o.rel_acceleration.y);
      out += '}';
    }
    out += ']';
  }
  out += R"(,"true_sender":)";
  out += std::to_string(env.true_sender);
  out += R"(,"falsified":)";
  out += env.falsified ? "true" : "false";
  out += R"(,"rx_time":)";
  append_double(out, env.rx_time);
  out += '}';
  return out;
}

SimEnvelope decode_trace_record(std::string_view line) {
  njson j;
  try {
    j = njson::parse(line);
  } catch (const njson::parse_error& e) {
    throw ParseError("trace record: invalid JSON at byte " + std::to_string(e.byte) + ": " +
                     e.what());
  }
  try {
    SimEnvelope env;
    const std::string type = j.at("type").get<std::string>();
    const auto sid = StationId{j.at("station_id").get<std::uint32_t>()};
    const double gen_time = j.at("gen_time").get<double>();
    if (type == "cam") {
      env.payload = CamMessage{sid, gen_time, report_from(j)};
    } else if (type == "cpm") {
      CpmMessage cpm{sid, gen_time, report_from(j), j.at("heading").get<double>(), {}};
      const auto& objs = j.at("objects");
      if (!objs.is_array()) throw ParseError("trace record: 'objects' must be an array");
      if (objs.size() > kMaxCpmObjects) {
        throw ParseError("trace record: objects exceeds cap of " +
                         std::to_string(kMaxCpmObjects));
      }
      for (const auto& o : objs) {
        cpm.objects.push_back(PerceivedObject{vec2_from(o.at("pos"), "objects.pos"),
                                              vec2_from(o.at("vel"), "objects.vel"),
                                              vec2_from(o.at("acc"), "objects.acc")});
      }
      env.payload = std::move(cpm);
    } else {
      throw ParseError("trace record: unknown type '" + type + "'");
    }
    env.true_sender = j.at("true_sender").get<std::uint32_t>();
    env.falsified = j.at("falsified").get<bool>();
    env.rx_time = j.at("rx_time").get<double>();
    if (env.falsified && !std::holds_alternative<CamMessage>(env.payload)) {
      throw ParseError("trace record: falsified=true is only valid for CAM payloads");
    }
    return env;
  } catch (const njson::exception& e) {
    throw ParseError(std::string("trace record: ") + e.what());
  }
}

}  // namespace mbdsim
