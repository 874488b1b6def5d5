#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "mbdsim/errors.hpp"
#include "mbdsim/messages.hpp"

using namespace mbdsim;

namespace {
constexpr double kPi = std::numbers::pi;

std::mt19937_64 rng_for(const char* name) {
  std::seed_seq seq(name, name + std::char_traits<char>::length(name));
  return std::mt19937_64(seq);
}

KinematicReport random_report(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> pos(-2000.0, 2000.0);
  std::uniform_real_distribution<double> vel(-30.0, 30.0);
  std::uniform_real_distribution<double> acc(-4.0, 4.0);
  return {LocalPoint{pos(rng), pos(rng)}, Vec2{vel(rng), vel(rng)}, Vec2{acc(rng), acc(rng)}};
}

PerceivedObject random_object(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> pos(-80.0, 80.0);
  std::uniform_real_distribution<double> vel(-20.0, 20.0);
  std::uniform_real_distribution<double> acc(-4.0, 4.0);
  return {Vec2{pos(rng), pos(rng)}, Vec2{vel(rng), vel(rng)}, Vec2{acc(rng), acc(rng)}};
}

}  // namespace

TEST_CASE("object_to_global: coincident object reproduces the sender") {
  const KinematicReport sender{{120.0, -40.0}, {8.0, 3.0}, {0.5, -0.2}};
  const PerceivedObject obj{};
  const KinematicReport g = object_to_global(obj, sender, 1.2345);
  CHECK(g == sender);
}

TEST_CASE("object_to_global: 90 degree rotation") {
  const KinematicReport sender{{100.0, 100.0}, {}, {}};
  const PerceivedObject obj{{10.0, 0.0}, {}, {}};
  const KinematicReport g = object_to_global(obj, sender, kPi / 2.0);
  CHECK(g.position.x == doctest::Approx(100.0).epsilon(1e-12));
  CHECK(g.position.y == doctest::Approx(110.0).epsilon(1e-12));
}

TEST_CASE("object_to_global: identity rotation adds velocities") {
  const KinematicReport sender{{0.0, 0.0}, {10.0, 0.0}, {}};
  const PerceivedObject obj{{30.0, 40.0}, {1.0, 0.0}, {}};
  const KinematicReport g = object_to_global(obj, sender, 0.0);
  CHECK(g.position.x == doctest::Approx(30.0));
  CHECK(g.position.y == doctest::Approx(40.0));
  CHECK(g.velocity.x == doctest::Approx(11.0));
  CHECK(g.velocity.y == doctest::Approx(0.0));
}

TEST_CASE("object_to_global and global_to_object invert each other") {
  auto rng = rng_for("obj-roundtrip");
  std::uniform_real_distribution<double> heading(0.0, 2.0 * kPi);
  for (int i = 0; i < 300; ++i) {
    const KinematicReport sender = random_report(rng);
    const PerceivedObject obj = random_object(rng);
    const double h = heading(rng);
    const PerceivedObject back = global_to_object(object_to_global(obj, sender, h), sender, h);
    CHECK(std::abs(back.rel_position.x - obj.rel_position.x) < 1e-9);
    CHECK(std::abs(back.rel_position.y - obj.rel_position.y) < 1e-9);
    CHECK(std::abs(back.rel_velocity.x - obj.rel_velocity.x) < 1e-9);
    CHECK(std::abs(back.rel_velocity.y - obj.rel_velocity.y) < 1e-9);
    CHECK(std::abs(back.rel_acceleration.x - obj.rel_acceleration.x) < 1e-9);
    CHECK(std::abs(back.rel_acceleration.y - obj.rel_acceleration.y) < 1e-9);
  }
}

TEST_CASE("object_to_global is rotation-equivariant") {
  // Rotating the sender heading and the relative coordinates together leaves
  // the global output unchanged.
  auto rng = rng_for("obj-equivariance");
  std::uniform_real_distribution<double> heading(0.0, 2.0 * kPi);
  for (int i = 0; i < 300; ++i) {
    const KinematicReport sender = random_report(rng);
    const PerceivedObject obj = random_object(rng);
    const double h = heading(rng);
    const double delta = heading(rng);
    const PerceivedObject rotated{obj.rel_position.rotated(-delta),
                                  obj.rel_velocity.rotated(-delta),
                                  obj.rel_acceleration.rotated(-delta)};
    const KinematicReport a = object_to_global(obj, sender, h);
    const KinematicReport b = object_to_global(rotated, sender, h + delta);
    CHECK(std::abs(a.position.x - b.position.x) < 1e-9);
    CHECK(std::abs(a.position.y - b.position.y) < 1e-9);
    CHECK(std::abs(a.velocity.x - b.velocity.x) < 1e-9);
    CHECK(std::abs(a.velocity.y - b.velocity.y) < 1e-9);
  }
}

TEST_CASE("trace record round trip: CAM envelope") {
  const SimEnvelope env{CamMessage{StationId{42}, 12.3, {{1.5, -2.5}, {10.0, 0.1}, {0.0, -0.3}}},
                        7, true, 12.3};
  const SimEnvelope back = decode_trace_record(encode_trace_record(env));
  CHECK(back == env);
}

TEST_CASE("trace record round trip: CPM at the object cap") {
  CpmMessage cpm{StationId{9}, 1.0, {{0.0, 0.0}, {5.0, 5.0}, {}}, 0.7853981633974483, {}};
  for (int i = 0; i < 5; ++i) {
    cpm.objects.push_back(PerceivedObject{{double(i), 1.0}, {0.1, 0.2}, {0.0, 0.0}});
  }
  const SimEnvelope env{cpm, 3, false, 1.0};
  const SimEnvelope back = decode_trace_record(encode_trace_record(env));
  CHECK(back == env);
}

TEST_CASE("trace record decode rejects a CPM with six objects") {
  CpmMessage cpm{StationId{9}, 1.0, {{0.0, 0.0}, {5.0, 5.0}, {}}, 0.0, {}};
  for (int i = 0; i < 5; ++i) cpm.objects.push_back(PerceivedObject{});
  std::string line = encode_trace_record(SimEnvelope{cpm, 3, false, 1.0});
  // splice a sixth object onto the front of the container
  const std::string marker = R"("objects":[)";
  line.insert(line.find(marker) + marker.size(),
              R"({"pos":[0,0],"vel":[0,0],"acc":[0,0]},)");
  CHECK_THROWS_WITH_AS(decode_trace_record(line), doctest::Contains("objects exceeds cap"),
                       ParseError);
}

TEST_CASE("trace record decode annotates parse failures") {
  CHECK_THROWS_AS(decode_trace_record("{not json"), ParseError);
  CHECK_THROWS_AS(decode_trace_record(R"({"type":"cam"})"), ParseError);
  CHECK_THROWS_AS(decode_trace_record(""), ParseError);
}

TEST_CASE("trace record round trip on randomized envelopes") {
  auto rng = rng_for("envelope-roundtrip");
  std::uniform_real_distribution<double> heading(0.0, 2.0 * kPi);
  std::uniform_int_distribution<std::uint32_t> sid(1, 0xffffffffu);
  std::uniform_int_distribution<int> n_obj(0, 5);
  std::uniform_real_distribution<double> t(0.0, 1000.0);
  for (int i = 0; i < 300; ++i) {
    SimEnvelope env;
    const double gen_time = t(rng);
    if (i % 2 == 0) {
      env.payload = CamMessage{StationId{sid(rng)}, gen_time, random_report(rng)};
      env.falsified = (i % 4) == 0;
    } else {
      CpmMessage cpm{StationId{sid(rng)}, gen_time, random_report(rng), heading(rng), {}};
      const int k = n_obj(rng);
      for (int j = 0; j < k; ++j) cpm.objects.push_back(random_object(rng));
      env.payload = std::move(cpm);
      env.falsified = false;
    }
    env.true_sender = static_cast<std::uint32_t>(i);
    env.rx_time = gen_time;
    const SimEnvelope back = decode_trace_record(encode_trace_record(env));
    CHECK(back == env);
  }
}

TEST_CASE("is_malformed flags non-finite and impossible kinematics") {
  KinematicReport ok{{0.0, 0.0}, {30.0, 0.0}, {2.0, 0.0}};
  CHECK_FALSE(is_malformed(ok));

  KinematicReport nan_pos = ok;
  nan_pos.position.x = std::nan("");
  CHECK(is_malformed(nan_pos));

  KinematicReport too_fast = ok;
  too_fast.velocity = {71.0, 0.0};
  CHECK(is_malformed(too_fast));

  KinematicReport too_hard = ok;
  too_hard.acceleration = {9.0, 9.0};  // norm > 12
  CHECK(is_malformed(too_hard));
}
