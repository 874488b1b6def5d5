#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "mbdsim/sensing.hpp"

using namespace mbdsim;

namespace {
constexpr double kPi = std::numbers::pi;

// Independent segment/rectangle test: point-in-rectangle for the endpoints
// plus pairwise segment intersection against each rectangle edge.
namespace oracle {

struct Seg {
  LocalPoint a, b;
};

double cross(Vec2 u, Vec2 v) { return u.x * v.y - u.y * v.x; }

bool on_segment(LocalPoint p, const Seg& s) {
  const Vec2 d = s.b - s.a;
  const Vec2 e = p - s.a;
  if (std::abs(cross(d, e)) > 1e-9 * std::max(1.0, d.norm())) return false;
  const double t = (e.x * d.x + e.y * d.y) / (d.x * d.x + d.y * d.y);
  return t >= -1e-12 && t <= 1.0 + 1e-12;
}

bool segments_intersect(const Seg& s1, const Seg& s2) {
  const Vec2 d1 = s1.b - s1.a;
  const Vec2 d2 = s2.b - s2.a;
  const double denom = cross(d1, d2);
  if (std::abs(denom) < 1e-12) {
    return on_segment(s1.a, s2) || on_segment(s1.b, s2) || on_segment(s2.a, s1) ||
           on_segment(s2.b, s1);
  }
  const Vec2 e = s2.a - s1.a;
  const double t = cross(e, d2) / denom;
  const double u = cross(e, d1) / denom;
  return t >= 0.0 && t <= 1.0 && u >= 0.0 && u <= 1.0;
}

std::vector<LocalPoint> corners(const VehicleFootprint& r) {
  const Vec2 ax = Vec2{std::cos(r.heading), std::sin(r.heading)} * (r.length / 2.0);
  const Vec2 ay = Vec2{-std::sin(r.heading), std::cos(r.heading)} * (r.width / 2.0);
  return {r.center + ax + ay, r.center + ax - ay, r.center - ax - ay, r.center - ax + ay};
}

bool point_inside(LocalPoint p, const VehicleFootprint& r) {
  const Vec2 d = (p - r.center).rotated(-r.heading);
  return std::abs(d.x) <= r.length / 2.0 && std::abs(d.y) <= r.width / 2.0;
}

bool segment_hits_rect(LocalPoint a, LocalPoint b, const VehicleFootprint& r) {
  if (point_inside(a, r) || point_inside(b, r)) return true;
  const auto c = corners(r);
  for (int i = 0; i < 4; ++i) {
    if (segments_intersect(Seg{a, b}, Seg{c[i], c[(i + 1) % 4]})) return true;
  }
  return false;
}

std::vector<std::size_t> perceive(const Pose& self, const std::vector<VehicleFootprint>& others,
                                  const SensorConfig& cfg) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < others.size(); ++i) {
    if (!in_sector(others[i].center, self, cfg.fov, cfg.range)) continue;
    bool blocked = false;
    for (std::size_t j = 0; j < others.size() && !blocked; ++j) {
      if (j != i) blocked = segment_hits_rect(self.position, others[i].center, others[j]);
    }
    if (!blocked) out.push_back(i);
  }
  std::sort(out.begin(), out.end(), [&](std::size_t a, std::size_t b) {
    const double da = distance(self.position, others[a].center);
    const double db = distance(self.position, others[b].center);
    return da < db || (da == db && a < b);
  });
  return out;
}

}  // namespace oracle
}  // namespace

TEST_CASE("perceive: a single vehicle dead ahead is seen") {
  const Pose self{{0, 0}, 0.0};
  std::vector<VehicleFootprint> others{{{50.0, 0.0}, 0.0}};
  const auto seen = perceive(self, others, SensorConfig::front());
  REQUIRE(seen.size() == 1);
  CHECK(seen[0] == 0);
}

TEST_CASE("perceive: a collinear blocker occludes the far target") {
  const Pose self{{0, 0}, 0.0};
  std::vector<VehicleFootprint> others{{{50.0, 0.0}, 0.0}, {{25.0, 0.0}, 0.0}};
  const auto seen = perceive(self, others, SensorConfig::front());
  REQUIRE(seen.size() == 1);
  CHECK(seen[0] == 1);  // only the near vehicle
}

TEST_CASE("perceive matches the brute-force oracle on random scenes") {
  std::mt19937_64 rng(808);
  std::uniform_real_distribution<double> coord(-90.0, 90.0);
  std::uniform_real_distribution<double> heading(0.0, 2.0 * kPi);

  for (int trial = 0; trial < 200; ++trial) {
    const Pose self{{coord(rng) / 4.0, coord(rng) / 4.0}, heading(rng)};
    std::vector<VehicleFootprint> others;
    for (int i = 0; i < 8; ++i) {
      others.push_back(VehicleFootprint{{coord(rng), coord(rng)}, heading(rng)});
    }
    const SensorConfig cfg = trial % 2 == 0 ? SensorConfig::front() : SensorConfig::omni();
    CHECK(perceive(self, others, cfg) == oracle::perceive(self, others, cfg));
  }
}

TEST_CASE("omni perceives a superset of front for identical scenes") {
  std::mt19937_64 rng(909);
  std::uniform_real_distribution<double> coord(-90.0, 90.0);
  std::uniform_real_distribution<double> heading(0.0, 2.0 * kPi);
  for (int trial = 0; trial < 100; ++trial) {
    const Pose self{{0, 0}, heading(rng)};
    std::vector<VehicleFootprint> others;
    for (int i = 0; i < 10; ++i) {
      others.push_back(VehicleFootprint{{coord(rng), coord(rng)}, heading(rng)});
    }
    const auto front = perceive(self, others, SensorConfig::front());
    const auto omni = perceive(self, others, SensorConfig::omni());
    for (std::size_t idx : front) {
      CHECK(std::find(omni.begin(), omni.end(), idx) != omni.end());
    }
  }
}

TEST_CASE("removing a vehicle never shrinks the perceived set") {
  std::mt19937_64 rng(1010);
  std::uniform_real_distribution<double> coord(-70.0, 70.0);
  std::uniform_real_distribution<double> heading(0.0, 2.0 * kPi);
  for (int trial = 0; trial < 60; ++trial) {
    const Pose self{{0, 0}, heading(rng)};
    std::vector<VehicleFootprint> others;
    for (int i = 0; i < 8; ++i) {
      others.push_back(VehicleFootprint{{coord(rng), coord(rng)}, heading(rng)});
    }
    const auto base = perceive(self, others, SensorConfig::omni());

    // drop the last vehicle; everything previously seen (other than it) stays
    std::vector<VehicleFootprint> fewer(others.begin(), others.end() - 1);
    const auto after = perceive(self, fewer, SensorConfig::omni());
    for (std::size_t idx : base) {
      if (idx + 1 == others.size()) continue;
      CHECK(std::find(after.begin(), after.end(), idx) != after.end());
    }
  }
}

TEST_CASE("build_cpm_objects: inverse transform, cap, and empty container") {
  const KinematicReport self{{10.0, -5.0}, {12.0, 1.0}, {0.3, 0.0}};
  const double heading = 0.4;

  std::vector<VehicleFootprint> others;
  std::vector<KinematicReport> truth;
  for (int i = 0; i < 7; ++i) {
    const double d = 10.0 + 8.0 * i;
    // fan the vehicles out so nothing occludes anything
    const LocalPoint p{self.position.x + d * std::cos(heading + 0.7 * i),
                       self.position.y + d * std::sin(heading + 0.7 * i)};
    others.push_back(VehicleFootprint{p, heading});
    truth.push_back(KinematicReport{p, {8.0 + i, 0.5 * i}, {0.1 * i, 0.0}});
  }

  const auto seen = perceive(Pose{self.position, heading}, others, SensorConfig::omni());
  REQUIRE(seen.size() == 7);

  SUBCASE("three perceived round-trip to global truth") {
    const std::vector<std::size_t> three(seen.begin(), seen.begin() + 3);
    const auto objects = build_cpm_objects(self, heading, three, truth);
    REQUIRE(objects.size() == 3);
    for (std::size_t k = 0; k < 3; ++k) {
      const KinematicReport g = object_to_global(objects[k], self, heading);
      CHECK(std::abs(g.position.x - truth[three[k]].position.x) < 1e-9);
      CHECK(std::abs(g.position.y - truth[three[k]].position.y) < 1e-9);
      CHECK(std::abs(g.velocity.x - truth[three[k]].velocity.x) < 1e-9);
      CHECK(std::abs(g.velocity.y - truth[three[k]].velocity.y) < 1e-9);
    }
  }
  SUBCASE("seven perceived yield exactly the five nearest") {
    const auto objects = build_cpm_objects(self, heading, seen, truth);
    REQUIRE(objects.size() == 5);
    for (std::size_t k = 0; k < 5; ++k) {
      const KinematicReport g = object_to_global(objects[k], self, heading);
      CHECK(std::abs(g.position.x - truth[seen[k]].position.x) < 1e-9);
      // every emitted object stays inside the sensor range
      CHECK(objects[k].rel_position.norm() <= SensorConfig::omni().range + 1e-9);
    }
  }
  SUBCASE("zero perceived yield an empty container") {
    const auto objects = build_cpm_objects(self, heading, {}, truth);
    CHECK(objects.empty());
  }
}
