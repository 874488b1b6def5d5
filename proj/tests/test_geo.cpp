#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "mbdsim/errors.hpp"
#include "mbdsim/geo.hpp"

using namespace mbdsim;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("latlon_to_local anchors the origin at (0, 0)") {
  const GeoOrigin origin{49.6, 6.1};
  const LocalPoint p = latlon_to_local(49.6, 6.1, origin);
  CHECK(p.x == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(p.y == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("latlon_to_local maps the minimum attack offset to ~3.34 m north") {
  const GeoOrigin origin{49.6, 6.1};
  const LocalPoint p = latlon_to_local(49.6 + 0.00003, 6.1, origin);
  const double expected = kEarthRadiusMeters * 0.00003 * kPi / 180.0;
  // epsilon floor ~1e-10: (lat0 + delta) - lat0 is not exactly delta
  CHECK(p.y == doctest::Approx(expected).epsilon(1e-9));
  CHECK(p.y == doctest::Approx(3.3361).epsilon(1e-3));
  CHECK(p.x == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("latlon_to_local scales longitude by cos(lat0)") {
  const GeoOrigin origin{49.6, 6.1};
  const LocalPoint p = latlon_to_local(49.6, 6.1 + 0.00050, origin);
  const double expected = kEarthRadiusMeters * std::cos(49.6 * kPi / 180.0) * 0.00050 * kPi / 180.0;
  CHECK(p.x == doctest::Approx(expected).epsilon(1e-9));
  CHECK(p.x == doctest::Approx(36.03).epsilon(1e-3));
  CHECK(p.y == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("latlon_to_local rejects out-of-range coordinates") {
  const GeoOrigin origin{0.0, 0.0};
  CHECK_THROWS_AS(latlon_to_local(90.5, 0.0, origin), InvalidInputError);
  CHECK_THROWS_AS(latlon_to_local(0.0, -181.0, origin), InvalidInputError);
  CHECK_THROWS_AS(latlon_to_local(std::nan(""), 0.0, origin), InvalidInputError);
}

TEST_CASE("latlon round trip within 1e-9 degrees out to 50 km") {
  const GeoOrigin origin{49.6, 6.1};
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> offset(-50'000.0, 50'000.0);
  for (int i = 0; i < 200; ++i) {
    const LocalPoint p{offset(rng), offset(rng)};
    const auto [lat, lon] = local_to_latlon(p, origin);
    const LocalPoint q = latlon_to_local(lat, lon, origin);
    CHECK(std::abs(q.x - p.x) < 1e-6);
    CHECK(std::abs(q.y - p.y) < 1e-6);
    const auto [lat2, lon2] = local_to_latlon(q, origin);
    CHECK(std::abs(lat2 - lat) < 1e-9);
    CHECK(std::abs(lon2 - lon) < 1e-9);
  }
}

TEST_CASE("in_sector basics: range and field of view") {
  const Pose sensor{{0.0, 0.0}, 0.0};
  const double fov60 = kPi / 3.0;

  CHECK(in_sector({50.0, 0.0}, sensor, fov60, 80.0));          // dead ahead
  CHECK_FALSE(in_sector({-50.0, 0.0}, sensor, fov60, 80.0));   // behind
  CHECK(in_sector({-50.0, 0.0}, sensor, 2.0 * kPi, 80.0));     // omni sees rear
  CHECK_FALSE(in_sector({90.0, 0.0}, sensor, fov60, 80.0));    // beyond range
}

TEST_CASE("in_sector boundary points are inside") {
  const Pose sensor{{0.0, 0.0}, 0.0};
  const double fov60 = kPi / 3.0;
  // 80 m away at exactly +30 degrees: both boundaries at once.
  const LocalPoint target{80.0 * std::cos(kPi / 6.0), 80.0 * std::sin(kPi / 6.0)};
  CHECK(in_sector(target, sensor, fov60, 80.0));
  CHECK(in_sector({80.0, 0.0}, sensor, fov60, 80.0));
}

TEST_CASE("in_sector with full fov depends only on distance") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> coord(-120.0, 120.0);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * kPi);
  for (int i = 0; i < 500; ++i) {
    const LocalPoint target{coord(rng), coord(rng)};
    const LocalPoint origin{coord(rng) / 10.0, coord(rng) / 10.0};
    const bool by_distance = distance(target, origin) <= 80.0 * (1.0 + 1e-12) + 1e-12;
    const bool got = in_sector(target, Pose{origin, angle(rng)}, 2.0 * kPi, 80.0);
    CHECK(got == by_distance);
  }
}

TEST_CASE("distance is symmetric and satisfies the triangle inequality") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> coord(-1000.0, 1000.0);
  for (int i = 0; i < 500; ++i) {
    const LocalPoint a{coord(rng), coord(rng)};
    const LocalPoint b{coord(rng), coord(rng)};
    const LocalPoint c{coord(rng), coord(rng)};
    CHECK(distance(a, b) == doctest::Approx(distance(b, a)).epsilon(1e-15));
    CHECK(distance(a, c) <= distance(a, b) + distance(b, c) + 1e-9);
  }
}

TEST_CASE("normalize_heading lands in [0, 2*pi)") {
  CHECK(normalize_heading(-kPi / 2.0) == doctest::Approx(3.0 * kPi / 2.0));
  CHECK(normalize_heading(2.0 * kPi) == doctest::Approx(0.0));
  CHECK(normalize_heading(7.0 * kPi) == doctest::Approx(kPi));
  for (double h : {-100.0, -1.0, 0.0, 1.0, 100.0}) {
    const double n = normalize_heading(h);
    CHECK(n >= 0.0);
    CHECK(n < 2.0 * kPi);
  }
}
