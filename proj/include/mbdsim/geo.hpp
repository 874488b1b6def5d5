#pragma once

#include <cmath>
#include <utility>

namespace mbdsim {

/// Free 2-vector: velocity, acceleration, displacement.
struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
  constexpr Vec2 operator-() const { return {-x, -y}; }
  constexpr bool operator==(const Vec2&) const = default;

  double norm() const { return std::hypot(x, y); }

  /// CCW rotation by `angle` radians.
  Vec2 rotated(double angle) const {
    const double c = std::cos(angle), s = std::sin(angle);
    return {c * x - s * y, s * x + c * y};
  }
};

constexpr Vec2 operator*(double s, Vec2 v) { return v * s; }

/// Position on the local tangent plane: meters east (x) / north (y).
struct LocalPoint {
  double x = 0.0;
  double y = 0.0;

  constexpr bool operator==(const LocalPoint&) const = default;
};

constexpr LocalPoint operator+(LocalPoint p, Vec2 d) { return {p.x + d.x, p.y + d.y}; }
constexpr LocalPoint operator-(LocalPoint p, Vec2 d) { return {p.x - d.x, p.y - d.y}; }
constexpr Vec2 operator-(LocalPoint a, LocalPoint b) { return {a.x - b.x, a.y - b.y}; }

inline double distance(LocalPoint a, LocalPoint b) { return (a - b).norm(); }
inline double distance_sq(LocalPoint a, LocalPoint b) {
  const double dx = a.x - b.x, dy = a.y - b.y;
  return dx * dx + dy * dy;
}

/// Wraps an angle to [0, 2*pi).
double normalize_heading(double heading);

/// Magnitude of the wrapped difference between two angles, in [0, pi].
double angular_offset(double a, double b);

/// Position plus heading (radians CCW from +x, normalized to [0, 2*pi)).
struct Pose {
  LocalPoint position;
  double heading = 0.0;
};

/// Projection anchor for geodetic trace ingestion.
struct GeoOrigin {
  double lat0 = 0.0;  // degrees
  double lon0 = 0.0;  // degrees
};

inline constexpr double kEarthRadiusMeters = 6'371'000.0;

/// Equirectangular projection around `origin`. Throws InvalidInputError when
/// latitude or longitude is outside the valid geodetic range.
LocalPoint latlon_to_local(double lat_deg, double lon_deg, const GeoOrigin& origin);

/// Inverse of latlon_to_local; returns {lat, lon} in degrees.
std::pair<double, double> local_to_latlon(LocalPoint p, const GeoOrigin& origin);

/// Sector membership test with inclusive boundaries. A full-circle fov (2*pi)
/// reduces to a pure range test.
bool in_sector(LocalPoint target, const Pose& sensor_pose, double fov, double range);

}  // namespace mbdsim
