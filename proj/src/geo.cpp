#include "mbdsim/geo.hpp"

#include <numbers>

#include "mbdsim/errors.hpp"

namespace mbdsim {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kDegToRad = kPi / 180.0;

void check_latlon(double lat_deg, double lon_deg) {
  if (!(std::abs(lat_deg) <= 90.0) || !(std::abs(lon_deg) <= 180.0)) {
    throw InvalidInputError("latitude/longitude out of range: lat=" + std::to_string(lat_deg) +
                            " lon=" + std::to_string(lon_deg));
  }
}
}  // namespace

double normalize_heading(double heading) {
  double h = std::fmod(heading, 2.0 * kPi);
  if (h < 0.0) h += 2.0 * kPi;
  if (h >= 2.0 * kPi) h = 0.0;  // fmod can land exactly on 2*pi
  return h;
}

double angular_offset(double a, double b) {
  double d = std::fmod(a - b, 2.0 * kPi);
  if (d < -kPi) d += 2.0 * kPi;
  if (d > kPi) d -= 2.0 * kPi;
  return std::abs(d);
}

LocalPoint latlon_to_local(double lat_deg, double lon_deg, const GeoOrigin& origin) {
  check_latlon(lat_deg, lon_deg);
  check_latlon(origin.lat0, origin.lon0);
  const double dlat = (lat_deg - origin.lat0) * kDegToRad;
  const double dlon = (lon_deg - origin.lon0) * kDegToRad;
  return {kEarthRadiusMeters * std::cos(origin.lat0 * kDegToRad) * dlon,
          kEarthRadiusMeters * dlat};
}

std::pair<double, double> local_to_latlon(LocalPoint p, const GeoOrigin& origin) {
  check_latlon(origin.lat0, origin.lon0);
  const double lat = origin.lat0 + p.y / kEarthRadiusMeters / kDegToRad;
  const double lon =
      origin.lon0 + p.x / (kEarthRadiusMeters * std::cos(origin.lat0 * kDegToRad)) / kDegToRad;
  return {lat, lon};
}

bool in_sector(LocalPoint target, const Pose& sensor_pose, double fov, double range) {
  if (!(fov > 0.0 && fov <= 2.0 * kPi) || !(range > 0.0)) {
    throw InvalidInputError("in_sector: fov must be in (0, 2*pi] and range > 0");
  }
  const Vec2 d = target - sensor_pose.position;
  // Inclusive boundaries; tiny slack keeps exact-boundary cases inside despite
  // rounding in the distance/bearing computation.
  if (d.norm() > range * (1.0 + 1e-12) + 1e-12) return false;
  if (fov >= 2.0 * kPi) return true;
  if (d.x == 0.0 && d.y == 0.0) return true;  // coincident with the sensor
  const double bearing = std::atan2(d.y, d.x);
  return angular_offset(bearing, sensor_pose.heading) <= fov / 2.0 + 1e-12;
}

}  // namespace mbdsim
