#include "mbdsim/sensing.hpp"

#include <algorithm>
#include <cmath>

namespace mbdsim {

bool segment_intersects_footprint(LocalPoint a, LocalPoint b, const VehicleFootprint& rect) {
  // Work in the rectangle frame: slab clipping against the axis-aligned box.
  const Vec2 da = (a - rect.center).rotated(-rect.heading);
  const Vec2 db = (b - rect.center).rotated(-rect.heading);
  const double hx = rect.length / 2.0;
  const double hy = rect.width / 2.0;

  double t0 = 0.0, t1 = 1.0;
  const double d[2] = {db.x - da.x, db.y - da.y};
  const double p[2] = {da.x, da.y};
  const double h[2] = {hx, hy};
  for (int axis = 0; axis < 2; ++axis) {
    if (d[axis] == 0.0) {
      if (p[axis] < -h[axis] || p[axis] > h[axis]) return false;
      continue;
    }
    double lo = (-h[axis] - p[axis]) / d[axis];
    double hi = (h[axis] - p[axis]) / d[axis];
    if (lo > hi) std::swap(lo, hi);
    t0 = std::max(t0, lo);
    t1 = std::min(t1, hi);
    if (t0 > t1) return false;
  }
  return true;
}

std::vector<std::size_t> perceive(const Pose& self_pose, std::span<const VehicleFootprint> others,
                                  const SensorConfig& cfg) {
  struct Hit {
    std::size_t index;
    double dist;
  };
  std::vector<Hit> hits;

  // Only rectangles near the sensor disk can block anything; anything farther
  // than range + half-diagonal cannot touch a segment that ends inside range.
  std::vector<std::size_t> blockers;
  for (std::size_t j = 0; j < others.size(); ++j) {
    const double half_diag = std::hypot(others[j].length, others[j].width) / 2.0;
    if (distance(self_pose.position, others[j].center) <= cfg.range + half_diag) {
      blockers.push_back(j);
    }
  }

  for (std::size_t i = 0; i < others.size(); ++i) {
    if (!in_sector(others[i].center, self_pose, cfg.fov, cfg.range)) continue;
    bool occluded = false;
    for (std::size_t j : blockers) {
      if (j == i) continue;
      if (segment_intersects_footprint(self_pose.position, others[i].center, others[j])) {
        occluded = true;
        break;
      }
    }
    if (!occluded) hits.push_back({i, distance(self_pose.position, others[i].center)});
  }

  std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) {
    return a.dist < b.dist || (a.dist == b.dist && a.index < b.index);
  });
  std::vector<std::size_t> out;
  out.reserve(hits.size());
  for (const Hit& h : hits) out.push_back(h.index);
  return out;
}

std::vector<PerceivedObject> build_cpm_objects(const KinematicReport& self_state,
                                               double self_heading,
                                               std::span<const std::size_t> perceived,
                                               std::span<const KinematicReport> truth,
                                               std::size_t cap) {
  std::vector<PerceivedObject> objects;
  objects.reserve(std::min(cap, perceived.size()));
  for (std::size_t k = 0; k < perceived.size() && objects.size() < cap; ++k) {
    objects.push_back(global_to_object(truth[perceived[k]], self_state, self_heading));
  }
  return objects;
}

}  // namespace mbdsim
