#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "mbdsim/errors.hpp"
#include "mbdsim/rng.hpp"
#include "mbdsim/scenario.hpp"

namespace mbdsim {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kLaneWidth = 3.5;

struct GridNode {
  int i = 0;
  int j = 0;
};

struct PathSegment {
  bool is_arc = false;
  // line
  LocalPoint a, b;
  Vec2 dir;  // unit, a -> b
  // arc
  LocalPoint center;
  double radius = 0.0;
  double ang0 = 0.0;     // angle of entry point around center
  double sweep = 0.0;    // signed, + = CCW
  double s0 = 0.0;       // cumulative arclength at segment start
  double len = 0.0;
};

struct Path {
  std::vector<PathSegment> segs;
  std::vector<std::pair<double, double>> arc_ranges;  // [s_begin, s_end] per arc
  double total = 0.0;

  struct PointState {
    LocalPoint pos;
    double heading;
    double curvature;  // signed, + = turning left
  };

  PointState at(double s) const {
    std::size_t lo = 0, hi = segs.size() - 1;
    while (lo < hi) {
      const std::size_t mid = (lo + hi + 1) / 2;
      if (segs[mid].s0 <= s) {
        lo = mid;
      } else {
        hi = mid - 1;
      }
    }
    const PathSegment& seg = segs[lo];
    const double ds = std::clamp(s - seg.s0, 0.0, seg.len);
    if (!seg.is_arc) {
      return {seg.a + seg.dir * ds, std::atan2(seg.dir.y, seg.dir.x), 0.0};
    }
    const double sign = seg.sweep >= 0.0 ? 1.0 : -1.0;
    const double ang = seg.ang0 + sign * ds / seg.radius;
    const LocalPoint pos =
        seg.center + Vec2{seg.radius * std::cos(ang), seg.radius * std::sin(ang)};
    const double heading = normalize_heading(ang + sign * kPi / 2.0);
    return {pos, heading, sign / seg.radius};
  }
};

Vec2 right_normal(Vec2 u) { return {u.y, -u.x}; }
double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }

/// Offsets the waypoint polyline to the lane center and rounds every corner
/// with a tangent arc.
Path build_path(const std::vector<LocalPoint>& waypoints, double lane_offset, double turn_radius) {
  const std::size_t n = waypoints.size();
  std::vector<Vec2> dirs(n - 1);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const Vec2 d = waypoints[k + 1] - waypoints[k];
    dirs[k] = d * (1.0 / d.norm());
  }

  // Offset polyline vertices (lane center), corners as line intersections.
  std::vector<LocalPoint> verts(n);
  verts[0] = waypoints[0] + right_normal(dirs[0]) * lane_offset;
  verts[n - 1] = waypoints[n - 1] + right_normal(dirs[n - 2]) * lane_offset;
  for (std::size_t k = 1; k + 1 < n; ++k) {
    const Vec2 u1 = dirs[k - 1], u2 = dirs[k];
    if (std::abs(cross(u1, u2)) < 1e-9) {
      verts[k] = waypoints[k] + right_normal(u1) * lane_offset;
      continue;
    }
    const LocalPoint p1 = waypoints[k] + right_normal(u1) * lane_offset;
    const LocalPoint p2 = waypoints[k] + right_normal(u2) * lane_offset;
    const double s = cross(p2 - p1, u2) / cross(u1, u2);
    verts[k] = p1 + u1 * s;
  }

  Path path;
  LocalPoint cursor = verts[0];
  auto push_line = [&](LocalPoint to) {
    const Vec2 d = to - cursor;
    const double len = d.norm();
    if (len < 1e-9) return;
    PathSegment seg;
    seg.is_arc = false;
    seg.a = cursor;
    seg.b = to;
    seg.dir = d * (1.0 / len);
    seg.s0 = path.total;
    seg.len = len;
    path.segs.push_back(seg);
    path.total += len;
    cursor = to;
  };

  for (std::size_t k = 1; k + 1 < n; ++k) {
    const Vec2 u1 = dirs[k - 1], u2 = dirs[k];
    const double cr = cross(u1, u2);
    if (std::abs(cr) < 1e-9) continue;  // straight through, no corner
    const double theta = std::acos(std::clamp(u1.x * u2.x + u1.y * u2.y, -1.0, 1.0));
    const double tang = turn_radius * std::tan(theta / 2.0);
    const LocalPoint tp1 = verts[k] - u1 * tang;
    const LocalPoint tp2 = verts[k] + u2 * tang;
    push_line(tp1);

    PathSegment arc;
    arc.is_arc = true;
    arc.radius = turn_radius;
    const bool left = cr > 0.0;
    const Vec2 to_center = left ? -right_normal(u1) : right_normal(u1);
    arc.center = tp1 + to_center * turn_radius;
    const Vec2 r0 = tp1 - arc.center;
    arc.ang0 = std::atan2(r0.y, r0.x);
    arc.sweep = left ? theta : -theta;
    arc.s0 = path.total;
    arc.len = turn_radius * theta;
    path.arc_ranges.emplace_back(arc.s0, arc.s0 + arc.len);
    path.segs.push_back(arc);
    path.total += arc.len;
    cursor = tp2;
  }
  push_line(verts[n - 1]);
  return path;
}

double plan_speed(const Path& path, double s, double cruise, double turn_speed, double decel) {
  double v = cruise;
  if (turn_speed >= cruise) return v;
  for (const auto& [a0, a1] : path.arc_ranges) {
    if (s > a1) continue;
    if (s >= a0) return std::min(v, turn_speed);
    v = std::min(v, std::sqrt(turn_speed * turn_speed + 2.0 * decel * (a0 - s)));
  }
  return v;
}

}  // namespace

Scenario synth_grid(const SynthParams& p, std::uint64_t seed) {
  if (!p.valid()) throw ConfigError("synth_grid: invalid parameters");

  Scenario sc;
  sc.duration = p.duration;
  sc.dt = 0.1;
  sc.seed = seed;
  sc.synth_recipe = p;

  auto rng = make_stream(seed, "synth");
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  // Boundary entries: every border node, heading inward.
  struct Entry {
    GridNode node;
    GridNode dir;
  };
  std::vector<Entry> entries;
  const int b = p.blocks;
  for (int i = 0; i <= b; ++i) {
    entries.push_back({{i, 0}, {0, 1}});
    entries.push_back({{i, b}, {0, -1}});
    entries.push_back({{0, i}, {1, 0}});
    entries.push_back({{b, i}, {-1, 0}});
  }

  if (p.spawn_rate <= 0.0) {
    sc.finalize();
    return sc;
  }

  // The spawn clock starts warm_start seconds before the recorded window;
  // vehicles advance through negative time and only [0, duration) is kept.
  std::exponential_distribution<double> interarrival(p.spawn_rate);
  double t_spawn = interarrival(rng) - p.warm_start;
  while (t_spawn < p.duration) {
    const auto& entry = entries[std::uniform_int_distribution<std::size_t>(
        0, entries.size() - 1)(rng)];
    const int lane = std::uniform_int_distribution<int>(0, p.lanes - 1)(rng);
    const double cruise = std::uniform_real_distribution<double>(p.speed_min, p.speed_max)(rng);

    // Random walk through the grid until an outward choice exits it.
    std::vector<LocalPoint> waypoints;
    GridNode node = entry.node;
    GridNode dir = entry.dir;
    waypoints.push_back({node.i * p.block_len, node.j * p.block_len});
    for (int leg = 0; leg < 500; ++leg) {
      node = {node.i + dir.i, node.j + dir.j};
      if (node.i < 0 || node.i > b || node.j < 0 || node.j > b) break;
      waypoints.push_back({node.i * p.block_len, node.j * p.block_len});
      const double u = unit(rng);
      GridNode straight = dir;
      GridNode left{-dir.j, dir.i};
      GridNode right{dir.j, -dir.i};
      dir = u < 0.5 ? straight : (u < 0.75 ? left : right);
    }
    if (waypoints.size() >= 2) {
      const double lane_offset = kLaneWidth / 2.0 + lane * kLaneWidth;
      const Path path = build_path(waypoints, lane_offset, p.turn_radius);

      Trajectory tr;
      const auto spawn_step = static_cast<long long>(std::ceil(t_spawn / sc.dt - 1e-9));
      long long step = spawn_step;  // negative while still inside the warm-up
      double s = 0.0;
      double v = cruise;
      while (s < path.total) {
        const double t = static_cast<double>(step) * sc.dt;
        if (t >= p.duration) break;
        const auto ps = path.at(s);
        const double v_target = plan_speed(path, s, cruise, p.turn_speed, p.decel);
        const double a_lon = std::clamp((v_target - v) / sc.dt, -p.decel, p.accel);
        if (step >= 0) {
          const Vec2 tangent{std::cos(ps.heading), std::sin(ps.heading)};
          const Vec2 normal{-std::sin(ps.heading), std::cos(ps.heading)};
          tr.samples.push_back(TrajectorySample{
              t, ps.pos, ps.heading, v, tangent * a_lon + normal * (v * v * ps.curvature)});
        }
        s += v * sc.dt + 0.5 * a_lon * sc.dt * sc.dt;
        v = std::max(0.0, v + a_lon * sc.dt);
        ++step;
      }
      if (tr.samples.size() >= 2) {
        tr.spawn = tr.samples.front().t;
        tr.despawn = static_cast<double>(step) * sc.dt;
        sc.vehicles.push_back(std::move(tr));
      }
    }
    t_spawn += interarrival(rng);
  }

  sc.finalize();
  return sc;
}

}  // namespace mbdsim
