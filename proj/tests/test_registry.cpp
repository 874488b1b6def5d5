#include <doctest.h>

#include <cmath>
#include <random>

#include "mbdsim/errors.hpp"
#include "mbdsim/registry.hpp"

using namespace mbdsim;

namespace {
KinematicReport at(double x, double y, double vx = 0.0, double vy = 0.0) {
  return {LocalPoint{x, y}, Vec2{vx, vy}, Vec2{}};
}
}  // namespace

TEST_CASE("lookup: presence, staleness, and empty registries") {
  TrackRegistry reg{FilterParams{}};
  CHECK_FALSE(reg.lookup(StationId{5}, 0.0).has_value());

  reg.insert_new(at(0, 0), StationId{5}, TrackOrigin::CamDirect, 0.0);
  CHECK(reg.lookup(StationId{5}, 0.1).has_value());   // fresh (0.1 s old)
  CHECK(reg.lookup(StationId{5}, 2.0).has_value());   // exactly at the bound
  CHECK_FALSE(reg.lookup(StationId{5}, 2.5).has_value());  // stale
  CHECK_FALSE(reg.lookup(StationId{6}, 0.1).has_value());
}

TEST_CASE("best_match picks the nearest fresh track") {
  TrackRegistry reg{FilterParams{}};
  reg.insert_new(at(0, 0), StationId{1}, TrackOrigin::CamDirect, 0.0);
  reg.insert_new(at(100, 0), StationId{2}, TrackOrigin::CamDirect, 0.0);

  const auto m = reg.best_match(at(1, 0), {0, 0}, 0.0);
  REQUIRE(m.has_value());
  CHECK(reg.track(m->index).bound_id == StationId{1});
  CHECK(m->d_pos == doctest::Approx(1.0));
}

TEST_CASE("best_match ignores stale tracks and empty registries") {
  TrackRegistry reg{FilterParams{}};
  CHECK_FALSE(reg.best_match(at(0, 0), {0, 0}, 0.0).has_value());
  reg.insert_new(at(0, 0), StationId{1}, TrackOrigin::CamDirect, 0.0);
  CHECK_FALSE(reg.best_match(at(0, 0), {0, 0}, 5.0).has_value());  // all stale
}

TEST_CASE("best_match agrees with an exhaustive scan oracle") {
  FilterParams params;
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> coord(-200.0, 200.0);
  std::uniform_real_distribution<double> vel(-20.0, 20.0);

  for (int trial = 0; trial < 50; ++trial) {
    TrackRegistry reg{params};
    const double now = 1.0;
    for (int i = 0; i < 10; ++i) {
      reg.insert_new(at(coord(rng), coord(rng), vel(rng), vel(rng)),
                     StationId{static_cast<std::uint32_t>(i + 1)}, TrackOrigin::CamDirect,
                     now - 0.1 * (i % 3));
    }
    const KinematicReport probe = at(coord(rng), coord(rng), vel(rng), vel(rng));
    const auto got = reg.best_match(probe, {0.5, -0.5}, now);
    REQUIRE(got.has_value());

    // independent scan over all fresh tracks
    bool found = false;
    double best_pos = 0.0, best_vel = 0.0;
    double best_created = 0.0;
    std::size_t best_idx = 0;
    for (std::size_t i = 0; i < reg.tracks().size(); ++i) {
      const Track& tr = reg.tracks()[i];
      if (now - tr.filter.last_update > params.t_stale) continue;
      const Deviation d = reg.track_deviation(tr, probe, {0.5, -0.5}, now);
      const bool better = !found || d.d_pos < best_pos ||
                          (d.d_pos == best_pos &&
                           (d.d_vel < best_vel ||
                            (d.d_vel == best_vel && tr.created_at < best_created)));
      if (better) {
        found = true;
        best_pos = d.d_pos;
        best_vel = d.d_vel;
        best_created = tr.created_at;
        best_idx = i;
      }
    }
    CHECK(got->index == best_idx);
    CHECK(got->d_pos == best_pos);
    // minimality re-check: nothing fresh beats the returned d_pos
    for (std::size_t i = 0; i < reg.tracks().size(); ++i) {
      const Track& tr = reg.tracks()[i];
      if (now - tr.filter.last_update > params.t_stale) continue;
      CHECK(reg.track_deviation(tr, probe, {0.5, -0.5}, now).d_pos >= got->d_pos);
    }
  }
}

TEST_CASE("rebind: first binding of a CPM-born track") {
  TrackRegistry reg{FilterParams{}};
  const std::size_t idx = reg.insert_new(at(10, 10), std::nullopt, TrackOrigin::CpmPerceived, 0.0);
  CHECK_FALSE(reg.track(idx).bound_id.has_value());

  reg.rebind(idx, StationId{77}, at(10.2, 10.0), 0.1);
  CHECK(reg.track(idx).bound_id == StationId{77});
  CHECK(reg.lookup(StationId{77}, 0.2).has_value());
}

TEST_CASE("rebind: pseudonym rotation moves the binding") {
  TrackRegistry reg{FilterParams{}};
  const std::size_t idx = reg.insert_new(at(0, 0, 10, 0), StationId{100}, TrackOrigin::CamDirect, 0.0);
  reg.rebind(idx, StationId{200}, at(1.0, 0, 10, 0), 0.1);
  CHECK(reg.track(idx).bound_id == StationId{200});
  CHECK_FALSE(reg.lookup(StationId{100}, 0.2).has_value());
  CHECK(reg.lookup(StationId{200}, 0.2).has_value());
}

TEST_CASE("rebind to an id held by another fresh track is a consistency error") {
  TrackRegistry reg{FilterParams{}};
  reg.insert_new(at(0, 0), StationId{1}, TrackOrigin::CamDirect, 0.0);
  const std::size_t other = reg.insert_new(at(50, 0), StationId{2}, TrackOrigin::CamDirect, 0.0);
  CHECK_THROWS_AS(reg.rebind(other, StationId{1}, at(50, 0), 0.1), ConsistencyError);
}

TEST_CASE("insert_new: binding visibility and growth") {
  TrackRegistry reg{FilterParams{}};
  const std::size_t before = reg.size();
  reg.insert_new(at(5, 5), StationId{9}, TrackOrigin::CamDirect, 0.0);
  CHECK(reg.size() == before + 1);
  CHECK(reg.lookup(StationId{9}, 0.0).has_value());

  const std::size_t unbound = reg.insert_new(at(9, 9), std::nullopt, TrackOrigin::CpmPerceived, 0.0);
  CHECK(reg.size() == before + 2);
  CHECK_FALSE(reg.track(unbound).bound_id.has_value());
  CHECK_FALSE(reg.lookup(StationId{8}, 0.0).has_value());
  const auto m = reg.best_match(at(9, 9), {0, 0}, 0.0);
  REQUIRE(m.has_value());
  CHECK(m->index == unbound);

  CHECK_THROWS_AS(reg.insert_new(at(9, 9), StationId{9}, TrackOrigin::CamDirect, 0.1),
                  ConsistencyError);
}

TEST_CASE("insert_new may reclaim an id from a stale holder") {
  FilterParams params;
  TrackRegistry reg{params};
  reg.insert_new(at(0, 0), StationId{4}, TrackOrigin::CamDirect, 0.0);
  // 3 s later the holder is stale but unswept; the id is reusable.
  const std::size_t idx = reg.insert_new(at(1, 1), StationId{4}, TrackOrigin::CamDirect, 3.0);
  CHECK(reg.track(idx).bound_id == StationId{4});
  std::size_t bound = 0;
  for (const Track& tr : reg.tracks()) {
    if (tr.bound_id == StationId{4}) ++bound;
  }
  CHECK(bound == 1);
}

TEST_CASE("sweep evicts stale tracks and is idempotent") {
  TrackRegistry reg{FilterParams{}};
  CHECK(reg.sweep(100.0) == 0);

  for (int i = 0; i < 5; ++i) {
    reg.insert_new(at(i * 10.0, 0), StationId{static_cast<std::uint32_t>(i + 1)},
                   TrackOrigin::CamDirect, i < 3 ? 0.0 : 9.0);
  }
  CHECK(reg.sweep(10.0) == 3);  // the three tracks from t=0 are 10 s old
  CHECK(reg.size() == 2);
  CHECK(reg.sweep(10.0) == 0);
}

TEST_CASE("bound ids stay unique under random operation sequences") {
  FilterParams params;
  std::mt19937_64 rng(4242);
  std::uniform_real_distribution<double> coord(-100.0, 100.0);
  std::uniform_int_distribution<std::uint32_t> id_dist(1, 12);
  std::uniform_int_distribution<int> op_dist(0, 3);

  TrackRegistry reg{params};
  double now = 0.0;
  for (int i = 0; i < 600; ++i) {
    now += 0.05;
    const StationId id{id_dist(rng)};
    switch (op_dist(rng)) {
      case 0: {
        if (!reg.lookup(id, now)) {
          reg.insert_new(at(coord(rng), coord(rng)), id, TrackOrigin::CamDirect, now);
        }
        break;
      }
      case 1: {
        reg.insert_new(at(coord(rng), coord(rng)), std::nullopt, TrackOrigin::CpmPerceived, now);
        break;
      }
      case 2: {
        const auto m = reg.best_match(at(coord(rng), coord(rng)), {0, 0}, now);
        if (m && !reg.lookup(id, now)) {
          reg.rebind(m->index, id, at(coord(rng), coord(rng)), now);
        }
        break;
      }
      default:
        reg.sweep(now);
    }
    // invariant: no station id bound twice
    for (std::size_t a = 0; a < reg.tracks().size(); ++a) {
      for (std::size_t b = a + 1; b < reg.tracks().size(); ++b) {
        if (reg.tracks()[a].bound_id && reg.tracks()[b].bound_id) {
          CHECK(reg.tracks()[a].bound_id != reg.tracks()[b].bound_id);
        }
      }
    }
  }
}
