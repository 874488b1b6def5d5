#include "mbdsim/registry.hpp"

#include <algorithm>

#include "mbdsim/errors.hpp"

namespace mbdsim {

std::optional<std::size_t> TrackRegistry::lookup(StationId id, double now) const {
  for (std::size_t i = 0; i < tracks_.size(); ++i) {
    if (tracks_[i].bound_id == id && fresh(tracks_[i], now)) return i;
  }
  return std::nullopt;
}

Deviation TrackRegistry::track_deviation(const Track& track, const KinematicReport& measurement,
                                         Vec2 accel, double now) const {
  const double dt = now - track.filter.last_update;
  if (dt > 0.0) return kalman::deviation(track.filter, measurement, accel, dt, params_);
  return kalman::residual(track.filter, measurement);
}

std::optional<TrackRegistry::Match> TrackRegistry::best_match(const KinematicReport& measurement,
                                                              Vec2 accel, double now) const {
  std::optional<Match> best;
  double best_created = 0.0;
  for (std::size_t i = 0; i < tracks_.size(); ++i) {
    const Track& tr = tracks_[i];
    if (!fresh(tr, now)) continue;
    const Deviation d = track_deviation(tr, measurement, accel, now);
    const bool better =
        !best || d.d_pos < best->d_pos ||
        (d.d_pos == best->d_pos &&
         (d.d_vel < best->d_vel || (d.d_vel == best->d_vel && tr.created_at < best_created)));
    if (better) {
      best = Match{i, d.d_pos, d.d_vel};
      best_created = tr.created_at;
    }
  }
  return best;
}

void TrackRegistry::rebind(std::size_t index, StationId new_id, const KinematicReport& measurement,
                           double now) {
  for (std::size_t i = 0; i < tracks_.size(); ++i) {
    if (i != index && tracks_[i].bound_id == new_id && fresh(tracks_[i], now)) {
      throw ConsistencyError("registry::rebind: id " + std::to_string(new_id.value) +
                             " already bound to a fresh track");
    }
  }
  for (auto& tr : tracks_) {
    if (&tr != &tracks_[index] && tr.bound_id == new_id) tr.bound_id.reset();
  }
  update_track(index, measurement, now);
  tracks_[index].bound_id = new_id;
}

std::size_t TrackRegistry::insert_new(const KinematicReport& measurement,
                                      std::optional<StationId> id, TrackOrigin origin,
                                      double now) {
  if (id) {
    for (auto& tr : tracks_) {
      if (tr.bound_id != *id) continue;
      if (fresh(tr, now)) {
        throw ConsistencyError("registry::insert_new: id " + std::to_string(id->value) +
                               " already bound to a fresh track");
      }
      tr.bound_id.reset();
    }
  }
  tracks_.push_back(Track{kalman::init(measurement, now, params_), id, origin, now, next_key_++});
  return tracks_.size() - 1;
}

std::size_t TrackRegistry::sweep(double now) {
  const std::size_t before = tracks_.size();
  std::erase_if(tracks_,
                [&](const Track& tr) { return now - tr.filter.last_update > params_.t_stale; });
  return before - tracks_.size();
}

void TrackRegistry::update_track(std::size_t index, const KinematicReport& measurement,
                                 double now) {
  FilterState& f = tracks_[index].filter;
  const double dt = now - f.last_update;
  if (dt > 0.0) f = kalman::predict(f, measurement.acceleration, dt, params_);
  f = kalman::update(f, measurement, now, params_);
}

}  // namespace mbdsim
