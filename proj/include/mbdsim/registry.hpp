#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "mbdsim/kalman.hpp"

namespace mbdsim {

enum class TrackOrigin { CamDirect, CpmPerceived };

/// One neighbor estimate: a Kalman filter plus an optional station-ID
/// binding. CPM-born tracks start unbound and gain an ID when a CAM first
/// matches them.
struct Track {
  FilterState filter;
  std::optional<StationId> bound_id;
  TrackOrigin origin = TrackOrigin::CamDirect;
  double created_at = 0.0;
  std::uint64_t key = 0;  // stable identity across registry mutations
};

/// The per-receiver "list of Kalman filters". Bound IDs are unique across the
/// whole registry; freshness (age <= t_stale) gates every query. Linear scans
/// throughout: neighbor counts stay small enough that an index would only
/// obscure the selection rule.
class TrackRegistry {
 public:
  explicit TrackRegistry(FilterParams params) : params_(params) {}

  struct Match {
    std::size_t index = 0;
    double d_pos = 0.0;
    double d_vel = 0.0;
  };

  /// Fresh track bound to `id`, if any; stale tracks count as absent.
  std::optional<std::size_t> lookup(StationId id, double now) const;

  /// Deviation-minimizing fresh track for a measurement (smallest d_pos,
  /// ties: smaller d_vel, then older created_at).
  std::optional<Match> best_match(const KinematicReport& measurement, Vec2 accel,
                                  double now) const;

  /// Binds `new_id` to an existing track and folds the measurement in.
  /// Throws ConsistencyError if another fresh track already holds the ID.
  void rebind(std::size_t index, StationId new_id, const KinematicReport& measurement,
              double now);

  /// Fresh track from a single measurement; returns its index.
  std::size_t insert_new(const KinematicReport& measurement, std::optional<StationId> id,
                         TrackOrigin origin, double now);

  /// Drops every track older than t_stale; returns how many went.
  std::size_t sweep(double now);

  /// Predict-to-now plus measurement update on one track.
  void update_track(std::size_t index, const KinematicReport& measurement, double now);

  /// Residuals of a measurement against a track's prediction at `now`.
  Deviation track_deviation(const Track& track, const KinematicReport& measurement, Vec2 accel,
                            double now) const;

  bool fresh(const Track& track, double now) const {
    return now - track.filter.last_update <= params_.t_stale;
  }

  const std::vector<Track>& tracks() const { return tracks_; }
  const Track& track(std::size_t index) const { return tracks_[index]; }
  const FilterParams& params() const { return params_; }
  std::size_t size() const { return tracks_.size(); }

 private:
  std::vector<Track> tracks_;
  FilterParams params_;
  std::uint64_t next_key_ = 1;
};

}  // namespace mbdsim
