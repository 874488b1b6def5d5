#pragma once

#include <Eigen/Dense>

#include "mbdsim/messages.hpp"

namespace mbdsim {

/// Noise model, deviation gates, and staleness bound for one tracking filter.
/// All strictly positive. q is the white-noise intensity of the unmodeled
/// acceleration error (m^2/s^3).
struct FilterParams {
  double q = 0.5;          // process noise intensity, m^2/s^3
  double sigma_pos = 1.0;  // measurement position stdev, m
  double sigma_vel = 0.5;  // measurement velocity stdev, m/s
  double theta_pos = 5.0;  // position gate, m
  double theta_vel = 3.0;  // velocity gate, m/s
  double t_stale = 2.0;    // staleness bound, s

  bool valid() const {
    return q > 0 && sigma_pos > 0 && sigma_vel > 0 && theta_pos > 0 && theta_vel > 0 &&
           t_stale > 0;
  }
};

/// Constant-acceleration filter state over (px, py, vx, vy); acceleration is
/// an exogenous control input supplied with each predict.
struct FilterState {
  Eigen::Vector4d mean = Eigen::Vector4d::Zero();
  Eigen::Matrix4d covariance = Eigen::Matrix4d::Identity();
  double last_update = 0.0;

  LocalPoint position() const { return {mean(0), mean(1)}; }
  Vec2 velocity() const { return {mean(2), mean(3)}; }
};

struct Deviation {
  double d_pos = 0.0;  // meters
  double d_vel = 0.0;  // m/s
};

inline bool plausible(const Deviation& d, const FilterParams& params) {
  return d.d_pos <= params.theta_pos && d.d_vel <= params.theta_vel;
}

namespace kalman {

/// New filter seeded directly from a measurement; covariance is the
/// measurement noise.
FilterState init(const KinematicReport& measurement, double t, const FilterParams& params);

/// Propagates mean and covariance by dt under the supplied acceleration.
/// Throws InvalidInputError for dt <= 0.
FilterState predict(const FilterState& state, Vec2 accel, double dt, const FilterParams& params);

/// Standard linear update with identity observation of (px, py, vx, vy).
/// Throws TemporalOrderError when t precedes the state's last update.
FilterState update(const FilterState& state, const KinematicReport& measurement, double t,
                   const FilterParams& params);

/// Residual norms of a measurement against the dt-ahead prediction; does not
/// mutate anything. Same dt domain as predict.
Deviation deviation(const FilterState& state, const KinematicReport& measurement, Vec2 accel,
                    double dt, const FilterParams& params);

/// Residual norms against the state as it stands, no propagation. This is the
/// dt -> 0 limit of deviation, needed when a message shares its timestamp
/// with the track's latest update.
Deviation residual(const FilterState& state, const KinematicReport& measurement);

Eigen::Matrix4d measurement_noise(const FilterParams& params);

}  // namespace kalman

}  // namespace mbdsim
