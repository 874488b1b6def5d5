#include "mbdsim/kalman.hpp"

#include "mbdsim/errors.hpp"

namespace mbdsim::kalman {

namespace {

Eigen::Matrix4d transition(double dt) {
  Eigen::Matrix4d f = Eigen::Matrix4d::Identity();
  f(0, 2) = dt;
  f(1, 3) = dt;
  return f;
}

// Discretized continuous white-noise acceleration error, intensity q, applied
// per axis to the (p, v) pair.
Eigen::Matrix4d process_noise(double dt, double q) {
  const double dt2 = dt * dt;
  const double dt3 = dt2 * dt;
  Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
  m(0, 0) = m(1, 1) = q * dt3 / 3.0;
  m(2, 2) = m(3, 3) = q * dt;
  m(0, 2) = m(2, 0) = q * dt2 / 2.0;
  m(1, 3) = m(3, 1) = q * dt2 / 2.0;
  return m;
}

Eigen::Vector4d as_vector(const KinematicReport& m) {
  return {m.position.x, m.position.y, m.velocity.x, m.velocity.y};
}

void symmetrize(Eigen::Matrix4d& p) { p = ((p + p.transpose()) * 0.5).eval(); }

}  // namespace

Eigen::Matrix4d measurement_noise(const FilterParams& params) {
  Eigen::Matrix4d r = Eigen::Matrix4d::Zero();
  r(0, 0) = r(1, 1) = params.sigma_pos * params.sigma_pos;
  r(2, 2) = r(3, 3) = params.sigma_vel * params.sigma_vel;
  return r;
}

FilterState init(const KinematicReport& measurement, double t, const FilterParams& params) {
  FilterState s;
  s.mean = as_vector(measurement);
  s.covariance = measurement_noise(params);
  s.last_update = t;
  return s;
}

FilterState predict(const FilterState& state, Vec2 accel, double dt, const FilterParams& params) {
  if (!(dt > 0.0)) throw InvalidInputError("kalman::predict: dt must be positive");
  FilterState out = state;
  const double half_dt2 = 0.5 * dt * dt;
  out.mean(0) += state.mean(2) * dt + accel.x * half_dt2;
  out.mean(1) += state.mean(3) * dt + accel.y * half_dt2;
  out.mean(2) += accel.x * dt;
  out.mean(3) += accel.y * dt;
  const Eigen::Matrix4d f = transition(dt);
  out.covariance = f * state.covariance * f.transpose() + process_noise(dt, params.q);
  symmetrize(out.covariance);
  return out;
}

FilterState update(const FilterState& state, const KinematicReport& measurement, double t,
                   const FilterParams& params) {
  if (t < state.last_update) {
    throw TemporalOrderError("kalman::update: measurement time precedes last update");
  }
  const Eigen::Matrix4d r = measurement_noise(params);
  const Eigen::Vector4d innovation = as_vector(measurement) - state.mean;
  const Eigen::Matrix4d s = state.covariance + r;
  const Eigen::Matrix4d gain = state.covariance * s.inverse();

  FilterState out;
  out.mean = state.mean + gain * innovation;
  // Joseph form keeps the covariance symmetric positive-definite.
  const Eigen::Matrix4d ikh = Eigen::Matrix4d::Identity() - gain;
  out.covariance = ikh * state.covariance * ikh.transpose() + gain * r * gain.transpose();
  symmetrize(out.covariance);
  out.last_update = t;
  return out;
}

Deviation residual(const FilterState& state, const KinematicReport& measurement) {
  const Eigen::Vector4d d = as_vector(measurement) - state.mean;
  return {std::hypot(d(0), d(1)), std::hypot(d(2), d(3))};
}

Deviation deviation(const FilterState& state, const KinematicReport& measurement, Vec2 accel,
                    double dt, const FilterParams& params) {
  return residual(predict(state, accel, dt, params), measurement);
}

}  // namespace mbdsim::kalman
