#pragma once

namespace mbdsim {

/// Abstract unit-disk radio: delivery within r_max, i.i.d. loss, zero
/// latency. d_margin bounds the new-vehicle admission annulus near the range
/// edge.
struct RadioConfig {
  double r_max = 400.0;   // meters
  double p_loss = 0.05;   // per-receiver drop probability
  double d_margin = 50.0; // meters

  bool valid() const {
    return p_loss >= 0.0 && p_loss < 1.0 && d_margin > 0.0 && d_margin < r_max;
  }
};

/// CAM/CPM cadence; periods must be positive multiples of the scenario step.
struct EmissionSchedule {
  double cam_period = 0.1;  // seconds
  double cpm_period = 1.0;  // seconds
  bool phase_jitter = true; // per-vehicle random emission phase
};

}  // namespace mbdsim
