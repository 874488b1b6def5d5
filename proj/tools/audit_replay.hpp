#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

// One-pass audit-log replayer. Recomputes windowed confusion counts and the
// steady-state summary directly from audit lines with its own field scanner,
// so it shares no code with the simulator's metrics pipeline and can serve as
// an independent cross-check of every reported number.
namespace audit_replay {

struct Window {
  double start = 0.0;
  std::uint64_t attack_received = 0;
  std::uint64_t attack_rejected = 0;
  std::uint64_t valid_received = 0;
  std::uint64_t valid_rejected = 0;
};

struct Summary {
  std::vector<Window> windows;
  std::uint64_t cam_verdicts = 0;
  std::uint64_t cpm_verdicts = 0;
  double tp_avg = 0.0;
  double tp_worst = 0.0;
  double fp_avg = 0.0;
  double fp_best = 0.0;
  std::size_t steady_windows = 0;
};

/// Replays a stream of audit lines. `duration` fixes the window count
/// (ceil(duration / width)); lines outside [0, duration) are an error.
Summary replay(std::istream& in, double duration, double warmup, double width = 50.0);

Summary replay_file(const std::string& path, double duration, double warmup, double width = 50.0);

}  // namespace audit_replay
