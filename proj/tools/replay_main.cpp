// Standalone audit-log replayer: recomputes per-window counts and the
// steady-state summary from an audit.jsonl, independent of the simulator.
#include <cstdio>
#include <exception>
#include <string>

#include "audit_replay.hpp"

int main(int argc, char** argv) {
  if (argc < 4) {
    std::fprintf(stderr,
                 "usage: mbdsim-replay <audit.jsonl> <duration> <warmup> [width=50]\n");
    return 2;
  }
  try {
    const double duration = std::stod(argv[2]);
    const double warmup = std::stod(argv[3]);
    const double width = argc > 4 ? std::stod(argv[4]) : 50.0;
    const auto s = audit_replay::replay_file(argv[1], duration, warmup, width);
    std::printf("window_start,tp_pct,fp_pct,attack_received,attack_rejected,valid_received,"
                "valid_rejected\n");
    for (const auto& w : s.windows) {
      std::printf("%g,", w.start);
      if (w.attack_received > 0) {
        std::printf("%.10g", 100.0 * static_cast<double>(w.attack_rejected) /
                                 static_cast<double>(w.attack_received));
      }
      std::printf(",");
      if (w.valid_received > 0) {
        std::printf("%.10g", 100.0 * static_cast<double>(w.valid_rejected) /
                                 static_cast<double>(w.valid_received));
      }
      std::printf(",%llu,%llu,%llu,%llu\n", static_cast<unsigned long long>(w.attack_received),
                  static_cast<unsigned long long>(w.attack_rejected),
                  static_cast<unsigned long long>(w.valid_received),
                  static_cast<unsigned long long>(w.valid_rejected));
    }
    std::printf("summary tp_avg=%.10g tp_worst=%.10g fp_avg=%.10g fp_best=%.10g "
                "cam_verdicts=%llu cpm_verdicts=%llu steady_windows=%zu\n",
                s.tp_avg, s.tp_worst, s.fp_avg, s.fp_best,
                static_cast<unsigned long long>(s.cam_verdicts),
                static_cast<unsigned long long>(s.cpm_verdicts), s.steady_windows);
    return 0;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "mbdsim-replay: %s\n", e.what());
    return 1;
  }
}
