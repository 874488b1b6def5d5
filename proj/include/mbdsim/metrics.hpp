#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace mbdsim {

/// Confusion counts for one recording window, summed over all receivers.
struct RateWindow {
  double window_start = 0.0;
  double width = 50.0;
  std::uint64_t attack_received = 0;
  std::uint64_t attack_rejected = 0;
  std::uint64_t valid_received = 0;
  std::uint64_t valid_rejected = 0;
};

struct WindowRates {
  std::optional<double> tp;  // percent of attack messages rejected
  std::optional<double> fp;  // percent of valid messages rejected
};

/// Percent rates for one window; a class with zero received messages yields
/// no rate rather than 0.
WindowRates rates(const RateWindow& w);

/// Steady-state aggregates over windows starting at or after the warmup.
struct RunSummary {
  double warmup = 500.0;
  std::size_t steady_windows = 0;
  double tp_avg = 0.0;
  double tp_worst = 0.0;  // minimum window TP
  double fp_avg = 0.0;
  double fp_best = 0.0;  // minimum window FP
  // Receiver-averaged variants (mean of per-receiver steady-state rates), for
  // sensitivity checks only; the window series above is the primary metric.
  std::optional<double> tp_receiver_avg;
  std::optional<double> fp_receiver_avg;
};

/// Fixed-width windowed accumulator. CAM verdicts only; CPM sender verdicts
/// are tracked by the kernel's diagnostic counters instead.
class MetricsAccumulator {
 public:
  MetricsAccumulator() : MetricsAccumulator(0.0) {}
  explicit MetricsAccumulator(double duration, double width = 50.0,
                              std::size_t receiver_hint = 0);

  void record(std::uint32_t receiver, bool rejected, bool ground_truth_falsified, double rx_time);

  const std::vector<RateWindow>& windows() const { return windows_; }
  std::uint64_t total_received() const;

  RunSummary summarize(double warmup) const;

 private:
  struct Counts {
    std::uint64_t ar = 0, axr = 0, vr = 0, vxr = 0;
  };
  double duration_;
  double width_;
  std::vector<RateWindow> windows_;
  std::vector<std::vector<Counts>> per_receiver_;  // [window][receiver]
};

/// Window-level summary over precomputed windows; throws ConfigError when no
/// window starts at or after the warmup.
RunSummary summarize(const std::vector<RateWindow>& windows, double warmup);

std::string metrics_csv(const std::vector<RateWindow>& windows);
std::string summary_tsv(const std::string& label, const RunSummary& s);

}  // namespace mbdsim
