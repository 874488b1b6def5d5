#include "mbdsim/metrics.hpp"

#include <charconv>
#include <cmath>

#include "mbdsim/errors.hpp"

namespace mbdsim {

namespace {
void append_double(std::string& out, double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, ptr);
}
}  // namespace

WindowRates rates(const RateWindow& w) {
  WindowRates r;
  if (w.attack_received > 0) {
    r.tp = 100.0 * static_cast<double>(w.attack_rejected) / static_cast<double>(w.attack_received);
  }
  if (w.valid_received > 0) {
    r.fp = 100.0 * static_cast<double>(w.valid_rejected) / static_cast<double>(w.valid_received);
  }
  return r;
}

MetricsAccumulator::MetricsAccumulator(double duration, double width, std::size_t receiver_hint)
    : duration_(duration), width_(width) {
  const auto n = static_cast<std::size_t>(std::ceil(duration / width - 1e-12));
  windows_.resize(n);
  per_receiver_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    windows_[i].window_start = static_cast<double>(i) * width;
    windows_[i].width = width;
    per_receiver_[i].resize(receiver_hint);
  }
}

void MetricsAccumulator::record(std::uint32_t receiver, bool rejected,
                                bool ground_truth_falsified, double rx_time) {
  if (rx_time < 0.0 || rx_time >= duration_) {
    throw InvalidInputError("metrics: rx_time outside run duration");
  }
  const auto idx = static_cast<std::size_t>(rx_time / width_);
  RateWindow& w = windows_[idx];
  if (ground_truth_falsified) {
    ++w.attack_received;
    if (rejected) ++w.attack_rejected;
  } else {
    ++w.valid_received;
    if (rejected) ++w.valid_rejected;
  }
  auto& per = per_receiver_[idx];
  if (receiver >= per.size()) per.resize(receiver + 1);
  Counts& c = per[receiver];
  if (ground_truth_falsified) {
    ++c.ar;
    if (rejected) ++c.axr;
  } else {
    ++c.vr;
    if (rejected) ++c.vxr;
  }
}

std::uint64_t MetricsAccumulator::total_received() const {
  std::uint64_t n = 0;
  for (const auto& w : windows_) n += w.attack_received + w.valid_received;
  return n;
}

RunSummary summarize(const std::vector<RateWindow>& windows, double warmup) {
  RunSummary s;
  s.warmup = warmup;
  double tp_sum = 0.0, fp_sum = 0.0;
  std::size_t tp_n = 0, fp_n = 0;
  bool any_steady = false;
  for (const auto& w : windows) {
    if (w.window_start < warmup) continue;
    any_steady = true;
    ++s.steady_windows;
    const WindowRates r = rates(w);
    if (r.tp) {
      tp_sum += *r.tp;
      if (tp_n == 0 || *r.tp < s.tp_worst) s.tp_worst = *r.tp;
      ++tp_n;
    }
    if (r.fp) {
      fp_sum += *r.fp;
      if (fp_n == 0 || *r.fp < s.fp_best) s.fp_best = *r.fp;
      ++fp_n;
    }
  }
  if (!any_steady) {
    throw ConfigError("summarize: no steady-state windows; the run must extend beyond the " +
                      std::to_string(warmup) + " s warmup");
  }
  if (tp_n > 0) s.tp_avg = tp_sum / static_cast<double>(tp_n);
  if (fp_n > 0) s.fp_avg = fp_sum / static_cast<double>(fp_n);
  return s;
}

RunSummary MetricsAccumulator::summarize(double warmup) const {
  RunSummary s = mbdsim::summarize(windows_, warmup);
  // Receiver-averaged rates over the steady-state period.
  std::vector<Counts> totals;
  for (std::size_t i = 0; i < windows_.size(); ++i) {
    if (windows_[i].window_start < warmup) continue;
    if (per_receiver_[i].size() > totals.size()) totals.resize(per_receiver_[i].size());
    for (std::size_t r = 0; r < per_receiver_[i].size(); ++r) {
      totals[r].ar += per_receiver_[i][r].ar;
      totals[r].axr += per_receiver_[i][r].axr;
      totals[r].vr += per_receiver_[i][r].vr;
      totals[r].vxr += per_receiver_[i][r].vxr;
    }
  }
  double tp_sum = 0.0, fp_sum = 0.0;
  std::size_t tp_n = 0, fp_n = 0;
  for (const Counts& c : totals) {
    if (c.ar > 0) {
      tp_sum += 100.0 * static_cast<double>(c.axr) / static_cast<double>(c.ar);
      ++tp_n;
    }
    if (c.vr > 0) {
      fp_sum += 100.0 * static_cast<double>(c.vxr) / static_cast<double>(c.vr);
      ++fp_n;
    }
  }
  if (tp_n > 0) s.tp_receiver_avg = tp_sum / static_cast<double>(tp_n);
  if (fp_n > 0) s.fp_receiver_avg = fp_sum / static_cast<double>(fp_n);
  return s;
}

std::string metrics_csv(const std::vector<RateWindow>& windows) {
  std::string out = "window_start,tp_pct,fp_pct,attack_received,attack_rejected,valid_received,"
                    "valid_rejected\n";
  for (const auto& w : windows) {
    const WindowRates r = rates(w);
    append_double(out, w.window_start);
    out += ',';
    if (r.tp) append_double(out, *r.tp);
    out += ',';
    if (r.fp) append_double(out, *r.fp);
    out += ',';
    out += std::to_string(w.attack_received);
    out += ',';
    out += std::to_string(w.attack_rejected);
    out += ',';
    out += std::to_string(w.valid_received);
    out += ',';
    out += std::to_string(w.valid_rejected);
    out += '\n';
  }
  return out;
}

std::string summary_tsv(const std::string& label, const RunSummary& s) {
  std::string out;
  out += label;
  out += '\t';
  append_double(out, s.tp_avg);
  out += '\t';
  append_double(out, s.tp_worst);
  out += '\t';
  append_double(out, s.fp_avg);
  out += '\t';
  append_double(out, s.fp_best);
  out += '\n';
  return out;
}

}  // namespace mbdsim
