#include "audit_replay.hpp"

#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <stdexcept>

namespace audit_replay {

namespace {

// Minimal field access for the fixed audit schema. Values are either numbers,
// bare true/false, or quoted tokens without escapes.
std::string_view field_value(std::string_view line, const char* key) {
  const std::string pattern = std::string("\"") + key + "\":";
  const auto pos = line.find(pattern);
  if (pos == std::string_view::npos) {
    throw std::runtime_error("audit replay: missing field '" + std::string(key) + "'");
  }
  std::size_t begin = pos + pattern.size();
  std::size_t end = begin;
  if (begin < line.size() && line[begin] == '"') {
    ++begin;
    end = line.find('"', begin);
  } else {
    while (end < line.size() && line[end] != ',' && line[end] != '}') ++end;
  }
  if (end == std::string_view::npos || end > line.size()) {
    throw std::runtime_error("audit replay: unterminated field '" + std::string(key) + "'");
  }
  return line.substr(begin, end - begin);
}

double number(std::string_view v, const char* key) {
  double out = 0.0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size()) {
    throw std::runtime_error("audit replay: field '" + std::string(key) + "' is not a number");
  }
  return out;
}

}  // namespace

Summary replay(std::istream& in, double duration, double warmup, double width) {
  Summary s;
  const auto n_windows = static_cast<std::size_t>(std::ceil(duration / width - 1e-12));
  s.windows.resize(n_windows);
  for (std::size_t i = 0; i < n_windows; ++i) s.windows[i].start = static_cast<double>(i) * width;

  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::string_view lv = line;
    const double rx_time = number(field_value(lv, "rx_time"), "rx_time");
    if (rx_time < 0.0 || rx_time >= duration) {
      throw std::runtime_error("audit replay: rx_time outside run duration");
    }
    const std::string_view msg_type = field_value(lv, "msg_type");
    if (msg_type == "cpm") {
      ++s.cpm_verdicts;
      continue;  // CPM sender verdicts stay out of the TP/FP rates
    }
    if (msg_type != "cam") throw std::runtime_error("audit replay: unknown msg_type");
    ++s.cam_verdicts;
    const bool rejected = field_value(lv, "decision") == "reject";
    const std::string_view fals = field_value(lv, "falsified");
    if (fals != "true" && fals != "false") {
      throw std::runtime_error("audit replay: bad falsified flag");
    }
    Window& w = s.windows[static_cast<std::size_t>(rx_time / width)];
    if (fals == "true") {
      ++w.attack_received;
      if (rejected) ++w.attack_rejected;
    } else {
      ++w.valid_received;
      if (rejected) ++w.valid_rejected;
    }
  }

  double tp_sum = 0.0, fp_sum = 0.0;
  std::size_t tp_n = 0, fp_n = 0;
  for (const Window& w : s.windows) {
    if (w.start < warmup) continue;
    ++s.steady_windows;
    if (w.attack_received > 0) {
      const double tp =
          100.0 * static_cast<double>(w.attack_rejected) / static_cast<double>(w.attack_received);
      tp_sum += tp;
      if (tp_n == 0 || tp < s.tp_worst) s.tp_worst = tp;
      ++tp_n;
    }
    if (w.valid_received > 0) {
      const double fp =
          100.0 * static_cast<double>(w.valid_rejected) / static_cast<double>(w.valid_received);
      fp_sum += fp;
      if (fp_n == 0 || fp < s.fp_best) s.fp_best = fp;
      ++fp_n;
    }
  }
  if (tp_n > 0) s.tp_avg = tp_sum / static_cast<double>(tp_n);
  if (fp_n > 0) s.fp_avg = fp_sum / static_cast<double>(fp_n);
  return s;
}

Summary replay_file(const std::string& path, double duration, double warmup, double width) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("audit replay: cannot open " + path);
  return replay(in, duration, warmup, width);
}

}  // namespace audit_replay
