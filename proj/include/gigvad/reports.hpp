#pragma once

#include <cstddef>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "gigvad/errors.hpp"
#include "gigvad/inference.hpp"
#include "gigvad/io.hpp"
#include "gigvad/objectives.hpp"

// Text outputs: per-epoch loss log, per-frame score files, metrics report.
// Numbers use the shortest round-trip decimal form.
namespace gigvad {

struct LossLogEntry {
  std::size_t epoch = 0;  // 1-based
  LossBreakdown losses;
};

inline constexpr std::string_view kLossLogHeader = "# epoch\tl_s\tl_s_star\tl_g_star\tl_sparse\ttotal";

inline std::string loss_log_to_text(const std::vector<LossBreakdown>& epochs) {
  std::ostringstream os;
  os << kLossLogHeader << '\n';
  for (std::size_t e = 0; e < epochs.size(); ++e) {
    const auto& l = epochs[e];
    os << e + 1 << '\t' << io::format_double(l.l_s) << '\t' << io::format_double(l.l_s_star) << '\t'
       << io::format_double(l.l_g_star) << '\t' << io::format_double(l.l_sparse) << '\t'
       << io::format_double(l.total) << '\n';
  }
  return os.str();
}

inline std::vector<LossLogEntry> parse_loss_log(std::string_view text) {
  std::vector<LossLogEntry> out;
  std::size_t line_no = 0;
  for (auto raw : io::split(text, '\n')) {
    ++line_no;
    const auto line = io::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto f = io::split(line, '\t');
    LossLogEntry e;
    std::uint64_t epoch;
    if (f.size() != 6 || !io::parse_u64(f[0], epoch) || !io::parse_double(f[1], e.losses.l_s) ||
        !io::parse_double(f[2], e.losses.l_s_star) || !io::parse_double(f[3], e.losses.l_g_star) ||
        !io::parse_double(f[4], e.losses.l_sparse) || !io::parse_double(f[5], e.losses.total)) {
      throw IoError("loss log line " + std::to_string(line_no) + ": malformed");
    }
    if (!out.empty() && epoch <= out.back().epoch) {
      throw IoError("loss log line " + std::to_string(line_no) + ": epochs not increasing");
    }
    e.epoch = epoch;
    out.push_back(e);
  }
  return out;
}

/// One line per frame: index, overall score, then the 1+C channel scores.
inline std::string scores_to_text(const FrameScoreSeries& s) {
  std::ostringstream os;
  const std::size_t k = s.scores.extent(1);
  for (std::size_t f = 0; f < s.frames(); ++f) {
    os << f << '\t' << io::format_double(s.overall[f]);
    for (std::size_t c = 0; c < k; ++c) os << '\t' << io::format_double(s.scores[f * k + c]);
    os << '\n';
  }
  return os.str();
}

inline FrameScoreSeries parse_scores(std::string_view text, const std::string& origin = "<scores>") {
  std::vector<double> values;
  std::vector<double> overall;
  std::size_t width = 0, frames = 0, line_no = 0;
  for (auto raw : io::split(text, '\n')) {
    ++line_no;
    const auto line = io::trim(raw);
    if (line.empty()) continue;
    const auto f = io::split(line, '\t');
    const auto fail = [&] { return IoError(origin + ":" + std::to_string(line_no) + ": malformed score line"); };
    if (f.size() < 4) throw fail();
    if (width == 0) width = f.size() - 2;
    std::uint64_t idx;
    double o;
    if (f.size() - 2 != width || !io::parse_u64(f[0], idx) || idx != frames || !io::parse_double(f[1], o)) {
      throw fail();
    }
    overall.push_back(o);
    for (std::size_t c = 0; c < width; ++c) {
      double v;
      if (!io::parse_double(f[2 + c], v)) throw fail();
      values.push_back(v);
    }
    ++frames;
  }
  if (frames == 0) throw IoError(origin + ": empty score file");
  FrameScoreSeries s{Tensor(Shape{frames, width}, std::move(values)), std::move(overall)};
  return s;
}

inline std::string metrics_to_text(const MetricsReport& m) {
  std::ostringstream os;
  os << "frames = " << m.frames << '\n'
     << "positive_frames = " << m.positive_frames << '\n'
     << "auc = " << io::format_double(m.auc) << '\n';
  for (std::size_t c = 0; c < m.f1.per_class.size(); ++c) {
    os << "f1_class_" << c + 1 << " = " << io::format_double(m.f1.per_class[c]) << '\n';
  }
  os << "mf1 = " << io::format_double(m.f1.mf1) << '\n';
  return os.str();
}

}  // namespace gigvad
