#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "gigvad/dataset.hpp"
#include "gigvad/errors.hpp"
#include "gigvad/io.hpp"

// Dataset text file:
//
//   gigvad-dataset 1
//   N = <videos>
//   C = <classes>
//   seed = <feature seed>
//   <id> \t <frame_count> \t <label bits, class 1 first> \t <spans>
//
// Spans are `class:start-end` (inclusive frames) joined by commas, or `-`.
// Features are not stored; they are regenerated from the seed.
namespace gigvad {

inline constexpr std::string_view kDatasetMagic = "gigvad-dataset 1";

inline std::string dataset_to_text(const DatasetSpec& ds) {
  std::ostringstream os;
  os << kDatasetMagic << '\n'
     << "N = " << ds.size() << '\n'
     << "C = " << ds.classes << '\n'
     << "seed = " << ds.seed << '\n';
  for (const auto& v : ds.videos) {
    os << v.id << '\t' << v.frame_count << '\t';
    for (auto bit : v.labels.multi_hot()) os << (bit ? '1' : '0');
    os << '\t';
    if (v.spans.empty()) os << '-';
    for (std::size_t i = 0; i < v.spans.size(); ++i) {
      if (i) os << ',';
      os << v.spans[i].cls << ':' << v.spans[i].start << '-' << v.spans[i].end;
    }
    os << '\n';
  }
  return os.str();
}

inline DatasetSpec parse_dataset(std::string_view text, const std::string& origin = "<dataset>") {
  auto lines = io::split(text, '\n');
  while (!lines.empty() && io::trim(lines.back()).empty()) lines.pop_back();
  auto fail = [&](std::size_t line, const std::string& what) {
    return IoError(origin + ":" + std::to_string(line + 1) + ": " + what);
  };
  if (lines.size() < 4 || io::trim(lines[0]) != kDatasetMagic) throw fail(0, "not a gigvad dataset file");

  auto header = [&](std::size_t line, std::string_view key) {
    const auto parts = io::split(lines[line], '=');
    std::uint64_t v;
    if (parts.size() != 2 || io::trim(parts[0]) != key || !io::parse_u64(io::trim(parts[1]), v)) {
      throw fail(line, "expected '" + std::string(key) + " = <integer>'");
    }
    return v;
  };
  const std::uint64_t n = header(1, "N");
  DatasetSpec ds;
  ds.classes = header(2, "C");
  ds.seed = header(3, "seed");
  if (lines.size() - 4 != n) {
    throw fail(1, "header declares " + std::to_string(n) + " videos but " + std::to_string(lines.size() - 4) +
                      " follow");
  }
  for (std::size_t i = 4; i < lines.size(); ++i) {
    const auto f = io::split(io::trim(lines[i]), '\t');
    if (f.size() != 4) throw fail(i, "expected 4 tab-separated fields");
    VideoSpec v;
    std::uint64_t frames;
    if (!io::parse_u64(f[0], v.id) || !io::parse_u64(f[1], frames)) throw fail(i, "bad id or frame count");
    v.frame_count = frames;
    if (f[2].size() != ds.classes) throw fail(i, "label bits must have one digit per class");
    std::vector<std::uint8_t> bits;
    for (char c : f[2]) {
      if (c != '0' && c != '1') throw fail(i, "label bits must be 0 or 1");
      bits.push_back(c == '1');
    }
    v.labels = VideoLabels(std::move(bits));
    if (f[3] != "-") {
      for (auto s : io::split(f[3], ',')) {
        const auto colon = s.find(':');
        const auto dash = s.find('-', colon == std::string_view::npos ? 0 : colon);
        std::uint64_t cls, start, end;
        if (colon == std::string_view::npos || dash == std::string_view::npos ||
            !io::parse_u64(s.substr(0, colon), cls) || !io::parse_u64(s.substr(colon + 1, dash - colon - 1), start) ||
            !io::parse_u64(s.substr(dash + 1), end)) {
          throw fail(i, "bad span '" + std::string(s) + "'");
        }
        v.spans.push_back({cls, start, end});
      }
    }
    ds.videos.push_back(std::move(v));
  }
  try {
    ds.validate();
  } catch (const ConfigError& e) {
    throw IoError(origin + ": " + e.what());
  }
  return ds;
}

inline void save_dataset(const std::filesystem::path& path, const DatasetSpec& ds) {
  io::write_file_atomic(path, dataset_to_text(ds));
}

inline DatasetSpec load_dataset(const std::filesystem::path& path) {
  return parse_dataset(io::read_file(path), path.string());
}

}  // namespace gigvad
