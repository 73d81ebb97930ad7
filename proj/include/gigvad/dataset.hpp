#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "gigvad/errors.hpp"
#include "gigvad/gig.hpp"
#include "gigvad/rng.hpp"

namespace gigvad {

/// Frames [start, end] (inclusive) carrying anomaly class `cls` ∈ [1, C].
struct AnomalySpan {
  std::size_t cls = 0;
  std::size_t start = 0;
  std::size_t end = 0;

  bool contains(std::size_t frame) const noexcept { return frame >= start && frame <= end; }
  friend bool operator==(const AnomalySpan&, const AnomalySpan&) = default;
};

struct VideoSpec {
  std::uint64_t id = 0;
  std::size_t frame_count = 0;
  VideoLabels labels;
  std::vector<AnomalySpan> spans;

  /// Ground-truth class of a frame: the first span covering it, else 0.
  std::size_t class_at(std::size_t frame) const noexcept {
    for (const auto& s : spans) {
      if (s.contains(frame)) return s.cls;
    }
    return 0;
  }
  bool active(std::size_t cls, std::size_t frame) const noexcept {
    for (const auto& s : spans) {
      if (s.cls == cls && s.contains(frame)) return true;
    }
    return false;
  }

  friend bool operator==(const VideoSpec&, const VideoSpec&) = default;
};

struct DatasetSpec {
  std::size_t classes = 0;
  std::uint64_t seed = 0;
  std::vector<VideoSpec> videos;

  std::size_t size() const noexcept { return videos.size(); }

  /// Throws ConfigError on any violated invariant.
  void validate() const {
    if (classes == 0) throw ConfigError("dataset class count C must be at least 1");
    for (const auto& v : videos) {
      const std::string where = "video " + std::to_string(v.id) + ": ";
      if (v.frame_count == 0) throw ConfigError(where + "frame_count must be positive");
      if (v.labels.classes() != classes) throw ConfigError(where + "label width differs from C");
      std::vector<std::uint8_t> seen(classes, 0);
      for (const auto& s : v.spans) {
        if (s.cls < 1 || s.cls > classes) throw ConfigError(where + "span class out of range");
        if (s.start > s.end || s.end >= v.frame_count) {
          throw ConfigError(where + "span outside [0, frame_count)");
        }
        seen[s.cls - 1] = 1;
      }
      if (seen != v.labels.multi_hot()) {
        throw ConfigError(where + "labels disagree with anomaly spans");
      }
    }
  }
};

enum class Split { train, test };

/// Parameters of the synthetic dataset generator.
struct GeneratorSpec {
  std::size_t videos = 200;
  std::size_t normal = 80;
  std::size_t classes = 3;
  std::uint64_t seed = 7;
  Split split = Split::train;
};

/// Video ids of the test split start here so their feature noise never
/// coincides with training videos generated from the same seed.
inline constexpr std::uint64_t kTestIdBase = 1'000'000;

/// Synthetic video list.
///
/// Training videos are trimmed: 120-360 frames, anomalous ones carry one
/// class over 50-100% of the video, or (20% of the time, C >= 2) two
/// disjoint classes over separate halves. Test videos are untrimmed:
/// 240-480 frames with a single anomaly span covering 15-40% of the video.
/// Normal and anomalous videos are interleaved deterministically.
inline DatasetSpec generate_dataset(const GeneratorSpec& g) {
  if (g.classes == 0) throw ConfigError("generator needs C >= 1");
  if (g.normal > g.videos) throw ConfigError("normal video count exceeds total");
  Rng rng = derive_rng(g.seed, {g.split == Split::train ? 0x7261696eULL : 0x74657374ULL});
  DatasetSpec ds;
  ds.classes = g.classes;
  ds.seed = g.seed;

  std::vector<std::uint8_t> is_normal(g.videos, 0);
  std::fill(is_normal.begin(), is_normal.begin() + static_cast<std::ptrdiff_t>(g.normal), 1);
  rng.shuffle(is_normal.begin(), is_normal.end());

  const std::uint64_t id_base = g.split == Split::train ? 0 : kTestIdBase;
  for (std::size_t i = 0; i < g.videos; ++i) {
    VideoSpec v;
    v.id = id_base + i;
    v.frame_count = g.split == Split::train ? 120 + rng.below(241) : 240 + rng.below(241);
    std::vector<std::uint8_t> y(g.classes, 0);
    if (!is_normal[i]) {
      const std::size_t fc = v.frame_count;
      if (g.split == Split::test) {
        const auto len = static_cast<std::size_t>(fc * rng.uniform(0.15, 0.40));
        const std::size_t start = rng.below(fc - len + 1);
        const std::size_t cls = 1 + rng.below(g.classes);
        v.spans.push_back({cls, start, start + len - 1});
      } else if (g.classes >= 2 && rng.bernoulli(0.2)) {
        const std::size_t a = 1 + rng.below(g.classes);
        std::size_t b = 1 + rng.below(g.classes - 1);
        if (b >= a) ++b;
        const std::size_t half = fc / 2;
        v.spans.push_back({a, 0, half - 1});
        v.spans.push_back({b, half, fc - 1});
      } else {
        const auto len = std::max<std::size_t>(1, static_cast<std::size_t>(fc * rng.uniform(0.5, 1.0)));
        const std::size_t start = rng.below(fc - len + 1);
        v.spans.push_back({1 + rng.below(g.classes), start, start + len - 1});
      }
      for (const auto& s : v.spans) y[s.cls - 1] = 1;
    }
    v.labels = VideoLabels(std::move(y));
    ds.videos.push_back(std::move(v));
  }
  return ds;
}

}  // namespace gigvad
