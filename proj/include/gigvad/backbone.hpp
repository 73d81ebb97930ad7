#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "gigvad/dataset.hpp"
#include "gigvad/errors.hpp"
#include "gigvad/gig.hpp"
#include "gigvad/rng.hpp"
#include "gigvad/tensor.hpp"

namespace gigvad {

/// Clip start frames, one list per segment.
using SegmentClips = std::vector<std::vector<std::size_t>>;

struct FeatureDims {
  std::size_t w = 4;
  std::size_t h = 4;
  std::size_t d = 32;
};

/// Splits `frame_count` frames into `segments` contiguous parts (remainder
/// frames go to the earliest parts) and draws `clips` starts per part,
/// `interval` frames apart, from a uniformly chosen offset. Parts shorter
/// than the clip span clamp every start to their last frame.
inline SegmentClips sample_segments(std::size_t frame_count, std::size_t segments, std::size_t clips,
                                    std::size_t interval, Rng& rng) {
  if (frame_count == 0) throw ConfigError("sample_segments: frame_count must be positive");
  if (segments == 0 || clips == 0) throw ConfigError("sample_segments: T and clip count must be positive");
  const std::size_t base = frame_count / segments;
  const std::size_t extra = frame_count % segments;
  const std::size_t span = 1 + interval * (clips - 1);
  SegmentClips out(segments);
  std::size_t begin = 0;
  for (std::size_t t = 0; t < segments; ++t) {
    const std::size_t len = base + (t < extra ? 1 : 0);
    auto& starts = out[t];
    starts.reserve(clips);
    if (len == 0) {
      // More segments than frames: reuse the nearest real frame.
      starts.assign(clips, std::min(begin, frame_count - 1));
    } else if (len >= span) {
      const std::size_t offset = rng.below(len - span + 1);
      for (std::size_t c = 0; c < clips; ++c) starts.push_back(begin + offset + c * interval);
    } else {
      const std::size_t last = begin + len - 1;
      for (std::size_t c = 0; c < clips; ++c) starts.push_back(std::min(begin + c * interval, last));
    }
    begin += len;
  }
  return out;
}

/// Frames of one segment clamped into the video; window [start, start+len).
inline std::vector<std::size_t> window_frames(std::size_t start, std::size_t len, std::size_t frame_count) {
  std::vector<std::size_t> f(len);
  for (std::size_t i = 0; i < len; ++i) f[i] = std::min(start + i, frame_count - 1);
  return f;
}

/// Spatial cell carrying the signature of anomaly class `cls` (1-based).
inline std::size_t signature_cell(std::size_t cls, std::size_t classes, std::size_t cells) {
  return ((cls - 1) * cells / classes) % cells;
}

/// Channel range [first, first + width) of class `cls`, wrapping modulo d.
inline std::pair<std::size_t, std::size_t> signature_channels(std::size_t cls, std::size_t classes,
                                                              std::size_t d) {
  const std::size_t width = std::max<std::size_t>(1, d / (classes + 1));
  return {((cls - 1) * width) % d, width};
}

/// Stand-in for a pretrained feature extractor.
///
/// Every (segment, cell, channel) value is standard normal noise seeded by
/// (seed, video id, the segment's clip starts). For each anomaly class
/// active in a fraction f > 0 of a segment's clips, its signature channels
/// at its signature cell receive +offset·f.
inline FeatureMaps synthetic_backbone(const SegmentClips& clips, const VideoSpec& video, const FeatureDims& dims,
                                      std::uint64_t seed, double offset = 3.0) {
  if (dims.w == 0 || dims.h == 0 || dims.d == 0) throw ConfigError("feature dims must be positive");
  if (clips.empty()) throw ConfigError("synthetic_backbone: no segments");
  const std::size_t T = clips.size();
  const std::size_t cells = dims.w * dims.h;
  const std::size_t classes = video.labels.classes();
  Tensor x(Shape{T, dims.w, dims.h, dims.d});
  for (std::size_t t = 0; t < T; ++t) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (std::size_t f : clips[t]) h = (h ^ f) * 0x100000001B3ULL;
    Rng noise = derive_rng(seed, {video.id, h});
    double* seg = x.data().data() + t * cells * dims.d;
    for (std::size_t i = 0; i < cells * dims.d; ++i) seg[i] = noise.normal();

    if (clips[t].empty()) continue;
    for (std::size_t cls = 1; cls <= classes; ++cls) {
      std::size_t hits = 0;
      for (std::size_t f : clips[t]) hits += video.active(cls, f) ? 1 : 0;
      if (hits == 0) continue;
      const double bump = offset * static_cast<double>(hits) / static_cast<double>(clips[t].size());
      const std::size_t cell = signature_cell(cls, classes, cells);
      const auto [first, width] = signature_channels(cls, classes, dims.d);
      for (std::size_t c = 0; c < width; ++c) seg[cell * dims.d + (first + c) % dims.d] += bump;
    }
  }
  return FeatureMaps(std::move(x));
}

/// With probability `prob`, reverses the w axis.
inline FeatureMaps hflip_augment(FeatureMaps x, double prob, Rng& rng) {
  if (!rng.bernoulli(prob)) return x;
  Tensor& t = x.tensor();
  const std::size_t T = t.extent(0), w = t.extent(1), h = t.extent(2), d = t.extent(3);
  Tensor flipped(t.shape());
  for (std::size_t s = 0; s < T; ++s) {
    for (std::size_t i = 0; i < w; ++i) {
      for (std::size_t j = 0; j < h; ++j) {
        const double* src = &t[((s * w + (w - 1 - i)) * h + j) * d];
        double* dst = &flipped[((s * w + i) * h + j) * d];
        std::copy(src, src + d, dst);
      }
    }
  }
  return FeatureMaps(std::move(flipped), x.enhanced());
}

}  // namespace gigvad
