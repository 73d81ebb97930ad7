#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "gigvad/backbone.hpp"
#include "gigvad/dataset.hpp"
#include "gigvad/errors.hpp"
#include "gigvad/gig.hpp"
#include "gigvad/metrics.hpp"
#include "gigvad/model.hpp"
#include "gigvad/smoothing.hpp"
#include "gigvad/tape.hpp"
#include "gigvad/training.hpp"

namespace gigvad {

struct InferenceConfig {
  std::size_t window = 6;
  std::size_t stride = 3;
  double sigma = 2.0;
  double tau = 0.5;

  void validate() const {
    if (window == 0 || stride == 0) throw ConfigError("window and stride must be positive");
    if (!(sigma > 0.0)) throw ConfigError("sigma must be positive");
  }
};

/// Per-frame scores over the 1+C channels plus the overall anomaly series
/// (max over anomaly channels).
struct FrameScoreSeries {
  Tensor scores;  // (frames, 1+C)
  std::vector<double> overall;

  std::size_t frames() const { return scores.extent(0); }
  std::size_t classes() const { return scores.extent(1) - 1; }

  void refresh_overall() {
    const std::size_t n = frames(), k = scores.extent(1);
    overall.assign(n, 0.0);
    for (std::size_t f = 0; f < n; ++f) {
      overall[f] = *std::max_element(&scores[f * k + 1], &scores[f * k] + k);
    }
  }
};

struct FrameLabels {
  std::vector<std::size_t> class_id;  // 0 = normal

  std::vector<std::uint8_t> binary() const {
    std::vector<std::uint8_t> b(class_id.size());
    for (std::size_t i = 0; i < b.size(); ++i) b[i] = class_id[i] ? 1 : 0;
    return b;
  }
};

inline FrameLabels frame_labels(const VideoSpec& video) {
  FrameLabels l;
  l.class_id.resize(video.frame_count);
  for (std::size_t f = 0; f < video.frame_count; ++f) l.class_id[f] = video.class_at(f);
  return l;
}

/// Start frames of the scoring windows: every `stride` frames while the
/// window fits, plus a final window clamped to the end of the video.
inline std::vector<std::size_t> window_starts(std::size_t frame_count, std::size_t window, std::size_t stride) {
  if (frame_count == 0) throw ConfigError("window_starts: empty video");
  if (frame_count <= window) return {0};
  std::vector<std::size_t> s;
  for (std::size_t start = 0; start + window <= frame_count; start += stride) s.push_back(start);
  if (s.back() + window < frame_count) s.push_back(frame_count - window);
  return s;
}

/// Class probabilities (1+C) of one window scored as a single segment.
inline Tensor score_window(const VideoSpec& video, std::size_t start, const HeadParams& params,
                           const TrainConfig& model, const InferenceConfig& inf, std::uint64_t data_seed) {
  const SegmentClips clips{window_frames(start, inf.window, video.frame_count)};
  const FeatureMaps x = synthetic_backbone(clips, video, model.dims, data_seed, model.signature_offset);
  Tape tape(false);
  const HeadForward f = forward_head(tape, tape.leaf(x.tensor()), put(tape, params),
                                     ForwardOptions{model.resolved_k(), 1, DropoutState{}});
  const Tensor& s = tape.value(f.scores);
  return Tensor(Shape{s.extent(1)}, std::vector<double>(s.data().begin(), s.data().end()));
}

/// Raw frame scores: each frame averages every window that covers it.
inline FrameScoreSeries score_video(const VideoSpec& video, const HeadParams& params, const TrainConfig& model,
                                    const InferenceConfig& inf, std::uint64_t data_seed) {
  inf.validate();
  if (video.frame_count == 0) throw ConfigError("score_video: empty video");
  if (video.labels.classes() != params.classes()) {
    throw DimensionError("video has " + std::to_string(video.labels.classes()) +
                         " classes but the model scores " + std::to_string(params.classes()));
  }
  const std::size_t n = video.frame_count;
  const std::size_t k = params.classes() + 1;
  std::vector<double> sum(n * k, 0.0);
  std::vector<double> cover(n, 0.0);
  for (std::size_t start : window_starts(n, inf.window, inf.stride)) {
    const Tensor s = score_window(video, start, params, model, inf, data_seed);
    const std::size_t end = std::min(n, start + inf.window);
    for (std::size_t f = start; f < end; ++f) {
      cover[f] += 1.0;
      for (std::size_t c = 0; c < k; ++c) sum[f * k + c] += s[c];
    }
  }
  for (std::size_t f = 0; f < n; ++f) {
    for (std::size_t c = 0; c < k; ++c) sum[f * k + c] /= cover[f];
  }
  FrameScoreSeries out{Tensor(Shape{n, k}, std::move(sum)), {}};
  out.refresh_overall();
  return out;
}

/// Gaussian smoothing of every channel; the overall series is recomputed
/// from the smoothed channels.
inline FrameScoreSeries smooth_series(const FrameScoreSeries& in, double sigma) {
  const std::size_t n = in.frames(), k = in.scores.extent(1);
  FrameScoreSeries out{Tensor(in.scores.shape()), {}};
  std::vector<double> column(n);
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t f = 0; f < n; ++f) column[f] = in.scores[f * k + c];
    const auto sm = gaussian_smooth(column, sigma, 0);
    for (std::size_t f = 0; f < n; ++f) out.scores[f * k + c] = sm[f];
  }
  out.refresh_overall();
  return out;
}

/// Frame class: the highest anomaly channel (lowest index on ties) when the
/// overall score reaches `tau`, otherwise 0.
inline std::vector<std::size_t> classify_frames(const FrameScoreSeries& s, double tau = 0.5) {
  const std::size_t n = s.frames(), k = s.scores.extent(1);
  std::vector<std::size_t> pred(n, 0);
  for (std::size_t f = 0; f < n; ++f) {
    if (!(s.overall[f] >= tau)) continue;
    std::size_t best = 1;
    for (std::size_t c = 2; c < k; ++c) {
      if (s.scores[f * k + c] > s.scores[f * k + best]) best = c;
    }
    pred[f] = best;
  }
  return pred;
}

struct MetricsReport {
  double auc = 0.0;
  F1Report f1;
  std::size_t frames = 0;
  std::size_t positive_frames = 0;
};

/// Pools every frame of every video (fixed video order) into one AUC and
/// one set of class-wise F1 scores.
inline MetricsReport evaluate_series(const std::vector<FrameScoreSeries>& series,
                                     const std::vector<VideoSpec>& videos, std::size_t classes, double tau) {
  if (series.size() != videos.size()) throw DimensionError("evaluate: one score series per video required");
  std::vector<double> scores;
  std::vector<std::uint8_t> binary;
  std::vector<std::size_t> pred, truth;
  for (std::size_t v = 0; v < videos.size(); ++v) {
    if (series[v].frames() != videos[v].frame_count) {
      throw DimensionError("video " + std::to_string(videos[v].id) + ": score series has " +
                           std::to_string(series[v].frames()) + " frames, expected " +
                           std::to_string(videos[v].frame_count));
    }
    const FrameLabels labels = frame_labels(videos[v]);
    const auto b = labels.binary();
    const auto p = classify_frames(series[v], tau);
    scores.insert(scores.end(), series[v].overall.begin(), series[v].overall.end());
    binary.insert(binary.end(), b.begin(), b.end());
    pred.insert(pred.end(), p.begin(), p.end());
    truth.insert(truth.end(), labels.class_id.begin(), labels.class_id.end());
  }
  MetricsReport r;
  r.frames = scores.size();
  r.positive_frames = static_cast<std::size_t>(std::count(binary.begin(), binary.end(), 1));
  r.auc = roc_auc(scores, binary);
  r.f1 = f1_metrics(pred, truth, classes);
  return r;
}

/// Scores and smooths every video of `data`, then pools the metrics.
inline MetricsReport evaluate(const DatasetSpec& data, const HeadParams& params, const TrainConfig& model,
                              const InferenceConfig& inf) {
  std::vector<FrameScoreSeries> series;
  series.reserve(data.size());
  for (const auto& v : data.videos) {
    series.push_back(smooth_series(score_video(v, params, model, inf, data.seed), inf.sigma));
  }
  return evaluate_series(series, data.videos, data.classes, inf.tau);
}

}  // namespace gigvad
