#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "gigvad/adagrad.hpp"
#include "gigvad/backbone.hpp"
#include "gigvad/dataset.hpp"
#include "gigvad/dropout.hpp"
#include "gigvad/errors.hpp"
#include "gigvad/gig.hpp"
#include "gigvad/model.hpp"
#include "gigvad/objectives.hpp"
#include "gigvad/rng.hpp"
#include "gigvad/spatial.hpp"
#include "gigvad/tape.hpp"

namespace gigvad {

struct TrainConfig {
  std::size_t segments = 8;           // T
  std::size_t clips_per_segment = 6;
  std::size_t clip_interval = 5;      // frames between sampled clips
  std::size_t batch_size = 8;
  double lr = 0.001;
  double adagrad_eps = 1e-10;
  std::size_t epochs = 100;
  double dropout = 0.5;
  double flip_prob = 0.5;
  std::size_t k = 0;                  // 0 selects default_k(w, h)
  std::size_t p = 0;                  // 0 selects default_p(T)
  LossWeights lambdas;
  FeatureDims dims;
  double signature_offset = 3.0;
  std::uint64_t seed = 7;

  std::size_t resolved_k() const { return k ? k : default_k(dims.w, dims.h); }
  std::size_t resolved_p() const { return p ? p : default_p(segments); }

  void validate() const {
    if (segments == 0 || clips_per_segment == 0 || batch_size == 0) {
      throw ConfigError("T, clips_per_segment, and batch_size must be positive");
    }
    if (dims.w == 0 || dims.h == 0 || dims.d == 0) throw ConfigError("feature dims must be positive");
    if (!(lr > 0.0)) throw ConfigError("learning rate must be positive");
    check_dropout_rate(dropout);
    if (!(flip_prob >= 0.0 && flip_prob <= 1.0)) throw ConfigError("flip_prob outside [0, 1]");
    if (resolved_k() > dims.w * dims.h) throw ConfigError("k exceeds w*h");
    if (resolved_p() > segments) throw ConfigError("p exceeds T");
    lambdas.validate();
  }
};

struct TrainResult {
  HeadParams params;
  std::vector<LossBreakdown> epochs;  // per-epoch means over all videos
};

namespace detail {

// Tags of the independent random streams used during training.
inline constexpr std::uint64_t kInitStream = 1;
inline constexpr std::uint64_t kShuffleStream = 2;
inline constexpr std::uint64_t kVideoStream = 3;

inline void add_into(LossBreakdown& acc, const LossBreakdown& b) {
  acc.l_s += b.l_s;
  acc.l_s_star += b.l_s_star;
  acc.l_g_star += b.l_g_star;
  acc.l_sparse += b.l_sparse;
  acc.l_vs += b.l_vs;
  acc.total += b.total;
}

}  // namespace detail

/// Forward and backward pass for one training video. Adds d(total)/dθ into
/// `grads` (order of HeadParams::tensors()) and returns the loss terms.
inline LossBreakdown accumulate_video_gradient(const HeadParams& params, const VideoSpec& video,
                                               const DatasetSpec& data, const TrainConfig& cfg,
                                               std::size_t epoch, std::vector<Tensor>& grads) {
  Rng rng = derive_rng(cfg.seed, {detail::kVideoStream, epoch, video.id});
  const auto clips =
      sample_segments(video.frame_count, cfg.segments, cfg.clips_per_segment, cfg.clip_interval, rng);
  FeatureMaps x = synthetic_backbone(clips, video, cfg.dims, data.seed, cfg.signature_offset);
  x = hflip_augment(std::move(x), cfg.flip_prob, rng);

  Tape tape;
  const Var features = tape.leaf(x.tensor());
  const HeadVars heads = put(tape, params);
  ForwardOptions opt{cfg.resolved_k(), cfg.resolved_p(), DropoutState{cfg.dropout, Mode::train, &rng}};
  LossVars losses{};
  try {
    losses = forward_losses(tape, forward_head(tape, features, heads, opt), video.labels, cfg.lambdas);
  } catch (const NumericError& e) {
    throw NumericError("video " + std::to_string(video.id) + ": " + e.what());
  }
  const LossBreakdown b = read_losses(tape, losses, cfg.lambdas);
  const std::pair<const char*, double> parts[] = {
      {"l_s", b.l_s}, {"l_s_star", b.l_s_star}, {"l_g_star", b.l_g_star}, {"l_sparse", b.l_sparse}, {"total", b.total}};
  for (const auto& [name, v] : parts) {
    if (!std::isfinite(v)) {
      throw NumericError("video " + std::to_string(video.id) + ": non-finite loss component " + name);
    }
  }
  tape.backward(losses.total);
  const Var leaves[] = {heads.phi1.weight, heads.phi1.bias, heads.phi2.weight, heads.phi2.bias};
  for (std::size_t i = 0; i < 4; ++i) {
    const Tensor g = tape.grad(leaves[i]);
    auto dst = grads[i].data();
    for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += g[j];
  }
  return b;
}

/// Mini-batch Adagrad over shuffled videos. Each batch step uses the mean
/// gradient of its videos; videos within a batch are processed in index
/// order, so results depend only on `cfg.seed`.
inline TrainResult train(const DatasetSpec& data, const TrainConfig& cfg) {
  cfg.validate();
  data.validate();
  if (data.videos.empty()) throw ConfigError("training set is empty");
  std::size_t anomalous = 0;
  for (const auto& v : data.videos) anomalous += static_cast<std::size_t>(v.labels.any());
  if (anomalous == 0 || anomalous == data.size()) {
    throw ConfigError("training set needs at least one normal and one anomalous video");
  }

  Rng init = derive_rng(cfg.seed, {detail::kInitStream});
  TrainResult result{HeadParams::init(data.classes, cfg.dims.d, init), {}};
  HeadParams& params = result.params;
  const Adagrad opt{cfg.lr, cfg.adagrad_eps};

  std::vector<std::size_t> order(data.size());
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffle = derive_rng(cfg.seed, {detail::kShuffleStream, epoch});
    shuffle.shuffle(order.begin(), order.end());

    LossBreakdown sum{};
    sum.lambdas = cfg.lambdas;
    for (std::size_t first = 0; first < order.size(); first += cfg.batch_size) {
      const std::size_t last = std::min(order.size(), first + cfg.batch_size);
      std::vector<Tensor> grads;
      for (const Tensor* t : std::as_const(params).tensors()) grads.push_back(Tensor::zeros_like(*t));
      for (std::size_t i = first; i < last; ++i) {
        detail::add_into(sum, accumulate_video_gradient(params, data.videos[order[i]], data, cfg, epoch, grads));
      }
      const double inv = 1.0 / static_cast<double>(last - first);
      for (Tensor& g : grads) {
        for (double& v : g.data()) v *= inv;
      }
      const auto tensors = params.tensors();
      opt.step(tensors, params.accumulators, grads);
    }
    const double n = static_cast<double>(data.size());
    LossBreakdown mean = sum;
    mean.l_s /= n;
    mean.l_s_star /= n;
    mean.l_g_star /= n;
    mean.l_sparse /= n;
    mean.l_vs /= n;
    mean.total /= n;
    result.epochs.push_back(mean);
  }
  return result;
}

}  // namespace gigvad
