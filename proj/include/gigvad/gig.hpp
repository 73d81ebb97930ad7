#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "gigvad/errors.hpp"
#include "gigvad/ops.hpp"
#include "gigvad/rng.hpp"
#include "gigvad/tape.hpp"
#include "gigvad/tensor.hpp"

// Global pattern cue, channel attention, and video-level supervision.
namespace gigvad {

/// Spatio-temporal feature block with extents (T, w, h, d).
class FeatureMaps {
 public:
  explicit FeatureMaps(Tensor x, bool enhanced = false) : x_(std::move(x)), enhanced_(enhanced) {
    if (x_.rank() != 4) {
      throw DimensionError("feature maps must have extents (T, w, h, d), got " +
                           shape_string(x_.shape()));
    }
  }

  const Tensor& tensor() const noexcept { return x_; }
  Tensor& tensor() noexcept { return x_; }
  bool enhanced() const noexcept { return enhanced_; }

  std::size_t segments() const { return x_.extent(0); }
  std::size_t rows() const { return x_.extent(1); }
  std::size_t cols() const { return x_.extent(2); }
  std::size_t channels() const { return x_.extent(3); }

 private:
  Tensor x_;
  bool enhanced_;
};

/// Per-channel maximum of a feature block, extent (d).
struct GpcVector {
  Tensor g;
};

/// Multi-hot video label over C anomaly classes.
class VideoLabels {
 public:
  VideoLabels() = default;
  explicit VideoLabels(std::vector<std::uint8_t> multi_hot) : y_(std::move(multi_hot)) {
    for (auto v : y_) {
      if (v > 1) throw ConfigError("multi-hot label components must be 0 or 1");
    }
  }
  static VideoLabels normal(std::size_t classes) {
    return VideoLabels(std::vector<std::uint8_t>(classes, 0));
  }

  std::size_t classes() const noexcept { return y_.size(); }
  const std::vector<std::uint8_t>& multi_hot() const noexcept { return y_; }
  bool has(std::size_t anomaly_class) const { return y_.at(anomaly_class - 1) != 0; }
  /// Number of distinct anomaly classes present.
  std::size_t count() const noexcept {
    std::size_t n = 0;
    for (auto v : y_) n += v;
    return n;
  }
  /// 1 when any anomaly class is present.
  int any() const noexcept { return count() > 0 ? 1 : 0; }

  /// Target over the 1+C head channels: normal channel 1 - y*, then y.
  Tensor extended_target() const {
    Tensor t(Shape{1 + y_.size()});
    t[0] = 1.0 - any();
    for (std::size_t c = 0; c < y_.size(); ++c) t[1 + c] = y_[c];
    return t;
  }

  friend bool operator==(const VideoLabels&, const VideoLabels&) = default;

 private:
  std::vector<std::uint8_t> y_;
};

/// Fully connected map d -> 1+C. Channel 0 is the normal class.
struct Affine {
  Tensor weight;  // (1+C, d)
  Tensor bias;    // (1+C)

  std::size_t outputs() const { return weight.extent(0); }
  std::size_t inputs() const { return weight.extent(1); }
};

/// Both classification heads plus their Adagrad accumulators.
struct HeadParams {
  Affine phi1;  // on the global pattern cue
  Affine phi2;  // on segment pattern vectors
  std::vector<Tensor> accumulators;

  std::size_t classes() const { return phi1.outputs() - 1; }
  std::size_t channels() const { return phi1.inputs(); }

  /// Weights uniform in [-1/sqrt(d), 1/sqrt(d)], biases zero, accumulators zero.
  static HeadParams init(std::size_t classes, std::size_t channels, Rng& rng) {
    if (classes == 0) throw ConfigError("class count C must be at least 1");
    if (channels == 0) throw ConfigError("channel count d must be at least 1");
    const double bound = 1.0 / std::sqrt(static_cast<double>(channels));
    auto make = [&] {
      Tensor w(Shape{1 + classes, channels});
      for (double& v : w.data()) v = rng.uniform(-bound, bound);
      return Affine{std::move(w), Tensor(Shape{1 + classes})};
    };
    HeadParams p;
    p.phi1 = make();
    p.phi2 = make();
    p.reset_accumulators();
    return p;
  }

  void reset_accumulators() {
    accumulators = {Tensor::zeros_like(phi1.weight), Tensor::zeros_like(phi1.bias),
                    Tensor::zeros_like(phi2.weight), Tensor::zeros_like(phi2.bias)};
  }

  /// Parameters in fixed order: phi1.W, phi1.b, phi2.W, phi2.b.
  std::vector<Tensor*> tensors() { return {&phi1.weight, &phi1.bias, &phi2.weight, &phi2.bias}; }
  std::vector<const Tensor*> tensors() const {
    return {&phi1.weight, &phi1.bias, &phi2.weight, &phi2.bias};
  }
};

/// Leaf handles of one affine head on a tape.
struct AffineVars {
  Var weight;
  Var bias;
};

inline AffineVars put(Tape& tape, const Affine& a) {
  return {tape.leaf(a.weight), tape.leaf(a.bias)};
}

// -- tape-level operations --------------------------------------------------

/// g_c = max over (t, i, j) of X[t, i, j, c].
inline Var global_pattern(Tape& tape, Var features) {
  if (tape.value(features).rank() != 4) {
    throw DimensionError("global_pattern expects (T, w, h, d) features");
  }
  return ops::reduce_max(tape, features, {0, 1, 2});
}

/// X̂ = sigmoid(g) ⊙ X + X, channel-wise.
inline Var enhance(Tape& tape, Var features, Var gpc) {
  return ops::channel_gate(tape, features, ops::sigmoid(tape, gpc));
}

/// S_g* = max over anomaly channels 1..C of sigmoid(phi1(g)). `gpc` may
/// already carry a dropout mask.
inline Var video_overall_score(Tape& tape, Var gpc, const AffineVars& phi1) {
  const std::size_t outputs = tape.value(phi1.weight).extent(0);
  if (outputs < 2) throw ConfigError("phi1 must output 1+C channels with C >= 1");
  const Var probs = ops::sigmoid(tape, ops::affine(tape, phi1.weight, phi1.bias, gpc));
  return ops::reduce_max_all(tape, ops::slice_last(tape, probs, 1, outputs));
}

/// Binary cross entropy of a single probability against y* ∈ {0, 1}.
inline Var binary_loss(Tape& tape, Var probability, int y_star) {
  return ops::bce(tape, probability, Tensor(tape.value(probability).shape(), y_star ? 1.0 : 0.0));
}

inline Var video_level_loss(Tape& tape, Var s_g_star, int y_star) {
  return binary_loss(tape, s_g_star, y_star);
}

// -- value-level convenience ------------------------------------------------

inline GpcVector global_pattern(const FeatureMaps& x) {
  Tape tape(false);
  return {tape.value(global_pattern(tape, tape.leaf(x.tensor())))};
}

inline FeatureMaps enhance(const FeatureMaps& x, const GpcVector& g) {
  Tape tape(false);
  return FeatureMaps(tape.value(enhance(tape, tape.leaf(x.tensor()), tape.leaf(g.g))), true);
}

inline double video_overall_score(const GpcVector& g, const Affine& phi1, std::size_t classes) {
  if (classes == 0) throw ConfigError("class count C must be at least 1");
  if (phi1.outputs() != 1 + classes) {
    throw DimensionError("phi1 outputs " + std::to_string(phi1.outputs()) + " channels, expected " +
                         std::to_string(1 + classes));
  }
  Tape tape(false);
  return tape.value(video_overall_score(tape, tape.leaf(g.g), put(tape, phi1))).item();
}

/// The two-channel (normal, anomalous) view of an overall score.
inline std::pair<double, double> two_channel(double s_star) { return {1.0 - s_star, s_star}; }

inline double binary_loss(double probability, int y_star) {
  Tape tape(false);
  return tape.value(binary_loss(tape, tape.leaf(Tensor::scalar(probability)), y_star)).item();
}

inline double video_level_loss(double s_g_star, int y_star) { return binary_loss(s_g_star, y_star); }

}  // namespace gigvad
