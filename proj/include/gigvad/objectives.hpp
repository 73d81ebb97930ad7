#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "gigvad/errors.hpp"
#include "gigvad/gig.hpp"
#include "gigvad/ops.hpp"
#include "gigvad/spatial.hpp"
#include "gigvad/tape.hpp"
#include "gigvad/tensor.hpp"

namespace gigvad {

/// Weights of the segment-overall, video-level, and sparsity terms.
struct LossWeights {
  double segment_overall = 1.0;  // λ1
  double video_level = 0.5;      // λ2
  double sparsity = 0.1;         // λ3

  void validate() const {
    if (!(segment_overall >= 0.0) || !(video_level >= 0.0) || !(sparsity >= 0.0)) {
      throw ConfigError("loss weights must be non-negative");
    }
  }
};

struct LossBreakdown {
  double l_s = 0.0;         // multi-class consensus loss
  double l_s_star = 0.0;    // segment-consensus overall loss
  double l_g_star = 0.0;    // video-level loss on the global cue
  double l_sparse = 0.0;
  double l_vs = 0.0;
  double total = 0.0;
  LossWeights lambdas;
};

// -- tape-level -------------------------------------------------------------

inline Var segment_overall_loss(Tape& tape, Var s_star, int y_star) {
  return binary_loss(tape, s_star, y_star);
}

/// Mean over the 1+C channels of BCE(s_t[c], target[c]), where the target is
/// (1 - y*, y_1, ..., y_C).
inline Var multiclass_loss(Tape& tape, Var s_t, const VideoLabels& labels) {
  Tensor target = labels.extended_target();
  if (tape.value(s_t).shape() != target.shape()) {
    throw DimensionError("consensus has " + shape_string(tape.value(s_t).shape()) +
                         " channels but labels cover " + std::to_string(labels.classes()) + " classes");
  }
  return ops::bce(tape, s_t, std::move(target));
}

/// Σ_t max over anomaly channels of S[t, ·].
inline Var sparsity_loss(Tape& tape, Var scores) {
  const Tensor& S = tape.value(scores);
  if (S.rank() != 2 || S.extent(1) < 2) {
    throw DimensionError("sparsity loss expects (T, 1+C) scores with C >= 1");
  }
  const std::size_t k = S.extent(1);
  const Var per_segment = ops::reduce_max(tape, ops::slice_last(tape, scores, 1, k), {1});
  return ops::sum(tape, per_segment);
}

struct LossVars {
  Var l_s, l_s_star, l_g_star, l_sparse, total;
};

inline Var total_loss(Tape& tape, Var l_s, Var l_s_star, Var l_g_star, Var l_sparse,
                      const LossWeights& w) {
  w.validate();
  return ops::weighted_sum(tape, {l_s, l_s_star, l_g_star, l_sparse},
                           {1.0, w.segment_overall, w.video_level, w.sparsity});
}

// -- value-level ------------------------------------------------------------

inline double segment_overall_loss(const ConsensusScore& cs, int y_star) {
  return binary_loss(cs.s_star, y_star);
}

inline double multiclass_loss(const ConsensusScore& cs, const VideoLabels& labels) {
  Tape tape(false);
  return tape.value(multiclass_loss(tape, tape.leaf(cs.s_t), labels)).item();
}

inline double sparsity_loss(const SegmentScores& scores) {
  Tape tape(false);
  return tape.value(sparsity_loss(tape, tape.leaf(scores.s))).item();
}

inline LossBreakdown total_loss(double l_s, double l_s_star, double l_g_star, double l_sparse,
                                const LossWeights& w = {}) {
  w.validate();
  LossBreakdown b{l_s, l_s_star, l_g_star, l_sparse, 0.0, 0.0, w};
  b.l_vs = l_s + w.segment_overall * l_s_star + w.video_level * l_g_star;
  b.total = b.l_vs + w.sparsity * l_sparse;
  return b;
}

}  // namespace gigvad
