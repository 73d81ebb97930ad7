#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

#include "gigvad/dropout.hpp"
#include "gigvad/errors.hpp"
#include "gigvad/gig.hpp"
#include "gigvad/ops.hpp"
#include "gigvad/selection.hpp"
#include "gigvad/tape.hpp"
#include "gigvad/tensor.hpp"

// Spatial reasoning: relation to the global cue, top-k aggregation,
// segment classification, and top-p consensus.
namespace gigvad {

/// Cosine relation of every spatial vector to the cue, extent (T, w, h).
struct RelationMap {
  Tensor r;
};

/// Mean of the k most related spatial vectors per segment, extent (T, d).
struct SegmentPatternVector {
  Tensor xs;
  std::size_t k = 0;
};

/// Per-segment class probabilities, extent (T, 1+C).
struct SegmentScores {
  Tensor s;
};

struct ConsensusScore {
  Tensor s_t;          // (1+C)
  double s_star = 0.0; // max over anomaly channels of s_t
  std::size_t p = 0;
};

inline std::size_t default_k(std::size_t w, std::size_t h) { return std::max<std::size_t>(1, w * h / 4); }
inline std::size_t default_p(std::size_t segments) { return std::max<std::size_t>(1, segments / 4); }

// -- tape-level -------------------------------------------------------------

inline Var relation_scores(Tape& tape, Var gpc, Var enhanced) {
  return ops::cosine_last(tape, gpc, enhanced);
}

inline Var select_topk(Tape& tape, Var enhanced, Var relation, std::size_t k) {
  return ops::topk_spatial_mean(tape, enhanced, relation, k);
}

/// sigmoid(phi2(dropout(xs))) row by row.
inline Var segment_scores(Tape& tape, Var pattern, const AffineVars& phi2, const DropoutState& drop) {
  return ops::sigmoid(tape, ops::affine(tape, phi2.weight, phi2.bias, dropout(tape, pattern, drop)));
}

struct ConsensusVars {
  Var s_t;
  Var s_star;
};

inline ConsensusVars consensus(Tape& tape, Var scores, std::size_t p) {
  const Var s_t = ops::topp_column_mean(tape, scores, p);
  const std::size_t channels = tape.value(s_t).extent(0);
  if (channels < 2) throw ConfigError("segment scores need 1+C channels with C >= 1");
  const Var s_star = ops::reduce_max_all(tape, ops::slice_last(tape, s_t, 1, channels));
  return {s_t, s_star};
}

// -- value-level ------------------------------------------------------------

inline RelationMap relation_scores(const GpcVector& g, const FeatureMaps& enhanced) {
  Tape tape(false);
  return {tape.value(relation_scores(tape, tape.leaf(g.g), tape.leaf(enhanced.tensor())))};
}

/// Top-k mean for a single segment: `features` (w, h, d), `relation` (w, h).
inline Tensor select_topk(const Tensor& features, const Tensor& relation, std::size_t k) {
  if (features.rank() != 3 || relation.rank() != 2) {
    throw DimensionError("select_topk expects (w, h, d) features and a (w, h) relation map");
  }
  Shape fs{1, features.extent(0), features.extent(1), features.extent(2)};
  Shape rs{1, relation.extent(0), relation.extent(1)};
  Tape tape(false);
  const Var out = select_topk(tape, tape.leaf(Tensor(fs, {features.data().begin(), features.data().end()})),
                              tape.leaf(Tensor(rs, {relation.data().begin(), relation.data().end()})), k);
  const Tensor& v = tape.value(out);
  return Tensor(Shape{v.extent(1)}, {v.data().begin(), v.data().end()});
}

inline SegmentPatternVector select_topk(const FeatureMaps& enhanced, const RelationMap& r, std::size_t k) {
  Tape tape(false);
  return {tape.value(select_topk(tape, tape.leaf(enhanced.tensor()), tape.leaf(r.r), k)), k};
}

inline SegmentScores segment_scores(const SegmentPatternVector& xs, const Affine& phi2,
                                    const DropoutState& drop = {}) {
  Tape tape(false);
  return {tape.value(segment_scores(tape, tape.leaf(xs.xs), put(tape, phi2), drop))};
}

inline ConsensusScore consensus(const SegmentScores& scores, std::size_t p) {
  Tape tape(false);
  const auto c = consensus(tape, tape.leaf(scores.s), p);
  return {tape.value(c.s_t), tape.value(c.s_star).item(), p};
}

}  // namespace gigvad
