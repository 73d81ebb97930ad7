#pragma once

#include <cstddef>

#include "gigvad/dropout.hpp"
#include "gigvad/gig.hpp"
#include "gigvad/objectives.hpp"
#include "gigvad/spatial.hpp"
#include "gigvad/tape.hpp"

namespace gigvad {

struct HeadVars {
  AffineVars phi1;
  AffineVars phi2;
};

inline HeadVars put(Tape& tape, const HeadParams& p) { return {put(tape, p.phi1), put(tape, p.phi2)}; }

struct ForwardOptions {
  std::size_t k = 1;
  std::size_t p = 1;
  DropoutState dropout;
};

/// Every intermediate of the head for one video.
struct HeadForward {
  Var gpc;
  Var enhanced;
  Var relation;
  Var pattern;
  Var scores;
  ConsensusVars consensus;
  Var s_g_star;
};

/// Global cue → enhancement → relation → top-k → segment scores → consensus,
/// plus the video-level score on the cue. Dropout (when active) is applied to
/// the cue before phi1 and to the pattern vectors before phi2.
inline HeadForward forward_head(Tape& tape, Var features, const HeadVars& heads, const ForwardOptions& opt) {
  HeadForward f{};
  f.gpc = global_pattern(tape, features);
  f.enhanced = enhance(tape, features, f.gpc);
  f.relation = relation_scores(tape, f.gpc, f.enhanced);
  f.pattern = select_topk(tape, f.enhanced, f.relation, opt.k);
  f.scores = segment_scores(tape, f.pattern, heads.phi2, opt.dropout);
  f.consensus = consensus(tape, f.scores, opt.p);
  f.s_g_star = video_overall_score(tape, dropout(tape, f.gpc, opt.dropout), heads.phi1);
  return f;
}

/// Head forward pass plus every supervision term.
inline LossVars forward_losses(Tape& tape, const HeadForward& f, const VideoLabels& labels,
                               const LossWeights& weights) {
  LossVars l{};
  l.l_s = multiclass_loss(tape, f.consensus.s_t, labels);
  l.l_s_star = segment_overall_loss(tape, f.consensus.s_star, labels.any());
  l.l_g_star = video_level_loss(tape, f.s_g_star, labels.any());
  l.l_sparse = sparsity_loss(tape, f.scores);
  l.total = total_loss(tape, l.l_s, l.l_s_star, l.l_g_star, l.l_sparse, weights);
  return l;
}

inline LossBreakdown read_losses(const Tape& tape, const LossVars& l, const LossWeights& w) {
  LossBreakdown b = total_loss(tape.value(l.l_s).item(), tape.value(l.l_s_star).item(),
                               tape.value(l.l_g_star).item(), tape.value(l.l_sparse).item(), w);
  b.total = tape.value(l.total).item();
  return b;
}

}  // namespace gigvad
