#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "gigvad/errors.hpp"

namespace gigvad {

/// Area under the ROC curve as the Mann-Whitney statistic
/// (#{pos > neg} + 0.5·#{pos = neg}) / (#pos·#neg), via a single sort with
/// mid-ranks for tied scores.
inline double roc_auc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  if (scores.size() != labels.size()) {
    throw DimensionError("roc_auc: " + std::to_string(scores.size()) + " scores but " +
                         std::to_string(labels.size()) + " labels");
  }
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  double positives = 0.0, negatives = 0.0, pos_rank_sum = 0.0;
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) ++j;
    // Ranks i+1 .. j share the mid-rank.
    const double mid = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t m = i; m < j; ++m) {
      if (labels[idx[m]]) {
        positives += 1.0;
        pos_rank_sum += mid;
      } else {
        negatives += 1.0;
      }
    }
    i = j;
  }
  if (positives == 0.0 || negatives == 0.0) {
    throw UndefinedMetricError("roc_auc needs at least one positive and one negative frame");
  }
  const double u = pos_rank_sum - positives * (positives + 1.0) / 2.0;
  return u / (positives * negatives);
}

struct F1Report {
  std::vector<double> per_class;  // index c-1 for anomaly class c
  double mf1 = 0.0;
};

/// Class-wise F1 over anomaly classes 1..C and their mean. Any zero
/// denominator yields F1 = 0 for that class.
inline F1Report f1_metrics(std::span<const std::size_t> predicted, std::span<const std::size_t> truth,
                           std::size_t classes) {
  if (predicted.size() != truth.size()) throw DimensionError("f1_metrics: prediction/truth length mismatch");
  if (classes == 0) throw ConfigError("f1_metrics: C must be at least 1");
  std::vector<double> tp(classes + 1, 0.0), fp(classes + 1, 0.0), fn(classes + 1, 0.0);
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const std::size_t p = predicted[i], t = truth[i];
    if (p > classes || t > classes) throw ConfigError("f1_metrics: class id out of range");
    if (p == t) {
      tp[p] += 1.0;
    } else {
      fp[p] += 1.0;
      fn[t] += 1.0;
    }
  }
  F1Report r;
  for (std::size_t c = 1; c <= classes; ++c) {
    double f1 = 0.0;
    if (tp[c] + fp[c] > 0.0 && tp[c] + fn[c] > 0.0) {
      const double precision = tp[c] / (tp[c] + fp[c]);
      const double recall = tp[c] / (tp[c] + fn[c]);
      if (precision + recall > 0.0) f1 = 2.0 * precision * recall / (precision + recall);
    }
    r.per_class.push_back(f1);
  }
  r.mf1 = std::accumulate(r.per_class.begin(), r.per_class.end(), 0.0) / static_cast<double>(classes);
  return r;
}

}  // namespace gigvad
