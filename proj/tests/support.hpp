#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "gigvad/gigvad.hpp"

namespace gigvad::testing {

inline Tensor random_tensor(const Shape& shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t(shape);
  for (double& v : t.data()) v = rng.uniform(lo, hi);
  return t;
}

/// Scalarizes any op output with fixed random weights: Σ w_i · y_i. Makes a
/// generic linear functional so every output coordinate is exercised.
inline Var project(Tape& tape, Var y, std::uint64_t seed) {
  Rng rng(seed);
  Tensor w = random_tensor(tape.value(y).shape(), rng);
  return ops::sum(tape, ops::mul_const(tape, y, std::move(w)));
}

/// Brute-force stable descending order: value desc, then index asc, by
/// repeated linear scans (no sorting library involved).
inline std::vector<std::size_t> brute_force_top(const std::vector<double>& values, std::size_t count) {
  std::vector<bool> used(values.size(), false);
  std::vector<std::size_t> out;
  for (std::size_t n = 0; n < count; ++n) {
    std::size_t best = values.size();
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (used[i]) continue;
      if (best == values.size() || values[i] > values[best]) best = i;
    }
    used[best] = true;
    out.push_back(best);
  }
  return out;
}

/// Small random head-model problem: heads, features, labels.
struct Problem {
  std::size_t T, w, h, d, C;
  HeadParams params;
  Tensor features;
  VideoLabels labels;
};

inline Problem random_problem(Rng& rng, std::size_t T = 4, std::size_t w = 3, std::size_t h = 3, std::size_t d = 6,
                              std::size_t C = 3) {
  Problem p{T, w, h, d, C, HeadParams::init(C, d, rng), random_tensor(Shape{T, w, h, d}, rng, -2.0, 2.0), {}};
  for (Tensor* t : p.params.tensors()) {
    for (double& v : t->data()) v = rng.uniform(-1.0, 1.0);
  }
  std::vector<std::uint8_t> y(C, 0);
  if (rng.bernoulli(0.6)) {
    y[rng.below(C)] = 1;
    if (rng.bernoulli(0.3)) y[rng.below(C)] = 1;
  }
  p.labels = VideoLabels(std::move(y));
  return p;
}

/// Packs features and both heads into one flat vector so a single grad_check
/// covers every input of the full loss.
inline Tensor pack(const Problem& p) {
  std::vector<double> flat(p.features.data().begin(), p.features.data().end());
  for (const Tensor* t : p.params.tensors()) flat.insert(flat.end(), t->data().begin(), t->data().end());
  return Tensor::vector(std::move(flat));
}

struct Unpacked {
  Var features;
  HeadVars heads;
};

inline Unpacked unpack(Tape& tape, Var flat, const Problem& p) {
  std::size_t at = 0;
  auto take = [&](Shape s) {
    const std::size_t n = shape_size(s);
    Var v = ops::block(tape, flat, at, std::move(s));
    at += n;
    return v;
  };
  Unpacked u{};
  u.features = take({p.T, p.w, p.h, p.d});
  u.heads.phi1.weight = take({1 + p.C, p.d});
  u.heads.phi1.bias = take({1 + p.C});
  u.heads.phi2.weight = take({1 + p.C, p.d});
  u.heads.phi2.bias = take({1 + p.C});
  return u;
}

}  // namespace gigvad::testing
