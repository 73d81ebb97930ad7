#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>

#include "gigvad/errors.hpp"
#include "gigvad/tensor.hpp"

namespace gigvad {

/// Adagrad: G += g², θ -= lr·g / (sqrt(G) + eps), elementwise.
struct Adagrad {
  double lr = 1e-3;
  double eps = 1e-10;

  /// All gradients are validated before any parameter moves, so a
  /// non-finite gradient leaves parameters and accumulators untouched.
  void step(std::span<Tensor* const> params, std::span<Tensor> accumulators,
            std::span<const Tensor> grads) const {
    if (params.size() != accumulators.size() || params.size() != grads.size()) {
      throw DimensionError("adagrad: parameter, accumulator, and gradient counts differ");
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
      if (params[i]->shape() != grads[i].shape() || params[i]->shape() != accumulators[i].shape()) {
        throw DimensionError("adagrad: gradient " + shape_string(grads[i].shape()) +
                             " does not match parameter " + shape_string(params[i]->shape()));
      }
      if (!grads[i].all_finite()) {
        throw NumericError("adagrad: non-finite gradient for parameter " + std::to_string(i));
      }
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
      auto p = params[i]->data();
      auto acc = accumulators[i].data();
      auto g = grads[i].data();
      for (std::size_t j = 0; j < p.size(); ++j) {
        acc[j] += g[j] * g[j];
        p[j] -= lr * g[j] / (std::sqrt(acc[j]) + eps);
      }
    }
  }
};

}  // namespace gigvad
