#pragma once

#include <string>

#include "gigvad/errors.hpp"
#include "gigvad/ops.hpp"
#include "gigvad/rng.hpp"
#include "gigvad/tape.hpp"
#include "gigvad/tensor.hpp"

namespace gigvad {

enum class Mode { train, eval };

/// Dropout configuration for one forward pass. In eval mode, or with a null
/// generator, dropout is the identity.
struct DropoutState {
  double rate = 0.0;
  Mode mode = Mode::eval;
  Rng* rng = nullptr;

  bool active() const noexcept { return mode == Mode::train && rng != nullptr && rate > 0.0; }
};

inline void check_dropout_rate(double rate) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw ConfigError("dropout rate " + std::to_string(rate) + " outside [0, 1)");
  }
}

/// Inverted dropout mask: each entry 0 with probability `rate`, otherwise
/// 1/(1 - rate).
inline Tensor dropout_mask(const Shape& shape, double rate, Rng& rng) {
  check_dropout_rate(rate);
  Tensor m(shape);
  const double keep = 1.0 / (1.0 - rate);
  for (double& v : m.data()) v = rng.bernoulli(rate) ? 0.0 : keep;
  return m;
}

inline Var dropout(Tape& tape, Var x, const DropoutState& state) {
  check_dropout_rate(state.rate);
  if (!state.active()) return x;
  return ops::mul_const(tape, x, dropout_mask(tape.value(x).shape(), state.rate, *state.rng));
}

inline Tensor dropout(const Tensor& x, double rate, Mode mode, Rng& rng) {
  Tape tape(false);
  return tape.value(dropout(tape, tape.leaf(x), DropoutState{rate, mode, &rng}));
}

}  // namespace gigvad
