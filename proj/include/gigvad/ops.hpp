#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "gigvad/errors.hpp"
#include "gigvad/selection.hpp"
#include "gigvad/tape.hpp"
#include "gigvad/tensor.hpp"

/// Differentiable primitives. Each op computes its forward value, records it
/// on the tape, and registers its hand-derived backward rule.
namespace gigvad::ops {

/// Probabilities are clamped to [kProbEps, 1 - kProbEps] before any log.
inline constexpr double kProbEps = 1e-7;
/// Cosine similarity is 0 when either norm falls below this.
inline constexpr double kNormGuard = 1e-12;

namespace detail {

inline void require(bool ok, const std::string& what) {
  if (!ok) throw DimensionError(what);
}

}  // namespace detail

/// Logistic function, strictly inside (0,1) for every finite input.
inline double sigmoid_value(double x) {
  constexpr double lo = std::numeric_limits<double>::min();
  constexpr double hi = 1.0 - std::numeric_limits<double>::epsilon() / 2.0;
  double s;
  if (x >= 0.0) {
    s = 1.0 / (1.0 + std::exp(-x));
  } else {
    const double e = std::exp(x);
    s = e / (1.0 + e);
  }
  return std::clamp(s, lo, hi);
}

/// out = W·x + b, with `x` a vector [in] or a batch of rows [n, in].
inline Var affine(Tape& tape, Var w, Var b, Var x) {
  const Tensor& W = tape.value(w);
  const Tensor& B = tape.value(b);
  const Tensor& X = tape.value(x);
  detail::require(W.rank() == 2, "affine: weight must be a matrix, got " + shape_string(W.shape()));
  const std::size_t out = W.extent(0);
  const std::size_t in = W.extent(1);
  detail::require(B.shape() == Shape{out},
                  "affine: bias " + shape_string(B.shape()) + " does not match " +
                      std::to_string(out) + " outputs");
  detail::require((X.rank() == 1 || X.rank() == 2) && X.shape().back() == in,
                  "affine: input " + shape_string(X.shape()) + " incompatible with weight " +
                      shape_string(W.shape()));
  const std::size_t rows = X.rank() == 1 ? 1 : X.extent(0);

  Tensor y(X.rank() == 1 ? Shape{out} : Shape{rows, out});
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t o = 0; o < out; ++o) {
      double acc = B[o];
      for (std::size_t i = 0; i < in; ++i) acc += W[o * in + i] * X[r * in + i];
      y[r * out + o] = acc;
    }
  }
  return tape.record(
      std::move(y),
      [w, b, x, rows, out, in](Tape& t, const Tensor& gy) {
        const Tensor& W = t.value(w);
        const Tensor& X = t.value(x);
        Tensor gW(W.shape()), gB(Shape{out}), gX(X.shape());
        for (std::size_t r = 0; r < rows; ++r) {
          for (std::size_t o = 0; o < out; ++o) {
            const double g = gy[r * out + o];
            if (g == 0.0) continue;
            gB[o] += g;
            for (std::size_t i = 0; i < in; ++i) {
              gW[o * in + i] += g * X[r * in + i];
              gX[r * in + i] += g * W[o * in + i];
            }
          }
        }
        t.accumulate(w, gW);
        t.accumulate(b, gB);
        t.accumulate(x, gX);
      },
      "affine");
}

inline Var sigmoid(Tape& tape, Var x) {
  Tensor y = tape.value(x);
  for (double& v : y.data()) v = sigmoid_value(v);
  return tape.record(
      std::move(y),
      [x](Tape& t, const Tensor& gy) {
        Tensor gx = t.value(x);
        for (std::size_t i = 0; i < gx.size(); ++i) {
          const double s = sigmoid_value(gx[i]);
          gx[i] = gy[i] * s * (1.0 - s);
        }
        t.accumulate(x, gx);
      },
      "sigmoid");
}

/// Maximum over `axes` (reduced axes are dropped from the shape). The
/// gradient goes to the first arg-max in row-major order of each group.
inline Var reduce_max(Tape& tape, Var x, std::vector<std::size_t> axes) {
  const Tensor& X = tape.value(x);
  const std::size_t rank = X.rank();
  std::vector<bool> reduced(rank, false);
  for (std::size_t a : axes) {
    detail::require(a < rank, "reduce_max: axis " + std::to_string(a) + " out of range for " +
                                  shape_string(X.shape()));
    reduced[a] = true;
  }
  Shape out_shape;
  for (std::size_t a = 0; a < rank; ++a) {
    if (!reduced[a]) out_shape.push_back(X.shape()[a]);
  }
  const std::size_t groups = shape_size(out_shape);
  if (groups == 0 || X.size() == 0) throw DimensionError("reduce_max: empty reduction group");

  constexpr double ninf = -std::numeric_limits<double>::infinity();
  std::vector<double> best(groups, ninf), second(groups, ninf);
  std::vector<std::size_t> arg(groups, 0);
  std::vector<std::size_t> coord(rank, 0);
  for (std::size_t flat = 0; flat < X.size(); ++flat) {
    std::size_t g = 0;
    for (std::size_t a = 0; a < rank; ++a) {
      if (!reduced[a]) g = g * X.shape()[a] + coord[a];
    }
    const double v = X[flat];
    if (v > best[g]) {
      second[g] = best[g];
      best[g] = v;
      arg[g] = flat;
    } else if (v > second[g]) {
      second[g] = v;
    }
    for (std::size_t a = rank; a-- > 0;) {
      if (++coord[a] < X.shape()[a]) break;
      coord[a] = 0;
    }
  }
  for (std::size_t g = 0; g < groups; ++g) {
    if (second[g] != ninf) tape.note_margin(best[g] - second[g]);
  }
  Tensor y(out_shape, std::move(best));
  return tape.record(
      std::move(y),
      [x, arg = std::move(arg)](Tape& t, const Tensor& gy) {
        Tensor gx = Tensor::zeros_like(t.value(x));
        for (std::size_t g = 0; g < arg.size(); ++g) gx[arg[g]] += gy[g];
        t.accumulate(x, gx);
      },
      "reduce_max");
}

inline Var reduce_max_all(Tape& tape, Var x) {
  std::vector<std::size_t> axes(tape.value(x).rank());
  for (std::size_t a = 0; a < axes.size(); ++a) axes[a] = a;
  return reduce_max(tape, x, std::move(axes));
}

/// out = x ⊙ gate + x, with `gate` broadcast along the last axis of `x`.
inline Var channel_gate(Tape& tape, Var x, Var gate) {
  const Tensor& X = tape.value(x);
  const Tensor& G = tape.value(gate);
  detail::require(G.rank() == 1 && X.rank() >= 1 && X.shape().back() == G.extent(0),
                  "channel_gate: gate " + shape_string(G.shape()) + " does not match channels of " +
                      shape_string(X.shape()));
  const std::size_t d = G.extent(0);
  Tensor y = X;
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = X[i] * G[i % d] + X[i];
  return tape.record(
      std::move(y),
      [x, gate, d](Tape& t, const Tensor& gy) {
        const Tensor& X = t.value(x);
        const Tensor& G = t.value(gate);
        Tensor gx(X.shape()), gg(G.shape());
        for (std::size_t i = 0; i < X.size(); ++i) {
          gx[i] = gy[i] * (1.0 + G[i % d]);
          gg[i % d] += gy[i] * X[i];
        }
        t.accumulate(x, gx);
        t.accumulate(gate, gg);
      },
      "channel_gate");
}

/// Channels [begin, end) of the last axis.
inline Var slice_last(Tape& tape, Var x, std::size_t begin, std::size_t end) {
  const Tensor& X = tape.value(x);
  detail::require(X.rank() >= 1 && begin < end && end <= X.shape().back(),
                  "slice_last: [" + std::to_string(begin) + ", " + std::to_string(end) +
                      ") invalid for " + shape_string(X.shape()));
  const std::size_t width = X.shape().back();
  const std::size_t n = end - begin;
  Shape s = X.shape();
  s.back() = n;
  Tensor y(s);
  const std::size_t rows = X.size() / width;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < n; ++c) y[r * n + c] = X[r * width + begin + c];
  }
  return tape.record(
      std::move(y),
      [x, begin, n, width, rows](Tape& t, const Tensor& gy) {
        Tensor gx = Tensor::zeros_like(t.value(x));
        for (std::size_t r = 0; r < rows; ++r) {
          for (std::size_t c = 0; c < n; ++c) gx[r * width + begin + c] = gy[r * n + c];
        }
        t.accumulate(x, gx);
      },
      "slice_last");
}

/// Contiguous block of `x` starting at flat `offset`, viewed with `shape`.
inline Var block(Tape& tape, Var x, std::size_t offset, Shape shape) {
  const Tensor& X = tape.value(x);
  const std::size_t n = shape_size(shape);
  detail::require(offset + n <= X.size(), "block: range exceeds source " + shape_string(X.shape()));
  std::vector<double> v(X.data().begin() + static_cast<std::ptrdiff_t>(offset),
                        X.data().begin() + static_cast<std::ptrdiff_t>(offset + n));
  return tape.record(
      Tensor(std::move(shape), std::move(v)),
      [x, offset](Tape& t, const Tensor& gy) {
        Tensor gx = Tensor::zeros_like(t.value(x));
        for (std::size_t i = 0; i < gy.size(); ++i) gx[offset + i] = gy[i];
        t.accumulate(x, gx);
      },
      "block");
}

/// Cosine similarity of `g` [d] with every d-vector along the last axis of
/// `x`. Zero (with zero gradient) when either norm is below kNormGuard.
inline Var cosine_last(Tape& tape, Var g, Var x) {
  const Tensor& G = tape.value(g);
  const Tensor& X = tape.value(x);
  detail::require(G.rank() == 1 && X.rank() >= 2 && X.shape().back() == G.extent(0),
                  "cosine: vector " + shape_string(G.shape()) + " does not match channels of " +
                      shape_string(X.shape()));
  const std::size_t d = G.extent(0);
  const std::size_t rows = X.size() / d;
  double gnorm = 0.0;
  for (double v : G.data()) gnorm += v * v;
  gnorm = std::sqrt(gnorm);
  Shape s(X.shape().begin(), X.shape().end() - 1);
  Tensor r(s);
  for (std::size_t row = 0; row < rows; ++row) {
    double dot = 0.0, xn = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
      dot += G[c] * X[row * d + c];
      xn += X[row * d + c] * X[row * d + c];
    }
    xn = std::sqrt(xn);
    r[row] = (gnorm < kNormGuard || xn < kNormGuard) ? 0.0 : dot / (gnorm * xn);
  }
  return tape.record(
      std::move(r),
      [g, x, d, rows](Tape& t, const Tensor& gy) {
        const Tensor& G = t.value(g);
        const Tensor& X = t.value(x);
        Tensor gg(G.shape()), gx(X.shape());
        double gnorm = 0.0;
        for (double v : G.data()) gnorm += v * v;
        gnorm = std::sqrt(gnorm);
        if (gnorm < kNormGuard) {
          t.accumulate(g, gg);
          t.accumulate(x, gx);
          return;
        }
        for (std::size_t row = 0; row < rows; ++row) {
          const double up = gy[row];
          if (up == 0.0) continue;
          double dot = 0.0, xn = 0.0;
          for (std::size_t c = 0; c < d; ++c) {
            dot += G[c] * X[row * d + c];
            xn += X[row * d + c] * X[row * d + c];
          }
          xn = std::sqrt(xn);
          if (xn < kNormGuard) continue;
          const double r = dot / (gnorm * xn);
          // dr/dg = x/(|g||x|) - r g/|g|^2, and symmetrically for x.
          for (std::size_t c = 0; c < d; ++c) {
            const double xc = X[row * d + c];
            gg[c] += up * (xc / (gnorm * xn) - r * G[c] / (gnorm * gnorm));
            gx[row * d + c] += up * (G[c] / (gnorm * xn) - r * xc / (xn * xn));
          }
        }
        t.accumulate(g, gg);
        t.accumulate(x, gx);
      },
      "cosine");
}

/// For each leading index t of `x` [T, w, h, d], the mean of the k spatial
/// vectors with the largest `relation` [T, w, h] entries. Gradient flows to
/// the selected vectors of `x` only; the selection itself is constant.
inline Var topk_spatial_mean(Tape& tape, Var x, Var relation, std::size_t k) {
  const Tensor& X = tape.value(x);
  const Tensor& R = tape.value(relation);
  detail::require(X.rank() == 4, "top-k: features must be (T, w, h, d), got " + shape_string(X.shape()));
  detail::require(R.shape() == Shape(X.shape().begin(), X.shape().begin() + 3),
                  "top-k: relation map " + shape_string(R.shape()) + " does not match features " +
                      shape_string(X.shape()));
  const std::size_t T = X.extent(0);
  const std::size_t cells = X.extent(1) * X.extent(2);
  const std::size_t d = X.extent(3);
  if (k < 1 || k > cells) {
    throw ConfigError("top-k: k = " + std::to_string(k) + " outside [1, " + std::to_string(cells) + "]");
  }
  Tensor y(Shape{T, d});
  std::vector<std::size_t> chosen;
  chosen.reserve(T * k);
  for (std::size_t t = 0; t < T; ++t) {
    auto rel = R.data().subspan(t * cells, cells);
    const auto idx = top_indices(rel, k);
    tape.note_margin(selection_gap(rel, idx));
    for (std::size_t cell : idx) {
      chosen.push_back(cell);
      for (std::size_t c = 0; c < d; ++c) y[t * d + c] += X[(t * cells + cell) * d + c];
    }
    for (std::size_t c = 0; c < d; ++c) y[t * d + c] /= static_cast<double>(k);
  }
  return tape.record(
      std::move(y),
      [x, chosen = std::move(chosen), T, cells, d, k](Tape& t, const Tensor& gy) {
        Tensor gx = Tensor::zeros_like(t.value(x));
        const double inv = 1.0 / static_cast<double>(k);
        for (std::size_t s = 0; s < T; ++s) {
          for (std::size_t j = 0; j < k; ++j) {
            const std::size_t cell = chosen[s * k + j];
            for (std::size_t c = 0; c < d; ++c) gx[(s * cells + cell) * d + c] += gy[s * d + c] * inv;
          }
        }
        t.accumulate(x, gx);
      },
      "top-k");
}

/// Per column of `s` [T, K]: mean of the p largest entries. Result [K].
inline Var topp_column_mean(Tape& tape, Var s, std::size_t p) {
  const Tensor& S = tape.value(s);
  detail::require(S.rank() == 2, "top-p: scores must be (T, K), got " + shape_string(S.shape()));
  const std::size_t T = S.extent(0);
  const std::size_t K = S.extent(1);
  if (p < 1 || p > T) {
    throw ConfigError("top-p: p = " + std::to_string(p) + " outside [1, " + std::to_string(T) + "]");
  }
  Tensor y(Shape{K});
  std::vector<std::size_t> chosen;
  chosen.reserve(K * p);
  std::vector<double> column(T);
  for (std::size_t c = 0; c < K; ++c) {
    for (std::size_t t = 0; t < T; ++t) column[t] = S[t * K + c];
    const auto idx = top_indices(column, p);
    tape.note_margin(selection_gap(column, idx));
    double acc = 0.0;
    for (std::size_t t : idx) {
      chosen.push_back(t);
      acc += column[t];
    }
    y[c] = acc / static_cast<double>(p);
  }
  return tape.record(
      std::move(y),
      [s, chosen = std::move(chosen), K, p](Tape& t, const Tensor& gy) {
        Tensor gs = Tensor::zeros_like(t.value(s));
        const double inv = 1.0 / static_cast<double>(p);
        for (std::size_t c = 0; c < K; ++c) {
          for (std::size_t j = 0; j < p; ++j) gs[chosen[c * p + j] * K + c] += gy[c] * inv;
        }
        t.accumulate(s, gs);
      },
      "top-p");
}

/// Mean binary cross entropy of probabilities `p` against same-shaped 0/1
/// `target`. Probabilities are clamped to [kProbEps, 1 - kProbEps]; the
/// gradient is zero where the clamp is active.
inline Var bce(Tape& tape, Var p, Tensor target) {
  const Tensor& P = tape.value(p);
  detail::require(P.shape() == target.shape() || (P.size() == 1 && target.size() == 1),
                  "bce: target " + shape_string(target.shape()) + " does not match " +
                      shape_string(P.shape()));
  const double n = static_cast<double>(P.size());
  double loss = 0.0;
  for (std::size_t i = 0; i < P.size(); ++i) {
    const double q = std::clamp(P[i], kProbEps, 1.0 - kProbEps);
    const double y = target[i];
    loss -= y * std::log(q) + (1.0 - y) * std::log(1.0 - q);
  }
  return tape.record(
      Tensor::scalar(loss / n),
      [p, target = std::move(target), n](Tape& t, const Tensor& gy) {
        const Tensor& P = t.value(p);
        Tensor gp = Tensor::zeros_like(P);
        for (std::size_t i = 0; i < P.size(); ++i) {
          if (P[i] < kProbEps || P[i] > 1.0 - kProbEps) continue;
          const double y = target[i];
          gp[i] = gy[0] * (-y / P[i] + (1.0 - y) / (1.0 - P[i])) / n;
        }
        t.accumulate(p, gp);
      },
      "bce");
}

inline Var sum(Tape& tape, Var x) {
  double acc = 0.0;
  for (double v : tape.value(x).data()) acc += v;
  return tape.record(
      Tensor::scalar(acc),
      [x](Tape& t, const Tensor& gy) { t.accumulate(x, Tensor(t.value(x).shape(), gy[0])); },
      "sum");
}

/// Elementwise a + b of equal shapes.
inline Var add(Tape& tape, Var a, Var b) {
  const Tensor& A = tape.value(a);
  const Tensor& B = tape.value(b);
  detail::require(A.shape() == B.shape(), "add: shapes " + shape_string(A.shape()) + " and " +
                                              shape_string(B.shape()) + " differ");
  Tensor y = A;
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += B[i];
  return tape.record(
      std::move(y),
      [a, b](Tape& t, const Tensor& gy) {
        t.accumulate(a, gy);
        t.accumulate(b, gy);
      },
      "add");
}

/// Elementwise product with a constant mask of the same shape.
inline Var mul_const(Tape& tape, Var x, Tensor mask) {
  const Tensor& X = tape.value(x);
  detail::require(X.shape() == mask.shape(), "mul_const: mask " + shape_string(mask.shape()) +
                                                 " does not match " + shape_string(X.shape()));
  Tensor y = X;
  for (std::size_t i = 0; i < y.size(); ++i) y[i] *= mask[i];
  return tape.record(
      std::move(y),
      [x, mask = std::move(mask)](Tape& t, const Tensor& gy) {
        Tensor gx = gy;
        for (std::size_t i = 0; i < gx.size(); ++i) gx[i] *= mask[i];
        t.accumulate(x, gx);
      },
      "mul_const");
}

/// Σ coeffs[i] · terms[i] over scalar terms.
inline Var weighted_sum(Tape& tape, const std::vector<Var>& terms, const std::vector<double>& coeffs) {
  detail::require(terms.size() == coeffs.size() && !terms.empty(),
                  "weighted_sum: term/coefficient count mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < terms.size(); ++i) acc += coeffs[i] * tape.value(terms[i]).item();
  return tape.record(
      Tensor::scalar(acc),
      [terms, coeffs](Tape& t, const Tensor& gy) {
        for (std::size_t i = 0; i < terms.size(); ++i) {
          t.accumulate(terms[i], Tensor(t.value(terms[i]).shape(), coeffs[i] * gy[0]));
        }
      },
      "weighted_sum");
}

}  // namespace gigvad::ops
