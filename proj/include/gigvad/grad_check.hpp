#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <string>

#include "gigvad/errors.hpp"
#include "gigvad/tape.hpp"
#include "gigvad/tensor.hpp"

namespace gigvad {

/// Builds a scalar on `tape` from the leaf `x`.
using ScalarFn = std::function<Var(Tape&, Var)>;

struct GradCheckOptions {
  double step = 1e-4;
  double tolerance = 1e-5;
  /// Denominator floor of the relative error, so that components whose true
  /// derivative is ~0 are judged on absolute error instead.
  double scale_floor = 1e-3;
  /// Points whose closest max/top-k decision is nearer than this are flagged.
  double tie_guard = 1e-6;
};

struct GradCheckReport {
  double max_rel_err = 0.0;
  std::size_t worst_index = 0;
  double min_margin = 0.0;
  bool near_tie = false;
  bool pass = false;
};

/// Compares the tape gradient of `f` at `x` against central differences
/// (f(x + h e_i) - f(x - h e_i)) / 2h, coordinate by coordinate.
///
/// The error of coordinate i is |analytic - numeric| / max(|analytic|,
/// |numeric|, scale_floor). Evaluation points within `tie_guard` of a
/// selection tie never pass.
inline GradCheckReport grad_check(const ScalarFn& f, const Tensor& x,
                                  const GradCheckOptions& opt = {}) {
  Tape tape;
  const Var leaf = tape.leaf(x);
  const Var out = f(tape, leaf);
  tape.backward(out);
  const Tensor analytic = tape.grad(leaf);

  GradCheckReport report;
  report.min_margin = tape.min_selection_margin();
  report.near_tie = report.min_margin < opt.tie_guard;

  auto eval = [&](const Tensor& at) {
    Tape probe(false);
    const double v = probe.value(f(probe, probe.leaf(at))).item();
    if (!std::isfinite(v)) throw NumericError("grad_check: non-finite function value");
    return v;
  };

  Tensor shifted = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = x[i];
    shifted[i] = orig + opt.step;
    const double up = eval(shifted);
    shifted[i] = orig - opt.step;
    const double down = eval(shifted);
    shifted[i] = orig;
    const double numeric = (up - down) / (2.0 * opt.step);
    const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), opt.scale_floor});
    const double err = std::abs(analytic[i] - numeric) / denom;
    if (err > report.max_rel_err) {
      report.max_rel_err = err;
      report.worst_index = i;
    }
  }
  report.pass = !report.near_tie && report.max_rel_err <= opt.tolerance;
  return report;
}

}  // namespace gigvad
