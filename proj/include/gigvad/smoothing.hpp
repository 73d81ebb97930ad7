#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "gigvad/errors.hpp"

namespace gigvad {

/// Sampled Gaussian of standard deviation `sigma` truncated at radius
/// ceil(4·sigma) and normalized to unit sum. Length 2·radius + 1.
inline std::vector<double> gaussian_kernel(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw ConfigError("gaussian sigma must be positive, got " + std::to_string(sigma));
  }
  const auto radius = static_cast<std::ptrdiff_t>(std::ceil(4.0 * sigma));
  std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
  double total = 0.0;
  for (std::ptrdiff_t i = -radius; i <= radius; ++i) {
    const double v = std::exp(-0.5 * static_cast<double>(i * i) / (sigma * sigma));
    k[static_cast<std::size_t>(i + radius)] = v;
    total += v;
  }
  for (double& v : k) v /= total;
  return k;
}

/// Maps any index onto [0, n) by mirror reflection about the edges, with
/// the edge sample repeated: (d c b a | a b c d | d c b a).
inline std::size_t reflect_index(std::ptrdiff_t i, std::size_t n) {
  const auto period = static_cast<std::ptrdiff_t>(2 * n);
  std::ptrdiff_t m = i % period;
  if (m < 0) m += period;
  return m < static_cast<std::ptrdiff_t>(n) ? static_cast<std::size_t>(m)
                                            : static_cast<std::size_t>(period - 1 - m);
}

/// 1-D Gaussian smoothing with reflect padding. Only order 0 (plain
/// smoothing) is supported.
inline std::vector<double> gaussian_smooth(std::span<const double> series, double sigma = 2.0, int order = 0) {
  if (series.empty()) throw ConfigError("gaussian_smooth: empty series");
  if (order != 0) throw ConfigError("gaussian_smooth: only order 0 is supported");
  const auto kernel = gaussian_kernel(sigma);
  const auto radius = static_cast<std::ptrdiff_t>(kernel.size() / 2);
  const std::size_t n = series.size();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::ptrdiff_t j = -radius; j <= radius; ++j) {
      acc += kernel[static_cast<std::size_t>(j + radius)] *
             series[reflect_index(static_cast<std::ptrdiff_t>(i) + j, n)];
    }
    out[i] = acc;
  }
  return out;
}

}  // namespace gigvad
