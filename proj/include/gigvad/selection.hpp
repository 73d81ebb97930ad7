#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "gigvad/errors.hpp"

namespace gigvad {

/// Indices of the `count` largest values, ordered by value descending and
/// then by index ascending (lowest index wins a tie).
inline std::vector<std::size_t> top_indices(std::span<const double> values, std::size_t count) {
  if (count == 0 || count > values.size()) {
    throw ConfigError("selection count " + std::to_string(count) + " outside [1, " +
                      std::to_string(values.size()) + "]");
  }
  std::vector<std::size_t> idx(values.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  auto before = [&](std::size_t a, std::size_t b) {
    if (values[a] != values[b]) return values[a] > values[b];
    return a < b;
  };
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(count), idx.end(),
                    before);
  idx.resize(count);
  return idx;
}

/// Gap between the weakest selected value and the strongest rejected one.
/// +inf when nothing was rejected.
inline double selection_gap(std::span<const double> values, std::span<const std::size_t> chosen) {
  if (chosen.size() >= values.size()) return std::numeric_limits<double>::infinity();
  std::vector<bool> taken(values.size(), false);
  double weakest = std::numeric_limits<double>::infinity();
  for (std::size_t i : chosen) {
    taken[i] = true;
    weakest = std::min(weakest, values[i]);
  }
  double strongest = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!taken[i]) strongest = std::max(strongest, values[i]);
  }
  return weakest - strongest;
}

}  // namespace gigvad
