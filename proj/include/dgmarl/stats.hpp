#pragma once

#include <span>
#include <utility>
#include <vector>

#include "dgmarl/rng.hpp"

namespace dgmarl {

// Interquartile mean: mean of the middle 50% after sorting, trimming a
// quarter of the total weight from each tail with fractional weighting at the
// cut points. Rejects empty input.
double iqm(std::span<const double> values);
inline double iqm(const std::vector<double>& values) { return iqm(std::span<const double>(values)); }

// Percentile bootstrap interval of the IQM statistic. Deterministic given the
// rng; degenerate input collapses to a point interval. Needs >= 2 values.
std::pair<double, double> bootstrap_ci(std::span<const double> values, int n_resamples, double level,
                                       Rng rng);
inline std::pair<double, double> bootstrap_ci(const std::vector<double>& values, int n_resamples = 2000,
                                              double level = 0.95, Rng rng = Rng(0)) {
  return bootstrap_ci(std::span<const double>(values), n_resamples, level, rng);
}

}  // namespace dgmarl
