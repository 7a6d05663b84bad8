#pragma once

#include <cstdint>

#include "recourse/models.hpp"

namespace recourse {

struct SurrogateConfig {
  std::size_t n_samples = 1000;
  double stddev = 1.0;        // sampling spread per (normalized) feature
  double kernel_width = 0.0;  // <= 0 selects 0.75 * sqrt(d)
  double ridge = 1e-3;
  std::uint64_t seed = 0;
};

/// Weighted ridge fit of the scorer's clamped logit around x0, giving a
/// linear model the exact solvers can consume.
ModelParams fit_local_linear(const BlackBoxScorer& scorer, std::span<const double> x0,
                             const SurrogateConfig& cfg = {});

struct SurrogateFit {
  ModelParams params;
  double weighted_residual = 0.0;  // kernel-weighted mean squared residual in logit units
};

SurrogateFit fit_local_linear_detailed(const BlackBoxScorer& scorer, std::span<const double> x0,
                                       const SurrogateConfig& cfg = {});

}  // namespace recourse
