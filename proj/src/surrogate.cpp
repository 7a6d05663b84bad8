#include "recourse/surrogate.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>

#include "recourse/errors.hpp"

namespace recourse {

namespace {

constexpr double kLogitClamp = 15.0;

double clamped_logit(double p) {
  if (p <= 0.0) return -kLogitClamp;
  if (p >= 1.0) return kLogitClamp;
  return std::clamp(std::log(p) - std::log1p(-p), -kLogitClamp, kLogitClamp);
}

}  // namespace

SurrogateFit fit_local_linear_detailed(const BlackBoxScorer& scorer, std::span<const double> x0,
                                       const SurrogateConfig& cfg) {
  const std::size_t d = x0.size();
  if (d == 0 || d != scorer.dim()) throw DimensionError("fit_local_linear: instance length does not match scorer");
  if (cfg.n_samples < d + 1) throw InvalidInput("fit_local_linear: need at least d + 1 samples");
  if (!(cfg.stddev >= 0.0) || cfg.ridge < 0.0) throw InvalidInput("fit_local_linear: invalid sampling parameters");
  const double width = cfg.kernel_width > 0.0 ? cfg.kernel_width : 0.75 * std::sqrt(static_cast<double>(d));

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  const auto n = static_cast<Eigen::Index>(cfg.n_samples);
  const auto p = static_cast<Eigen::Index>(d + 1);  // intercept column last

  Eigen::MatrixXd design(n, p);
  Eigen::VectorXd target(n);
  Eigen::VectorXd weight(n);
  Vector z(d);
  for (Eigen::Index k = 0; k < n; ++k) {
    double dist2 = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double offset = cfg.stddev * noise(rng);
      z[j] = x0[j] + offset;
      dist2 += offset * offset;
      design(k, static_cast<Eigen::Index>(j)) = z[j];
    }
    design(k, p - 1) = 1.0;
    target(k) = clamped_logit(scorer.probability(z));
    weight(k) = std::exp(-dist2 / (width * width));
  }

  bool degenerate = true;
  for (Eigen::Index j = 0; j + 1 < p && degenerate; ++j) {
    degenerate = (design.col(j).array() == design(0, j)).all();
  }
  if (degenerate) throw InvalidInput("fit_local_linear: all perturbed samples are identical");

  Eigen::MatrixXd gram = design.transpose() * weight.asDiagonal() * design;
  for (Eigen::Index j = 0; j + 1 < p; ++j) gram(j, j) += cfg.ridge;
  const Eigen::VectorXd rhs = design.transpose() * (weight.array() * target.array()).matrix();
  const Eigen::VectorXd coef = gram.ldlt().solve(rhs);
  if (!coef.allFinite()) throw InvalidInput("fit_local_linear: singular design");

  SurrogateFit fit;
  fit.params.weights.resize(d);
  for (std::size_t j = 0; j < d; ++j) fit.params.weights[j] = coef(static_cast<Eigen::Index>(j));
  fit.params.intercept = coef(p - 1);
  const Eigen::VectorXd resid = target - design * coef;
  fit.weighted_residual = (weight.array() * resid.array().square()).sum() / weight.sum();
  return fit;
}

ModelParams fit_local_linear(const BlackBoxScorer& scorer, std::span<const double> x0,
                             const SurrogateConfig& cfg) {
  return fit_local_linear_detailed(scorer, x0, cfg).params;
}

}  // namespace recourse
