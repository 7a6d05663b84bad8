#pragma once

#include <optional>
#include <vector>

#include "recourse/models.hpp"
#include "recourse/solver.hpp"

namespace recourse {

/// A recourse problem plus an (untrusted) prediction of the future model and
/// the weight beta placed on the worst case.
struct TradeoffQuery {
  RecourseQuery query;
  Neighborhood neighborhood;
  ModelParams prediction;
  double beta = 1.0;

  /// beta in [0,1] and the prediction inside the neighborhood (1e-9 slack).
  void validate() const;
};

struct TradeoffPoint {
  double beta = 0.0;
  double robustness = 0.0;
  double consistency = 0.0;
  double l1_cost = 0.0;
  std::optional<double> validity;
};

// Robustness: excess worst-case total cost over the robust optimum.
double robustness(const RecourseQuery& q, const Neighborhood& n, std::span<const double> x_prime);
double robustness(const RecourseQuery& q, const Neighborhood& n, std::span<const double> x_prime,
                  const RecoursePlan& robust_plan);

// Consistency: excess total cost under the prediction over the consistent optimum.
double consistency(const RecourseQuery& q, const ModelParams& theta_hat, std::span<const double> x_prime);
double consistency(const RecourseQuery& q, const ModelParams& theta_hat, std::span<const double> x_prime,
                   const RecoursePlan& consistent_plan);

struct BlendConfig {
  /// Candidate moves per coordinate; empty selects +-0.01 * 2^k for k = 0..12.
  std::vector<double> steps;
  int max_rounds = 0;  // <= 0 selects 4d
  double min_improvement = 1e-9;
  SolverConfig solver;

  std::vector<double> resolved_steps() const;
};

/// beta * max_theta J(x, theta) + (1 - beta) * J(x, prediction).
double blended_objective(const TradeoffQuery& tq, std::span<const double> x);

/// Minimizes the blended objective. beta = 1 and beta = 0 are solved exactly by
/// the robust and consistent solvers. In between, the search starts from the
/// best of x0, x_r and x_c and runs coordinate grid search: each round tries
/// every free coordinate with every step size and applies the best move.
RecoursePlan blended_recourse(const TradeoffQuery& tq, const BlendConfig& cfg = {});

/// One point per beta for a single instance and prediction.
std::vector<TradeoffPoint> pareto_frontier(const TradeoffQuery& base, const std::vector<double>& betas,
                                           const BlendConfig& cfg = {});

/// J(x'(beta, used), correct) - J(x_c(correct), correct), where x'(beta, used)
/// is the blended recourse computed with `prediction_used`.
double smoothness(const RecourseQuery& q, const Neighborhood& n, const ModelParams& prediction_used,
                  const ModelParams& correct_prediction, double beta, const BlendConfig& cfg = {});

/// Fraction of recourses labeled 1 by the scorer. Throws on an empty list.
double validity(const BlackBoxScorer& scorer, const std::vector<Vector>& recourses);
double validity(const ModelParams& theta, const std::vector<Vector>& recourses);

}  // namespace recourse
