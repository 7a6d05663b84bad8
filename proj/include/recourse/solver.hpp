#pragma once

#include <vector>

#include "recourse/adversary.hpp"
#include "recourse/glm.hpp"

namespace recourse {

/// One coordinate move made by a solver.
struct TraceStep {
  std::size_t coordinate = 0;
  double delta = 0.0;
  double theta_prime = 0.0;  // adversary weight on the coordinate when the move was chosen
  bool adversary_updated = false;
};

struct RecoursePlan {
  Vector x_prime;
  double l1_cost = 0.0;           // weighted L1 distance to x0
  double worst_case_total = 0.0;  // max over the neighborhood of J at x_prime
  bool saturated = false;         // the score cap stopped an unbounded improvement
  std::vector<TraceStep> trace;
};

struct SolverConfig {
  double tolerance = 1e-10;  // bisection tolerance on the step
  int max_passes = 0;        // <= 0 selects 2d + 2
  bool use_closed_form_logistic = true;
  double score_cap = 30.0;   // scores beyond this are treated as saturated
};

struct CoordinateStep {
  double t = 0.0;  // weighted cost spent; the coordinate moves by t / w_i
  bool saturated = false;
};

/// argmin over t >= 0 of loss(s0 + slope * t) + lambda * t, where slope is the
/// score gained per unit of weighted cost (|theta'[i]| / w_i).
CoordinateStep solve_coordinate_step(const RecourseQuery& q, double s0, double slope,
                                     const SolverConfig& cfg = {});

/// Exact minimizer of max over the neighborhood of J for generalized linear
/// models. Starts from the adversary's response to x0 and greedily moves the
/// coordinate with the largest |theta'[j]| / w_j, stopping a move at zero when
/// crossing it would change the adversary. Immutable coordinates are never moved.
RecoursePlan optimal_robust_recourse(const RecourseQuery& q, const Neighborhood& n,
                                     const SolverConfig& cfg = {});

/// Minimizer of J(., theta_hat): the robust solver on a zero-radius ball.
RecoursePlan consistent_recourse(const RecourseQuery& q, const ModelParams& theta_hat,
                                 const SolverConfig& cfg = {});

/// Builds a plan for an arbitrary point (costs and worst case filled in).
RecoursePlan make_plan(const RecourseQuery& q, const Neighborhood& n, Vector x_prime);

struct GridSpec {
  double radius = 5.0;
  double step = 0.0;       // <= 0 selects 0.01 for d = 1 and 0.05 otherwise
  int refine_levels = 16;   // zoom passes around the incumbent after the full grid
  long refine_points = 16;  // points per side in a zoom pass
  double refine_span = 4.0; // previous steps covered per side by a zoom pass
};

struct OracleResult {
  Vector x_best;
  double value = 0.0;
};

/// Exhaustive search over the axis-aligned grid x0 +- radius, with the inner
/// maximum taken over every corner of the neighborhood, followed by finer
/// grids centered on the best point found so far. d <= 3.
OracleResult minimax_oracle(const RecourseQuery& q, const Neighborhood& n, const GridSpec& grid = {});

}  // namespace recourse
