#pragma once

#include <vector>

#include "recourse/glm.hpp"
#include "recourse/models.hpp"

namespace recourse {

/// L-infinity ball of radius alpha around base parameters. The intercept is
/// perturbed too unless `perturb_intercept` is false.
struct Neighborhood {
  ModelParams base;
  double alpha = 0.0;
  bool perturb_intercept = true;

  void validate() const;
  /// True when every coordinate of `theta` lies within alpha (+ slack) of base.
  bool contains(const ModelParams& theta, double slack = 1e-9) const;
  /// Coordinate-wise projection into the ball.
  ModelParams clamp(const ModelParams& theta) const;
};

/// Model in the ball minimizing the score of x, i.e. maximizing J(x, .):
/// weights base[i] - alpha * sign(x[i]), intercept base - alpha.
ModelParams best_response(const Neighborhood& n, std::span<const double> x);

/// Brute force over all 2^(d+1) corner models (2^d when the intercept is
/// fixed); returns the one with the smallest score, ties going to the
/// lexicographically smallest sign pattern (-1 before +1). Requires at most 20
/// enumerated coordinates.
ModelParams corner_oracle(const Neighborhood& n, std::span<const double> x);

/// max over the ball of J(x, .), evaluated through best_response.
double worst_case_total(const RecourseQuery& q, const Neighborhood& n, std::span<const double> x);

/// Adam hyper-parameters for the shared worst-case model search.
struct AscentConfig {
  double learning_rate = 0.001;
  int steps = 1000;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Mean cross entropy toward label 1 of a recourse set under `theta`.
double mean_recourse_loss(const ModelParams& theta, const std::vector<Vector>& recourses);

/// Projected Adam ascent on mean_recourse_loss starting at the ball center.
/// Every iterate is projected back into the ball; the best iterate seen
/// (including the start) is returned.
ModelParams worst_case_shared_model(const Neighborhood& n, const std::vector<Vector>& recourses,
                                    const AscentConfig& cfg = {});

/// Same search over every weight and bias of a network, each kept within
/// alpha of its original value.
MlpWeights worst_case_shared_mlp(const MlpWeights& base, double alpha,
                                 const std::vector<Vector>& recourses, const AscentConfig& cfg = {});

double mean_recourse_loss(const MlpWeights& w, const std::vector<Vector>& recourses);

}  // namespace recourse
