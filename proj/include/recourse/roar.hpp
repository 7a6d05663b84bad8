#pragma once

#include "recourse/solver.hpp"

namespace recourse {

struct RoarConfig {
  double learning_rate = 0.01;
  int max_iters = 2000;
  double tolerance = 1e-7;  // on the infinity norm of a step
};

/// Gradient-based robust recourse: alternate the exact adversary response with
/// a fixed-rate subgradient step on J(., theta'). At coordinates sitting on x0
/// the minimum-norm subgradient of the cost term is used, so a coordinate only
/// leaves x0 when the loss gradient outweighs lambda * w_i.
RecoursePlan roar_recourse(const RecourseQuery& q, const Neighborhood& n, const RoarConfig& cfg = {});

}  // namespace recourse
