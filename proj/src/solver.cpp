#include "recourse/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "recourse/errors.hpp"

namespace recourse {

CoordinateStep solve_coordinate_step(const RecourseQuery& q, double s0, double slope,
                                     const SolverConfig& cfg) {
  if (!(slope > 0.0)) return {};
  const double lambda = q.lambda;
  // Directional derivative of the 1-D objective at t.
  auto dphi = [&](double t) { return slope * loss_derivative(q.loss, s0 + slope * t) + lambda; };
  if (dphi(0.0) >= 0.0) return {};

  const double t_cap = (cfg.score_cap - s0) / slope;
  if (t_cap <= 0.0) return {0.0, true};

  if (q.loss == LossKind::BinaryCrossEntropy && cfg.use_closed_form_logistic) {
    // slope * sigmoid(-s) = lambda  <=>  s = log((slope - lambda) / lambda).
    if (lambda == 0.0) return {t_cap, true};
    const double target = std::log((slope - lambda) / lambda);
    if (target > cfg.score_cap) return {t_cap, true};
    return {std::max(0.0, (target - s0) / slope), false};
  }

  if (dphi(t_cap) < 0.0) return {t_cap, true};
  double lo = 0.0;
  double hi = t_cap;
  while (hi - lo > cfg.tolerance) {
    const double mid = 0.5 * (lo + hi);
    if (dphi(mid) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return {0.5 * (lo + hi), false};
}

RecoursePlan make_plan(const RecourseQuery& q, const Neighborhood& n, Vector x_prime) {
  RecoursePlan plan;
  plan.l1_cost = weighted_l1(q, x_prime);
  plan.worst_case_total = worst_case_total(q, n, x_prime);
  plan.x_prime = std::move(x_prime);
  return plan;
}

RecoursePlan optimal_robust_recourse(const RecourseQuery& q, const Neighborhood& n, const SolverConfig& cfg) {
  q.validate();
  n.validate();
  const std::size_t d = q.dim();
  if (n.base.dim() != d) {
    throw DimensionError("optimal_robust_recourse: instance has " + std::to_string(d) +
                         " features, model has " + std::to_string(n.base.dim()));
  }
  if (!(cfg.tolerance > 0.0)) throw InvalidInput("solver tolerance must be positive");

  const auto& base = n.base.weights;
  Vector x = q.x0;
  ModelParams adv = n.base;  // theta', the adversary facing the current x
  if (n.perturb_intercept) adv.intercept -= n.alpha;
  // Sign of the orthant each free coordinate is in (or moving into when at 0).
  std::vector<double> region(d, 1.0);
  std::vector<bool> active(d, false);

  for (std::size_t i = 0; i < d; ++i) {
    if (q.is_immutable(i)) {
      adv.weights[i] = base[i] - n.alpha * sign(q.x0[i]);
    } else if (q.x0[i] != 0.0) {
      region[i] = sign(q.x0[i]);
      adv.weights[i] = base[i] - n.alpha * region[i];
      active[i] = true;
    } else if (std::abs(base[i]) > n.alpha) {
      region[i] = sign(base[i]);
      adv.weights[i] = base[i] - n.alpha * region[i];
      active[i] = true;
    } else {
      // Moving either way from 0 lets the adversary flip the weight against us.
      adv.weights[i] = base[i] - n.alpha;
    }
  }

  RecoursePlan plan;
  const int max_passes = cfg.max_passes > 0 ? cfg.max_passes : static_cast<int>(2 * d + 2);
  for (int pass = 0; pass < max_passes; ++pass) {
    std::size_t best = d;
    double best_slope = -1.0;
    for (std::size_t j = 0; j < d; ++j) {
      if (!active[j]) continue;
      const double slope = std::abs(adv.weights[j]) / q.cost.weight(j);
      if (slope > best_slope) {
        best_slope = slope;
        best = j;
      }
    }
    if (best == d || best_slope <= 0.0) break;

    const std::size_t i = best;
    const double w = q.cost.weight(i);
    const CoordinateStep step = solve_coordinate_step(q, score(adv, x), best_slope, cfg);
    const double dir = sign(adv.weights[i]);
    const double move = step.t / w;
    const bool toward_zero = dir != region[i];

    if (!toward_zero || move <= std::abs(x[i])) {
      if (move > 0.0) {
        x[i] += dir * move;
        plan.trace.push_back({i, dir * move, adv.weights[i], false});
      }
      plan.saturated = step.saturated;
      break;
    }

    // The move would cross zero: stop there and let the adversary respond.
    const double delta = -x[i];
    const double before = adv.weights[i];
    x[i] = 0.0;
    const double flipped_region = -region[i];
    const double response = base[i] - n.alpha * flipped_region;
    bool updated = false;
    if (response * before > 0.0) {
      // Still worth moving the same way, at a smaller rate.
      adv.weights[i] = response;
      region[i] = flipped_region;
      updated = true;
    } else {
      active[i] = false;
    }
    plan.trace.push_back({i, delta, before, updated});
  }

  plan.l1_cost = weighted_l1(q, x);
  plan.worst_case_total = worst_case_total(q, n, x);
  plan.x_prime = std::move(x);
  return plan;
}

RecoursePlan consistent_recourse(const RecourseQuery& q, const ModelParams& theta_hat, const SolverConfig& cfg) {
  return optimal_robust_recourse(q, Neighborhood{theta_hat, 0.0, true}, cfg);
}

OracleResult minimax_oracle(const RecourseQuery& q, const Neighborhood& n, const GridSpec& grid) {
  q.validate();
  n.validate();
  const std::size_t d = q.dim();
  if (d > 3) throw DimensionError("minimax_oracle: supports d <= 3, got " + std::to_string(d));
  if (n.base.dim() != d) throw DimensionError("minimax_oracle: dimension mismatch");
  double step = grid.step > 0.0 ? grid.step : (d == 1 ? 0.01 : 0.05);
  if (!(grid.radius >= 0.0)) throw InvalidInput("minimax_oracle: radius must be >= 0");
  if (grid.refine_levels < 0 || grid.refine_points < 1 || !(grid.refine_span > 0.0)) throw InvalidInput("minimax_oracle: bad refinement");

  // Every corner of the ball, as (weights, intercept).
  const std::size_t m = d + (n.perturb_intercept ? 1 : 0);
  const std::size_t corners = std::size_t{1} << m;
  std::vector<Vector> corner_w(corners, Vector(3, 0.0));
  Vector corner_bias(corners);
  for (std::size_t c = 0; c < corners; ++c) {
    for (std::size_t k = 0; k < d; ++k)
      corner_w[c][k] = n.base.weights[k] + (((c >> k) & 1U) ? n.alpha : -n.alpha);
    corner_bias[c] = n.base.intercept;
    if (n.perturb_intercept) corner_bias[c] += ((c >> d) & 1U) ? n.alpha : -n.alpha;
  }

  // Exhaustive search over center +- half * step on every free axis.
  auto search = [&](const Vector& center, long half, double h) {
    std::vector<Vector> axis(3, Vector{0.0});
    std::vector<Vector> axis_cost(3, Vector{0.0});
    for (std::size_t k = 0; k < d; ++k) {
      axis[k].clear();
      axis_cost[k].clear();
      const long lo = q.is_immutable(k) ? 0 : -half;
      const long hi = q.is_immutable(k) ? 0 : half;
      for (long j = lo; j <= hi; ++j) {
        const double v = q.is_immutable(k) ? q.x0[k] : center[k] + static_cast<double>(j) * h;
        axis[k].push_back(v);
        axis_cost[k].push_back(q.lambda * q.cost.weight(k) * std::abs(v - q.x0[k]));
      }
    }
    // contrib[k][c][j] = corner c's weight on axis k times the j-th axis value.
    std::vector<std::vector<Vector>> contrib(3, std::vector<Vector>(corners));
    for (std::size_t c = 0; c < corners; ++c) {
      for (std::size_t k = 0; k < 3; ++k) {
        contrib[k][c].resize(axis[k].size());
        for (std::size_t j = 0; j < axis[k].size(); ++j) contrib[k][c][j] = corner_w[c][k] * axis[k][j];
      }
    }
    OracleResult best;
    best.value = std::numeric_limits<double>::infinity();
    std::size_t b0 = 0, b1 = 0, b2 = 0;
    for (std::size_t j0 = 0; j0 < axis[0].size(); ++j0) {
      for (std::size_t j1 = 0; j1 < axis[1].size(); ++j1) {
        for (std::size_t j2 = 0; j2 < axis[2].size(); ++j2) {
          double worst_score = std::numeric_limits<double>::infinity();
          for (std::size_t c = 0; c < corners; ++c) {
            const double s = corner_bias[c] + contrib[0][c][j0] + contrib[1][c][j1] + contrib[2][c][j2];
            worst_score = std::min(worst_score, s);
          }
          const double value =
              eval_loss(q.loss, worst_score) + axis_cost[0][j0] + axis_cost[1][j1] + axis_cost[2][j2];
          if (value < best.value) {
            best.value = value;
            b0 = j0;
            b1 = j1;
            b2 = j2;
          }
        }
      }
    }
    const std::size_t idx[3] = {b0, b1, b2};
    best.x_best.resize(d);
    for (std::size_t k = 0; k < d; ++k) best.x_best[k] = axis[k][idx[k]];
    return best;
  };

  OracleResult best = search(q.x0, static_cast<long>(std::llround(grid.radius / step)), step);
  for (int level = 0; level < grid.refine_levels; ++level) {
    const double h = grid.refine_span * step / static_cast<double>(grid.refine_points);
    OracleResult cand = search(best.x_best, grid.refine_points, h);
    if (cand.value < best.value) best = std::move(cand);
    step = h;
  }
  return best;
}

}  // namespace recourse
