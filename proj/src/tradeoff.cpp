#include "recourse/tradeoff.hpp"

#include <algorithm>
#include <cmath>

#include "recourse/errors.hpp"

namespace recourse {

void TradeoffQuery::validate() const {
  query.validate();
  neighborhood.validate();
  if (!(beta >= 0.0 && beta <= 1.0)) throw InvalidInput("beta must lie in [0,1]");
  if (prediction.dim() != neighborhood.base.dim()) throw DimensionError("prediction dimension mismatch");
  if (!neighborhood.contains(prediction)) throw InvalidInput("prediction lies outside the neighborhood");
}

double robustness(const RecourseQuery& q, const Neighborhood& n, std::span<const double> x_prime,
                  const RecoursePlan& robust_plan) {
  return worst_case_total(q, n, x_prime) - robust_plan.worst_case_total;
}

double robustness(const RecourseQuery& q, const Neighborhood& n, std::span<const double> x_prime) {
  return robustness(q, n, x_prime, optimal_robust_recourse(q, n));
}

double consistency(const RecourseQuery& q, const ModelParams& theta_hat, std::span<const double> x_prime,
                   const RecoursePlan& consistent_plan) {
  return eval_total_cost(q, x_prime, theta_hat) - eval_total_cost(q, consistent_plan.x_prime, theta_hat);
}

double consistency(const RecourseQuery& q, const ModelParams& theta_hat, std::span<const double> x_prime) {
  return consistency(q, theta_hat, x_prime, consistent_recourse(q, theta_hat));
}

std::vector<double> BlendConfig::resolved_steps() const {
  if (!steps.empty()) return steps;
  std::vector<double> out;
  for (int k = 0; k <= 12; ++k) {
    const double s = 0.01 * std::ldexp(1.0, k);
    out.push_back(s);
    out.push_back(-s);
  }
  return out;
}

double blended_objective(const TradeoffQuery& tq, std::span<const double> x) {
  const double worst = worst_case_total(tq.query, tq.neighborhood, x);
  if (tq.beta == 1.0) return worst;
  return tq.beta * worst + (1.0 - tq.beta) * eval_total_cost(tq.query, x, tq.prediction);
}

namespace {

bool same_sign_pattern(std::span<const double> a, std::span<const double> b) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (sign(a[i]) != sign(b[i])) return false;
  }
  return true;
}

}  // namespace

RecoursePlan blended_recourse(const TradeoffQuery& tq, const BlendConfig& cfg) {
  tq.validate();
  const auto& q = tq.query;
  const auto& n = tq.neighborhood;

  if (tq.beta == 1.0) return optimal_robust_recourse(q, n, cfg.solver);
  if (tq.beta == 0.0) {
    RecoursePlan c = consistent_recourse(q, tq.prediction, cfg.solver);
    RecoursePlan plan = make_plan(q, n, std::move(c.x_prime));
    plan.saturated = c.saturated;
    plan.trace = std::move(c.trace);
    return plan;
  }

  const RecoursePlan robust = optimal_robust_recourse(q, n, cfg.solver);
  const RecoursePlan consistent = consistent_recourse(q, tq.prediction, cfg.solver);
  Vector x = q.x0;
  double value = blended_objective(tq, x);
  for (const Vector* cand : {&robust.x_prime, &consistent.x_prime}) {
    const double v = blended_objective(tq, *cand);
    if (v < value) {
      value = v;
      x = *cand;
    }
  }

  const std::size_t d = q.dim();
  const auto steps = cfg.resolved_steps();
  const int max_rounds = cfg.max_rounds > 0 ? cfg.max_rounds : static_cast<int>(4 * d);
  std::vector<TraceStep> trace;
  Vector probe = x;
  for (int round = 0; round < max_rounds; ++round) {
    double best_value = value;
    std::size_t best_j = d;
    double best_delta = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      if (q.is_immutable(j)) continue;
      for (double delta : steps) {
        probe[j] = x[j] + delta;
        const double v = blended_objective(tq, probe);
        if (v < best_value) {
          best_value = v;
          best_j = j;
          best_delta = delta;
        }
      }
      probe[j] = x[j];
    }
    if (best_j == d || value - best_value <= cfg.min_improvement) break;

    const double adv_weight = best_response(n, x).weights[best_j];
    Vector next = x;
    next[best_j] += best_delta;
    trace.push_back({best_j, best_delta, adv_weight, !same_sign_pattern(x, next)});
    x = std::move(next);
    probe = x;
    value = best_value;
  }

  RecoursePlan plan = make_plan(q, n, std::move(x));
  plan.trace = std::move(trace);
  return plan;
}

std::vector<TradeoffPoint> pareto_frontier(const TradeoffQuery& base, const std::vector<double>& betas,
                                           const BlendConfig& cfg) {
  const RecoursePlan robust = optimal_robust_recourse(base.query, base.neighborhood, cfg.solver);
  const RecoursePlan consistent = consistent_recourse(base.query, base.prediction, cfg.solver);
  std::vector<TradeoffPoint> out;
  out.reserve(betas.size());
  for (double beta : betas) {
    TradeoffQuery tq = base;
    tq.beta = beta;
    const RecoursePlan plan = blended_recourse(tq, cfg);
    TradeoffPoint p;
    p.beta = beta;
    p.robustness = robustness(base.query, base.neighborhood, plan.x_prime, robust);
    p.consistency = consistency(base.query, base.prediction, plan.x_prime, consistent);
    p.l1_cost = plan.l1_cost;
    out.push_back(p);
  }
  return out;
}

double smoothness(const RecourseQuery& q, const Neighborhood& n, const ModelParams& prediction_used,
                  const ModelParams& correct_prediction, double beta, const BlendConfig& cfg) {
  const RecoursePlan learner = blended_recourse({q, n, prediction_used, beta}, cfg);
  const RecoursePlan ideal = consistent_recourse(q, correct_prediction, cfg.solver);
  return eval_total_cost(q, learner.x_prime, correct_prediction) -
         eval_total_cost(q, ideal.x_prime, correct_prediction);
}

double validity(const BlackBoxScorer& scorer, const std::vector<Vector>& recourses) {
  if (recourses.empty()) throw InvalidInput("validity of an empty recourse list");
  std::size_t ok = 0;
  for (const auto& x : recourses) ok += static_cast<std::size_t>(predict_label(scorer, x));
  return static_cast<double>(ok) / static_cast<double>(recourses.size());
}

double validity(const ModelParams& theta, const std::vector<Vector>& recourses) {
  return validity(GlmScorer(theta), recourses);
}

}  // namespace recourse
