#include "recourse/roar.hpp"

#include <algorithm>
#include <cmath>

#include "recourse/errors.hpp"

namespace recourse {

RecoursePlan roar_recourse(const RecourseQuery& q, const Neighborhood& n, const RoarConfig& cfg) {
  q.validate();
  n.validate();
  if (!(cfg.learning_rate > 0.0) || cfg.max_iters <= 0) throw InvalidInput("invalid ROAR configuration");
  const std::size_t d = q.dim();
  if (n.base.dim() != d) throw DimensionError("roar_recourse: dimension mismatch");

  Vector x = q.x0;
  Vector grad(d);
  for (int it = 0; it < cfg.max_iters; ++it) {
    const ModelParams adv = best_response(n, x);
    const double dl = loss_derivative(q.loss, score(adv, x));
    double largest = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      if (q.is_immutable(i)) {
        grad[i] = 0.0;
        continue;
      }
      const double g_loss = dl * adv.weights[i];
      const double reg = q.lambda * q.cost.weight(i);
      if (x[i] != q.x0[i]) {
        grad[i] = g_loss + reg * sign(x[i] - q.x0[i]);
      } else {
        grad[i] = std::copysign(std::max(0.0, std::abs(g_loss) - reg), g_loss);
      }
      largest = std::max(largest, std::abs(cfg.learning_rate * grad[i]));
    }
    for (std::size_t i = 0; i < d; ++i) x[i] -= cfg.learning_rate * grad[i];
    if (largest < cfg.tolerance) break;
  }
  return make_plan(q, n, std::move(x));
}

}  // namespace recourse
