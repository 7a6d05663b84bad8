#include "recourse/adversary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "recourse/errors.hpp"

namespace recourse {

void Neighborhood::validate() const {
  base.validate();
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw InvalidInput("neighborhood radius must be finite and >= 0");
}

bool Neighborhood::contains(const ModelParams& theta, double slack) const {
  if (theta.dim() != base.dim()) return false;
  for (std::size_t i = 0; i < base.dim(); ++i) {
    if (std::abs(theta.weights[i] - base.weights[i]) > alpha + slack) return false;
  }
  const double allowed = perturb_intercept ? alpha : 0.0;
  return std::abs(theta.intercept - base.intercept) <= allowed + slack;
}

ModelParams Neighborhood::clamp(const ModelParams& theta) const {
  if (theta.dim() != base.dim()) throw DimensionError("neighborhood clamp: dimension mismatch");
  ModelParams out = theta;
  for (std::size_t i = 0; i < base.dim(); ++i) {
    out.weights[i] = std::clamp(theta.weights[i], base.weights[i] - alpha, base.weights[i] + alpha);
  }
  const double allowed = perturb_intercept ? alpha : 0.0;
  out.intercept = std::clamp(theta.intercept, base.intercept - allowed, base.intercept + allowed);
  return out;
}

ModelParams best_response(const Neighborhood& n, std::span<const double> x) {
  if (x.size() != n.base.dim()) {
    throw DimensionError("best_response: model has " + std::to_string(n.base.dim()) +
                         " weights, recourse has " + std::to_string(x.size()));
  }
  ModelParams out = n.base;
  for (std::size_t i = 0; i < x.size(); ++i) out.weights[i] -= n.alpha * sign(x[i]);
  if (n.perturb_intercept) out.intercept -= n.alpha;
  return out;
}

ModelParams corner_oracle(const Neighborhood& n, std::span<const double> x) {
  const std::size_t d = n.base.dim();
  if (x.size() != d) throw DimensionError("corner_oracle: dimension mismatch");
  const std::size_t m = d + (n.perturb_intercept ? 1 : 0);
  if (m > 20) throw DimensionError("corner_oracle: " + std::to_string(m) + " coordinates exceed the limit of 20");

  // Bit (m-1-k) of the mask holds coordinate k, so increasing masks are
  // lexicographically increasing sign patterns.
  auto corner = [&](std::uint32_t mask) {
    ModelParams c = n.base;
    for (std::size_t k = 0; k < m; ++k) {
      const double s = (mask >> (m - 1 - k)) & 1U ? 1.0 : -1.0;
      if (k < d) {
        c.weights[k] += s * n.alpha;
      } else {
        c.intercept += s * n.alpha;
      }
    }
    return c;
  };

  std::uint32_t best_mask = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::uint32_t mask = 0; mask < (1U << m); ++mask) {
    const double s = score(corner(mask), x);
    if (s < best) {
      best = s;
      best_mask = mask;
    }
  }
  return corner(best_mask);
}

double worst_case_total(const RecourseQuery& q, const Neighborhood& n, std::span<const double> x) {
  return eval_total_cost(q, x, best_response(n, x));
}

double mean_recourse_loss(const ModelParams& theta, const std::vector<Vector>& recourses) {
  double total = 0.0;
  for (const auto& x : recourses) total += eval_loss(LossKind::BinaryCrossEntropy, score(theta, x));
  return total / static_cast<double>(recourses.size());
}

namespace {

// Adam state over a flat parameter vector.
class AdamAscent {
 public:
  AdamAscent(std::size_t n, const AscentConfig& cfg) : cfg_(cfg), m_(n, 0.0), v_(n, 0.0) {}

  void step(Vector& params, const Vector& grad) {
    ++t_;
    const double c1 = 1.0 - std::pow(cfg_.beta1, t_);
    const double c2 = 1.0 - std::pow(cfg_.beta2, t_);
    for (std::size_t i = 0; i < params.size(); ++i) {
      m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * grad[i];
      v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * grad[i] * grad[i];
      params[i] += cfg_.learning_rate * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + cfg_.epsilon);
    }
  }

 private:
  AscentConfig cfg_;
  Vector m_, v_;
  int t_ = 0;
};

void check_ascent(const std::vector<Vector>& recourses, const AscentConfig& cfg) {
  if (recourses.empty()) throw InvalidInput("worst-case model search needs at least one recourse");
  if (!(cfg.learning_rate > 0.0) || cfg.steps < 0) throw InvalidInput("invalid ascent configuration");
}

}  // namespace

ModelParams worst_case_shared_model(const Neighborhood& n, const std::vector<Vector>& recourses,
                                    const AscentConfig& cfg) {
  n.validate();
  check_ascent(recourses, cfg);
  const std::size_t d = n.base.dim();
  for (const auto& x : recourses) {
    if (x.size() != d) throw DimensionError("worst_case_shared_model: recourse length mismatch");
  }

  ModelParams theta = n.base;
  ModelParams best = theta;
  double best_value = mean_recourse_loss(theta, recourses);
  if (n.alpha == 0.0) return best;

  AdamAscent adam(d + 1, cfg);
  Vector flat(d + 1), grad(d + 1);
  const double inv_n = 1.0 / static_cast<double>(recourses.size());
  for (int it = 0; it < cfg.steps; ++it) {
    std::fill(grad.begin(), grad.end(), 0.0);
    for (const auto& x : recourses) {
      const double dl = loss_derivative(LossKind::BinaryCrossEntropy, score(theta, x));
      for (std::size_t j = 0; j < d; ++j) grad[j] += dl * x[j] * inv_n;
      grad[d] += dl * inv_n;
    }
    if (!n.perturb_intercept) grad[d] = 0.0;
    std::copy(theta.weights.begin(), theta.weights.end(), flat.begin());
    flat[d] = theta.intercept;
    adam.step(flat, grad);
    std::copy(flat.begin(), flat.begin() + static_cast<std::ptrdiff_t>(d), theta.weights.begin());
    theta.intercept = flat[d];
    theta = n.clamp(theta);

    const double value = mean_recourse_loss(theta, recourses);
    if (value > best_value) {
      best_value = value;
      best = theta;
    }
  }
  return best;
}

double mean_recourse_loss(const MlpWeights& w, const std::vector<Vector>& recourses) {
  double total = 0.0;
  for (const auto& x : recourses) total += eval_loss(LossKind::BinaryCrossEntropy, mlp_logit(w, x));
  return total / static_cast<double>(recourses.size());
}

namespace {

std::size_t parameter_count(const MlpWeights& w) {
  std::size_t n = 0;
  for (const auto& l : w.layers) n += l.outputs() * (l.inputs() + 1);
  return n;
}

Vector flatten(const MlpWeights& w) {
  Vector out;
  out.reserve(parameter_count(w));
  for (const auto& l : w.layers) {
    for (const auto& row : l.w) out.insert(out.end(), row.begin(), row.end());
    out.insert(out.end(), l.b.begin(), l.b.end());
  }
  return out;
}

void unflatten(const Vector& flat, MlpWeights& w) {
  std::size_t k = 0;
  for (auto& l : w.layers) {
    for (auto& row : l.w) {
      for (double& v : row) v = flat[k++];
    }
    for (double& v : l.b) v = flat[k++];
  }
}

// Accumulates d/dparams of the cross entropy toward label 1 for one input,
// scaled by `scale`, into `grad` (laid out like flatten()).
void accumulate_gradient(const MlpWeights& w, std::span<const double> x, double scale, Vector& grad) {
  const std::size_t L = w.layers.size();
  std::vector<Vector> acts(L + 1);  // acts[l] is the input to layer l
  std::vector<Vector> pre(L);
  acts[0].assign(x.begin(), x.end());
  for (std::size_t l = 0; l < L; ++l) {
    const auto& layer = w.layers[l];
    pre[l].assign(layer.outputs(), 0.0);
    acts[l + 1].assign(layer.outputs(), 0.0);
    for (std::size_t o = 0; o < layer.outputs(); ++o) {
      double z = layer.b[o];
      for (std::size_t i = 0; i < layer.inputs(); ++i) z += layer.w[o][i] * acts[l][i];
      pre[l][o] = z;
      acts[l + 1][o] = (l + 1 < L) ? std::max(0.0, z) : z;
    }
  }

  std::vector<std::size_t> offset(L);
  std::size_t k = 0;
  for (std::size_t l = 0; l < L; ++l) {
    offset[l] = k;
    k += w.layers[l].outputs() * (w.layers[l].inputs() + 1);
  }

  Vector delta{scale * loss_derivative(LossKind::BinaryCrossEntropy, pre[L - 1][0])};
  for (std::size_t l = L; l-- > 0;) {
    const auto& layer = w.layers[l];
    const std::size_t in = layer.inputs();
    const std::size_t base = offset[l];
    for (std::size_t o = 0; o < layer.outputs(); ++o) {
      for (std::size_t i = 0; i < in; ++i) grad[base + o * in + i] += delta[o] * acts[l][i];
      grad[base + layer.outputs() * in + o] += delta[o];
    }
    if (l == 0) break;
    Vector prev(in, 0.0);
    for (std::size_t i = 0; i < in; ++i) {
      if (pre[l - 1][i] <= 0.0) continue;  // ReLU gate
      double g = 0.0;
      for (std::size_t o = 0; o < layer.outputs(); ++o) g += layer.w[o][i] * delta[o];
      prev[i] = g;
    }
    delta.swap(prev);
  }
}

}  // namespace

MlpWeights worst_case_shared_mlp(const MlpWeights& base, double alpha,
                                 const std::vector<Vector>& recourses, const AscentConfig& cfg) {
  base.validate();
  check_ascent(recourses, cfg);
  if (!(alpha >= 0.0)) throw InvalidInput("worst_case_shared_mlp: alpha must be >= 0");

  MlpWeights cur = base;
  MlpWeights best = base;
  double best_value = mean_recourse_loss(base, recourses);
  if (alpha == 0.0) return best;

  const Vector center = flatten(base);
  Vector flat = center;
  Vector grad(center.size());
  AdamAscent adam(center.size(), cfg);
  const double inv_n = 1.0 / static_cast<double>(recourses.size());
  for (int it = 0; it < cfg.steps; ++it) {
    std::fill(grad.begin(), grad.end(), 0.0);
    for (const auto& x : recourses) accumulate_gradient(cur, x, inv_n, grad);
    adam.step(flat, grad);
    for (std::size_t i = 0; i < flat.size(); ++i) {
      flat[i] = std::clamp(flat[i], center[i] - alpha, center[i] + alpha);
    }
    unflatten(flat, cur);
    const double value = mean_recourse_loss(cur, recourses);
    if (value > best_value) {
      best_value = value;
      best = cur;
    }
  }
  return best;
}

}  // namespace recourse
