#include "recourse/glm.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "recourse/errors.hpp"

namespace recourse {

namespace {

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

void require_same_length(std::size_t expected, std::size_t got, const char* what) {
  if (expected != got) {
    throw DimensionError(std::string(what) + ": expected length " + std::to_string(expected) +
                         ", got " + std::to_string(got));
  }
}

}  // namespace

void ModelParams::validate() const {
  if (weights.empty()) throw InvalidInput("model parameters need at least one weight");
  if (!all_finite(weights) || !std::isfinite(intercept)) {
    throw InvalidInput("model parameters contain non-finite values");
  }
}

void RecourseQuery::validate() const {
  if (x0.empty()) throw InvalidInput("recourse query has an empty instance");
  if (!all_finite(x0)) throw InvalidInput("recourse query instance contains non-finite values");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw InvalidInput("lambda must be finite and >= 0");
  }
  if (!cost.weights.empty()) {
    require_same_length(x0.size(), cost.weights.size(), "cost weights");
    for (double w : cost.weights) {
      if (!(w > 0.0) || !std::isfinite(w)) throw InvalidInput("cost weights must be positive");
    }
  }
  if (!immutable.empty()) require_same_length(x0.size(), immutable.size(), "immutable mask");
}

double sigmoid(double s) {
  if (s >= 0.0) return 1.0 / (1.0 + std::exp(-s));
  const double e = std::exp(s);
  return e / (1.0 + e);
}

double link(LinkKind kind, double s) {
  switch (kind) {
    case LinkKind::Sigmoid:
      return sigmoid(s);
    case LinkKind::Identity:
      return std::clamp(s, 0.0, 1.0);
  }
  return 0.0;
}

double score(const ModelParams& theta, std::span<const double> x) {
  require_same_length(theta.weights.size(), x.size(), "score");
  double s = theta.intercept;
  for (std::size_t i = 0; i < x.size(); ++i) s += theta.weights[i] * x[i];
  return s;
}

double eval_loss(LossKind loss, double s) {
  switch (loss) {
    case LossKind::BinaryCrossEntropy:
      // log(1 + e^-s) without overflow on either tail.
      return s >= 0.0 ? std::log1p(std::exp(-s)) : -s + std::log1p(std::exp(s));
    case LossKind::Squared: {
      const double gap = 1.0 - std::min(s, 1.0);
      return gap * gap;
    }
  }
  return 0.0;
}

double loss_derivative(LossKind loss, double s) {
  switch (loss) {
    case LossKind::BinaryCrossEntropy:
      return -sigmoid(-s);
    case LossKind::Squared:
      return -2.0 * std::max(0.0, 1.0 - s);
  }
  return 0.0;
}

double weighted_l1(const RecourseQuery& q, std::span<const double> x_prime) {
  require_same_length(q.x0.size(), x_prime.size(), "recourse");
  double c = 0.0;
  for (std::size_t i = 0; i < x_prime.size(); ++i) {
    c += q.cost.weight(i) * std::abs(x_prime[i] - q.x0[i]);
  }
  return c;
}

double eval_total_cost(const RecourseQuery& q, std::span<const double> x_prime,
                       const ModelParams& theta) {
  return eval_loss(q.loss, score(theta, x_prime)) + q.lambda * weighted_l1(q, x_prime);
}

namespace {

// Worst-case score of the example: the adversary sets the weight to
// -0.5 * sign(x) and the intercept to -0.5.
double example_worst_score(double x) { return -0.5 * sign(x) * x - 0.5; }

}  // namespace

double squared_probability_example_objective(double x) {
  const double gap = 1.0 - sigmoid(example_worst_score(x));
  return gap * gap + std::abs(x - 1.0);
}

double example_objective(LossKind loss, double x) {
  return eval_loss(loss, example_worst_score(x)) + std::abs(x - 1.0);
}

std::optional<MidpointViolation> find_midpoint_violation(
    const std::function<double(double)>& f, double lo, double hi, double step, double slack) {
  const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step)) + 1;
  std::vector<double> values(n);
  for (std::size_t i = 0; i < n; ++i) values[i] = f(lo + step * static_cast<double>(i));

  std::optional<MidpointViolation> worst;
  // Pairs (i, j) with an even gap so the midpoint is itself a grid point.
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 2; j < n; j += 2) {
      const double mid = values[(i + j) / 2];
      const double gap = mid - 0.5 * (values[i] + values[j]);
      if (gap > slack && (!worst || gap > worst->gap)) {
        worst = MidpointViolation{lo + step * static_cast<double>(i),
                                  lo + step * static_cast<double>(j), gap};
      }
    }
  }
  return worst;
}

}  // namespace recourse
