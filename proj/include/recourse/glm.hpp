#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace recourse {

using Vector = std::vector<double>;

/// Linear score parameters: weights (one per feature) plus a separate intercept.
/// The intercept is never a recourse coordinate.
struct ModelParams {
  Vector weights;
  double intercept = 0.0;

  std::size_t dim() const { return weights.size(); }
  /// Throws InvalidInput when empty or when any entry is non-finite.
  void validate() const;
};

/// Maps a score to the probability of the desirable outcome. Both are non-decreasing.
enum class LinkKind { Sigmoid, Identity };

/// Loss toward label 1 expressed as a function of the score.
///
///   BinaryCrossEntropy: log(1 + e^-s), the sigmoid-link cross entropy.
///   Squared: (1 - min(s, 1))^2, squared loss on the identity-link probability,
///            clamped above at 1 so that the loss stays convex in the score.
enum class LossKind { BinaryCrossEntropy, Squared };

/// Per-feature cost of moving one unit. Empty means unit weights.
struct CostSpec {
  Vector weights;

  double weight(std::size_t i) const { return weights.empty() ? 1.0 : weights[i]; }
};

/// One recourse problem: where the individual starts and how change is priced.
struct RecourseQuery {
  Vector x0;
  double lambda = 0.1;
  LossKind loss = LossKind::BinaryCrossEntropy;
  CostSpec cost;
  std::vector<bool> immutable;  // empty means every feature may change

  std::size_t dim() const { return x0.size(); }
  bool is_immutable(std::size_t i) const { return !immutable.empty() && immutable[i]; }
  /// Checks finiteness, lambda >= 0, positive cost weights and matching lengths.
  void validate() const;
};

// +1 for s >= 0, -1 otherwise.
inline double sign(double s) { return s >= 0.0 ? 1.0 : -1.0; }

double sigmoid(double s);
double link(LinkKind kind, double s);

double score(const ModelParams& theta, std::span<const double> x);

double eval_loss(LossKind loss, double s);
/// d/ds of eval_loss. Always <= 0.
double loss_derivative(LossKind loss, double s);

/// Weighted L1 distance sum_i w_i |x'[i] - x0[i]|.
double weighted_l1(const RecourseQuery& q, std::span<const double> x_prime);

/// J(x', theta) = loss(score) + lambda * weighted L1 distance to x0.
double eval_total_cost(const RecourseQuery& q, std::span<const double> x_prime,
                       const ModelParams& theta);

// ---------------------------------------------------------------------------
// Non-convexity witness.
//
// The worst-case objective max_theta J is a pointwise maximum of functions that
// are convex in x' whenever the loss is convex in the score, so for both
// LossKind values it is convex. It stops being convex once the loss is taken on
// the sigmoid probability instead, e.g. (1 - sigmoid(s))^2. The construction
// below is the one-feature example with a fixed intercept input of 1:
// x0 = 1, theta0 = (0, 0), alpha = 0.5, lambda = 1.

struct MidpointViolation {
  double a = 0.0;
  double b = 0.0;
  double gap = 0.0;  // f((a+b)/2) - (f(a)+f(b))/2, positive
};

/// Worst-case objective of the example with loss (1 - sigmoid(score))^2.
double squared_probability_example_objective(double x);
/// Same example with an arbitrary LossKind on the score.
double example_objective(LossKind loss, double x);

/// Scans pairs on a regular grid of [lo, hi] and returns the largest midpoint
/// convexity violation above `slack`, if any.
std::optional<MidpointViolation> find_midpoint_violation(
    const std::function<double(double)>& f, double lo, double hi, double step,
    double slack = 1e-9);

}  // namespace recourse
