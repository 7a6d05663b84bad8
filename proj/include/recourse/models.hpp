#pragma once

#include <memory>
#include <vector>

#include "recourse/data.hpp"
#include "recourse/glm.hpp"

namespace recourse {

/// Anything that maps a feature vector to the probability of label 1.
class BlackBoxScorer {
 public:
  virtual ~BlackBoxScorer() = default;
  virtual double probability(std::span<const double> x) const = 0;
  virtual std::size_t dim() const = 0;
};

class GlmScorer final : public BlackBoxScorer {
 public:
  explicit GlmScorer(ModelParams params, LinkKind link = LinkKind::Sigmoid);

  double probability(std::span<const double> x) const override;
  std::size_t dim() const override { return params_.dim(); }
  const ModelParams& params() const { return params_; }
  LinkKind link_kind() const { return link_; }

 private:
  ModelParams params_;
  LinkKind link_;
};

struct DenseLayer {
  std::vector<Vector> w;  // out x in
  Vector b;               // out

  std::size_t inputs() const { return w.empty() ? 0 : w.front().size(); }
  std::size_t outputs() const { return w.size(); }
};

/// Feed-forward network: ReLU on hidden layers, sigmoid on the single output.
struct MlpWeights {
  std::vector<DenseLayer> layers;

  std::size_t input_dim() const { return layers.empty() ? 0 : layers.front().inputs(); }
  /// Throws DimensionError naming the first layer whose shape does not chain.
  void validate() const;
};

/// Pre-sigmoid output of the network.
double mlp_logit(const MlpWeights& w, std::span<const double> x);
double mlp_forward(const MlpWeights& w, std::span<const double> x);

class MlpScorer final : public BlackBoxScorer {
 public:
  explicit MlpScorer(MlpWeights weights);

  double probability(std::span<const double> x) const override;
  std::size_t dim() const override { return weights_.input_dim(); }
  const MlpWeights& weights() const { return weights_; }

 private:
  MlpWeights weights_;
};

/// 1 iff probability >= 0.5; the boundary itself counts as the desirable label.
int predict_label(const BlackBoxScorer& scorer, std::span<const double> x);

struct TrainConfig {
  double learning_rate = 0.1;
  int max_epochs = 500;
  double l2_penalty = 1e-4;
  double tolerance = 1e-6;  // on the gradient infinity norm
};

struct TrainResult {
  ModelParams params;
  std::vector<double> loss_history;  // objective after each accepted epoch, starting at the init
  int epochs = 0;
  bool converged = false;
};

/// Full-batch gradient descent on mean cross entropy + l2_penalty/2 * |w|^2.
/// The step is halved whenever it would increase the objective, so the
/// recorded history is non-increasing.
TrainResult train_logistic_traced(const Dataset& data, const TrainConfig& cfg = {});
ModelParams train_logistic(const Dataset& data, const TrainConfig& cfg = {});

double accuracy(const BlackBoxScorer& scorer, const Dataset& data);

}  // namespace recourse
