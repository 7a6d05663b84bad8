#include "recourse/models.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "recourse/errors.hpp"

namespace recourse {

GlmScorer::GlmScorer(ModelParams params, LinkKind link) : params_(std::move(params)), link_(link) {
  params_.validate();
}

double GlmScorer::probability(std::span<const double> x) const { return link(link_, score(params_, x)); }

void MlpWeights::validate() const {
  if (layers.empty()) throw DimensionError("mlp: no layers");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& layer = layers[l];
    const std::string where = "mlp layer " + std::to_string(l);
    if (layer.w.empty()) throw DimensionError(where + ": empty weight matrix");
    if (layer.b.size() != layer.outputs()) {
      throw DimensionError(where + ": bias length " + std::to_string(layer.b.size()) +
                           " does not match " + std::to_string(layer.outputs()) + " outputs");
    }
    for (const auto& row : layer.w) {
      if (row.size() != layer.inputs()) throw DimensionError(where + ": ragged weight matrix");
    }
    if (l > 0 && layer.inputs() != layers[l - 1].outputs()) {
      throw DimensionError(where + ": expects " + std::to_string(layer.inputs()) + " inputs but layer " +
                           std::to_string(l - 1) + " produces " + std::to_string(layers[l - 1].outputs()));
    }
  }
  if (layers.back().outputs() != 1) throw DimensionError("mlp: final layer must have a single output");
}

double mlp_logit(const MlpWeights& w, std::span<const double> x) {
  if (w.layers.empty()) throw DimensionError("mlp: no layers");
  if (x.size() != w.input_dim()) {
    throw DimensionError("mlp layer 0: input length " + std::to_string(x.size()) + ", expected " +
                         std::to_string(w.input_dim()));
  }
  Vector act(x.begin(), x.end());
  Vector next;
  for (std::size_t l = 0; l < w.layers.size(); ++l) {
    const auto& layer = w.layers[l];
    if (layer.inputs() != act.size()) {
      throw DimensionError("mlp layer " + std::to_string(l) + ": input length " +
                           std::to_string(act.size()) + ", expected " + std::to_string(layer.inputs()));
    }
    next.assign(layer.outputs(), 0.0);
    for (std::size_t o = 0; o < layer.outputs(); ++o) {
      double z = layer.b[o];
      for (std::size_t i = 0; i < act.size(); ++i) z += layer.w[o][i] * act[i];
      next[o] = (l + 1 < w.layers.size()) ? std::max(0.0, z) : z;
    }
    act.swap(next);
  }
  return act.at(0);
}

double mlp_forward(const MlpWeights& w, std::span<const double> x) { return sigmoid(mlp_logit(w, x)); }

MlpScorer::MlpScorer(MlpWeights weights) : weights_(std::move(weights)) { weights_.validate(); }

double MlpScorer::probability(std::span<const double> x) const { return mlp_forward(weights_, x); }

int predict_label(const BlackBoxScorer& scorer, std::span<const double> x) {
  return scorer.probability(x) >= 0.5 ? 1 : 0;
}

namespace {

struct Objective {
  double value = 0.0;
  Vector grad_w;
  double grad_b = 0.0;
};

Objective logistic_objective(const Dataset& data, const ModelParams& p, double l2) {
  const std::size_t d = p.dim();
  Objective obj;
  obj.grad_w.assign(d, 0.0);
  const double n = static_cast<double>(data.size());
  for (std::size_t r = 0; r < data.size(); ++r) {
    const double s = score(p, data.features[r]);
    // Cross entropy for label y with logit s: log(1+e^-s) if y=1, log(1+e^s) if y=0.
    const double signed_s = data.labels[r] == 1 ? s : -s;
    obj.value += eval_loss(LossKind::BinaryCrossEntropy, signed_s);
    const double residual = sigmoid(s) - static_cast<double>(data.labels[r]);
    for (std::size_t j = 0; j < d; ++j) obj.grad_w[j] += residual * data.features[r][j];
    obj.grad_b += residual;
  }
  obj.value /= n;
  obj.grad_b /= n;
  double sq = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    obj.grad_w[j] = obj.grad_w[j] / n + l2 * p.weights[j];
    sq += p.weights[j] * p.weights[j];
  }
  obj.value += 0.5 * l2 * sq;
  return obj;
}

double inf_norm(const Objective& o) {
  double m = std::abs(o.grad_b);
  for (double g : o.grad_w) m = std::max(m, std::abs(g));
  return m;
}

}  // namespace

TrainResult train_logistic_traced(const Dataset& data, const TrainConfig& cfg) {
  data.validate();
  if (data.size() == 0) throw DataError("train_logistic: empty dataset");
  const bool has0 = std::find(data.labels.begin(), data.labels.end(), 0) != data.labels.end();
  const bool has1 = std::find(data.labels.begin(), data.labels.end(), 1) != data.labels.end();
  if (!has0 || !has1) throw DataError("train_logistic: both labels must be present");
  if (!(cfg.learning_rate > 0.0) || cfg.max_epochs <= 0 || cfg.l2_penalty < 0.0 || !(cfg.tolerance > 0.0)) {
    throw InvalidInput("train_logistic: invalid training configuration");
  }

  TrainResult res;
  res.params.weights.assign(data.dim(), 0.0);
  Objective cur = logistic_objective(data, res.params, cfg.l2_penalty);
  res.loss_history.push_back(cur.value);
  double step = cfg.learning_rate;

  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    if (inf_norm(cur) < cfg.tolerance) {
      res.converged = true;
      break;
    }
    // Halve until the objective does not increase; 60 halvings reaches ~1e-19.
    for (int attempt = 0; attempt < 60; ++attempt) {
      ModelParams cand = res.params;
      for (std::size_t j = 0; j < cand.dim(); ++j) cand.weights[j] -= step * cur.grad_w[j];
      cand.intercept -= step * cur.grad_b;
      Objective next = logistic_objective(data, cand, cfg.l2_penalty);
      if (next.value <= cur.value) {
        res.params = std::move(cand);
        cur = std::move(next);
        break;
      }
      step *= 0.5;
    }
    res.loss_history.push_back(cur.value);
    res.epochs = epoch + 1;
  }
  if (!res.converged && inf_norm(cur) < cfg.tolerance) res.converged = true;
  return res;
}

ModelParams train_logistic(const Dataset& data, const TrainConfig& cfg) {
  return train_logistic_traced(data, cfg).params;
}

double accuracy(const BlackBoxScorer& scorer, const Dataset& data) {
  if (data.size() == 0) return 0.0;
  std::size_t hits = 0;
  for (std::size_t r = 0; r < data.size(); ++r) {
    if (predict_label(scorer, data.features[r]) == data.labels[r]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

}  // namespace recourse
