#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "recourse/adversary.hpp"
#include "recourse/data.hpp"
#include "recourse/models.hpp"
#include "recourse/roar.hpp"
#include "recourse/surrogate.hpp"
#include "recourse/tradeoff.hpp"

namespace recourse {

enum class ModelKind { Glm, MlpSurrogate };

enum class PredictionMode {
  CornerPerturbations,   // theta0 and four +-alpha sign patterns on the weights
  EpsilonPerturbations,  // correct prediction and +-eps, +-2eps on every weight
  Explicit,
};

struct PredictionSetSpec {
  PredictionMode mode = PredictionMode::CornerPerturbations;
  double epsilon = 0.0;  // <= 0 derives it as half the L-inf distance from theta0 to the correct prediction
  std::vector<ModelParams> explicit_list;
};

struct NamedPrediction {
  std::string name;
  ModelParams params;
};

/// Builds the prediction set, every member clamped into the neighborhood.
/// `correct` is required for EpsilonPerturbations.
std::vector<NamedPrediction> make_predictions(const PredictionSetSpec& spec, const Neighborhood& n,
                                              const std::optional<ModelParams>& correct = std::nullopt);

struct DatasetSpec {
  std::string kind = "synthetic";  // "synthetic" or "csv"
  std::string name = "synthetic";
  SyntheticSpec synthetic;
  std::optional<double> shift;  // class-0 mean shift of the future-model data; defaults to alpha
  std::string path;
  std::string shifted_path;
  std::string label_column = "label";
  std::string positive_label = "1";
  std::optional<bool> normalize;  // default: csv yes, synthetic no
};

struct ExperimentConfig {
  DatasetSpec dataset;
  ModelKind model = ModelKind::Glm;
  std::string mlp_path;
  std::string mlp_shifted_path;
  LossKind loss = LossKind::BinaryCrossEntropy;

  std::optional<double> alpha;  // default 0.5 for trade-off, 1.0 for smoothness
  std::vector<double> lambda_grid{0.05, 0.1, 0.2, 0.5, 0.7, 1.0};
  std::vector<double> beta_grid{0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  PredictionSetSpec predictions;
  std::vector<double> validity_alphas{0.02, 0.04, 0.06, 0.08, 0.1, 0.12, 0.14, 0.16, 0.18, 0.2};
  std::vector<double> validity_lambdas{0.05, 0.1, 0.2};

  std::size_t folds = 5;
  std::uint64_t seed = 0;
  std::size_t max_instances_per_fold = 0;  // 0 keeps every undesirable instance
  std::size_t threads = 0;                 // 0 uses the hardware concurrency
  std::string out_dir = "results";
  bool emit_plans = false;

  TrainConfig train;
  RoarConfig roar;
  AscentConfig ascent;
  SurrogateConfig surrogate;
  BlendConfig blend;

  /// Throws ConfigError on empty grids, negative alpha and similar.
  void validate() const;
};

ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

struct StudyOutput {
  std::string csv_path;
  std::string svg_path;
  std::string schema_path;
  std::string summary_path;
  std::string plans_path;  // empty unless emit_plans
  std::vector<std::string> warnings;
  nlohmann::json summary;
};

/// Robustness/consistency frontier per prediction, plus ROAR reference points.
StudyOutput run_tradeoff_study(const ExperimentConfig& cfg);
/// Realized cost under the correct prediction as a function of beta, per prediction.
StudyOutput run_smoothness_study(const ExperimentConfig& cfg);
/// Worst-case validity against cost over the alpha x lambda sweep, for the exact
/// solver and ROAR.
StudyOutput run_validity_study(const ExperimentConfig& cfg);

struct OracleCase {
  std::size_t dim = 0;
  double alpha = 0.0;
  double lambda = 0.0;
  double solver_value = 0.0;
  double oracle_value = 0.0;
  bool grid_covers_optimum = false;  // certified radius fits inside the default x0 +- 5 grid
  bool passed = false;
};

struct OracleCheckReport {
  std::vector<OracleCase> cases;
  std::size_t failures = 0;
  double seconds = 0.0;
};

/// Certifies the exact solver against the grid oracle on random instances:
/// d cycles over {1,2,3}, alpha over {0.1,0.5}, lambda over {0.05,0.3,1};
/// base weights and intercept uniform in [-1,1], x0 uniform in [-2,2]^d.
/// The grid spans x0 +- max(5, F(x0) / lambda) so it always contains the
/// optimum. A case passes when oracle - 1e-9 <= solver <= oracle + 1e-2.
OracleCheckReport run_oracle_check(std::size_t instances, std::uint64_t seed);

}  // namespace recourse
