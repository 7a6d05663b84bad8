// Command-line front end: data generation, training, single recourse queries,
// the three studies and the oracle certification.

#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "recourse/errors.hpp"
#include "recourse/harness.hpp"
#include "recourse/json_io.hpp"
#include "recourse/solver.hpp"
#include "recourse/tradeoff.hpp"

using namespace recourse;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;

std::vector<double> parse_list(const std::string& text, const char* flag) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError(std::string(flag) + ": cannot parse '" + item + "' as a number");
    }
  }
  if (out.empty()) throw ConfigError(std::string(flag) + ": empty list");
  return out;
}

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
};

ExperimentConfig study_config(const Globals& g) {
  ExperimentConfig cfg = g.config.empty() ? ExperimentConfig{} : load_config(g.config);
  if (g.seed) cfg.seed = *g.seed;
  if (!g.out.empty()) cfg.out_dir = g.out;
  return cfg;
}

void report(const StudyOutput& out) {
  for (const auto& w : out.warnings) std::cerr << "warning: " << w << "\n";
  std::cout << out.csv_path << "\n" << out.svg_path << "\n";
  if (!out.plans_path.empty()) std::cout << out.plans_path << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust and prediction-aware algorithmic recourse"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "JSON experiment config");
  app.add_option("--seed", g.seed, "Global seed");
  app.add_option("--out", g.out, "Output directory (studies) or file (gen-data, train)");

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "Write the two-blob synthetic dataset as CSV");
  std::size_t gen_n = 1000;
  std::optional<double> gen_shift;
  gen->add_option("--n", gen_n, "Number of points")->check(CLI::PositiveNumber);
  gen->add_option("--shift", gen_shift, "Move the class-0 mean along the first feature");

  // train
  auto* train = app.add_subcommand("train", "Fit a logistic model to a CSV file");
  std::string train_data, label_column = "label", positive_label = "1";
  bool train_normalize = false;
  train->add_option("--data", train_data, "CSV with a header row")->required();
  train->add_option("--label-column", label_column, "Label column name");
  train->add_option("--positive-label", positive_label, "Label value meaning the desirable outcome");
  train->add_flag("--normalize", train_normalize, "Standardize features before training");

  // recourse
  auto* rec = app.add_subcommand("recourse", "Solve one recourse problem and print the plan as JSON");
  std::string theta_s, model_path, x0_s, weights_s, immutable_s, prediction_s, loss_s = "bce";
  double intercept = 0.0, alpha = 0.0, lambda = 0.1, prediction_intercept = 0.0;
  std::optional<double> beta;
  bool no_intercept_shift = false;
  rec->add_option("--theta", theta_s, "Comma-separated model weights");
  rec->add_option("--intercept", intercept, "Model intercept");
  rec->add_option("--model", model_path, "Model JSON {weights, intercept}");
  rec->add_option("--x0", x0_s, "Comma-separated instance")->required();
  rec->add_option("--alpha", alpha, "Radius of the parameter ball");
  rec->add_option("--lambda", lambda, "Cost weight");
  rec->add_option("--loss", loss_s, "bce or squared");
  rec->add_option("--weights", weights_s, "Comma-separated per-feature cost weights");
  rec->add_option("--immutable", immutable_s, "Comma-separated indices of features that cannot change");
  rec->add_flag("--no-intercept-shift", no_intercept_shift, "Keep the intercept fixed inside the ball");
  rec->add_option("--prediction", prediction_s, "Comma-separated predicted weights");
  rec->add_option("--prediction-intercept", prediction_intercept, "Predicted intercept");
  rec->add_option("--beta", beta, "Trust in the worst case, in [0, 1]; requires --prediction");

  auto* pareto = app.add_subcommand("pareto", "Robustness/consistency trade-off study");
  auto* smooth = app.add_subcommand("smoothness", "Smoothness study");
  auto* valid = app.add_subcommand("validity", "Worst-case validity study");

  auto* oracle = app.add_subcommand("oracle-check", "Certify the exact solver against the grid oracle");
  std::size_t oracle_n = 200;
  oracle->add_option("--instances", oracle_n, "Number of random instances");

  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (gen->parsed()) {
      SyntheticSpec spec;
      spec.n_points = gen_n;
      spec.seed = g.seed.value_or(0);
      const Dataset ds = gen_shift ? shifted_synthetic(spec, *gen_shift) : generate_synthetic(spec);
      const std::string path = g.out.empty() ? "synthetic.csv" : g.out;
      write_csv(ds, path);
      std::cout << path << "\n";
    } else if (train->parsed()) {
      Dataset ds = ingest_csv(train_data, label_column, positive_label);
      json j;
      if (train_normalize) {
        ds = normalize(ds);
        j["normalization"] = {{"mean", ds.normalization->mean}, {"stddev", ds.normalization->stddev}};
      }
      ExperimentConfig cfg = study_config(g);
      const ModelParams p = train_logistic(ds, cfg.train);
      j["weights"] = p.weights;
      j["intercept"] = p.intercept;
      std::cerr << "training accuracy " << accuracy(GlmScorer(p), ds) << "\n";
      if (g.out.empty()) std::cout << j.dump(2) << "\n";
      else write_json_file(g.out, j);
    } else if (rec->parsed()) {
      RecourseQuery q;
      q.x0 = parse_list(x0_s, "--x0");
      q.lambda = lambda;
      if (loss_s == "bce") q.loss = LossKind::BinaryCrossEntropy;
      else if (loss_s == "squared") q.loss = LossKind::Squared;
      else throw ConfigError("--loss must be bce or squared, got '" + loss_s + "'");
      if (!weights_s.empty()) q.cost.weights = parse_list(weights_s, "--weights");
      if (!immutable_s.empty()) {
        q.immutable.assign(q.x0.size(), false);
        for (double idx : parse_list(immutable_s, "--immutable")) {
          if (idx < 0 || idx >= static_cast<double>(q.x0.size()) || idx != static_cast<long>(idx))
            throw ConfigError("--immutable: index " + std::to_string(idx) + " out of range");
          q.immutable[static_cast<std::size_t>(idx)] = true;
        }
      }
      ModelParams theta;
      if (!model_path.empty()) theta = load_model_params(model_path);
      else if (!theta_s.empty()) theta = ModelParams{parse_list(theta_s, "--theta"), intercept};
      else throw ConfigError("recourse needs --theta or --model");
      if (alpha < 0.0) throw ConfigError("--alpha must be >= 0");
      if (lambda < 0.0) throw ConfigError("--lambda must be >= 0");
      const Neighborhood n{theta, alpha, !no_intercept_shift};
      RecoursePlan plan;
      if (beta) {
        if (prediction_s.empty()) throw ConfigError("--beta requires --prediction");
        const ModelParams pred{parse_list(prediction_s, "--prediction"), prediction_intercept};
        plan = blended_recourse({q, n, pred, *beta});
      } else {
        plan = optimal_robust_recourse(q, n);
      }
      std::cout << json(plan).dump(2) << "\n";
    } else if (pareto->parsed()) {
      report(run_tradeoff_study(study_config(g)));
    } else if (smooth->parsed()) {
      report(run_smoothness_study(study_config(g)));
    } else if (valid->parsed()) {
      report(run_validity_study(study_config(g)));
    } else if (oracle->parsed()) {
      const auto r = run_oracle_check(oracle_n, g.seed.value_or(0));
      std::size_t covered = 0;
      for (const auto& c : r.cases) covered += c.grid_covers_optimum ? 1 : 0;
      std::printf("instances %zu, failures %zu, optimum provably inside the grid for %zu, %.2f s\n",
                  r.cases.size(), r.failures, covered, r.seconds);
      for (std::size_t k = 0; k < r.cases.size(); ++k) {
        const auto& c = r.cases[k];
        if (!c.passed)
          std::printf("FAIL case %zu: d=%zu alpha=%g lambda=%g solver=%.12g oracle=%.12g\n", k, c.dim, c.alpha,
                      c.lambda, c.solver_value, c.oracle_value);
      }
      return r.failures == 0 ? 0 : 1;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const RecourseError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  }
  return 0;
}
