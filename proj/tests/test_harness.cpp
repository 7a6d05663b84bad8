#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "recourse/errors.hpp"
#include "recourse/harness.hpp"
#include "recourse/json_io.hpp"
#include "test_util.hpp"

using namespace recourse;
using testutil::scratch;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> read_rows(const std::string& path) {
  std::vector<std::vector<std::string>> rows;
  std::stringstream ss(slurp(path));
  std::string line;
  std::getline(ss, line);  // header
  while (std::getline(ss, line)) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

ExperimentConfig small_config(const std::string& out) {
  ExperimentConfig cfg;
  cfg.dataset.synthetic.n_points = 200;
  cfg.folds = 2;
  cfg.max_instances_per_fold = 8;
  cfg.beta_grid = {0.0, 0.5, 1.0};
  cfg.validity_alphas = {0.05, 0.1, 0.2};
  cfg.validity_lambdas = {0.05, 0.2};
  cfg.ascent.steps = 200;
  cfg.roar.max_iters = 500;
  cfg.emit_plans = true;
  cfg.seed = 13;
  cfg.out_dir = scratch(out);
  return cfg;
}

RecourseQuery query_of(const json& rec) {
  RecourseQuery q;
  q.x0 = rec.at("x0").get<Vector>();
  q.lambda = rec.at("lambda").get<double>();
  q.loss = rec.at("loss") == "bce" ? LossKind::BinaryCrossEntropy : LossKind::Squared;
  return q;
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("config defaults and parsing") {
  const ExperimentConfig d = config_from_json(json::object());
  CHECK(d.lambda_grid == Vector{0.05, 0.1, 0.2, 0.5, 0.7, 1.0});
  CHECK(d.beta_grid.size() == 11);
  CHECK(d.validity_alphas.size() == 10);
  CHECK(d.validity_alphas.back() == doctest::Approx(0.2));
  CHECK(d.folds == 5);
  CHECK_FALSE(d.alpha.has_value());

  const ExperimentConfig c = config_from_json(json::parse(R"({
    "dataset": {"kind": "csv", "path": "x.csv", "label_column": "y"},
    "model": "mlp", "mlp_path": "net.json", "alpha": 0.3, "loss": "squared",
    "predictions": {"mode": "explicit", "list": [{"weights": [1, 2], "intercept": 0}]},
    "train": {"max_epochs": 10}, "blend": {"max_rounds": 3}})"));
  CHECK(c.dataset.kind == "csv");
  CHECK(c.dataset.name == "x");
  CHECK(c.model == ModelKind::MlpSurrogate);
  CHECK(*c.alpha == 0.3);
  CHECK(c.loss == LossKind::Squared);
  CHECK(c.predictions.mode == PredictionMode::Explicit);
  CHECK(c.predictions.explicit_list.size() == 1);
  CHECK(c.train.max_epochs == 10);
  CHECK(c.blend.max_rounds == 3);
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(config_from_json(json::parse(R"({"lamda_grid": [0.1]})")), ConfigError);
  CHECK_THROWS_AS(config_from_json(json::parse(R"({"lambda_grid": []})")), ConfigError);
  CHECK_THROWS_AS(config_from_json(json::parse(R"({"alpha": -1})")), ConfigError);
  CHECK_THROWS_AS(config_from_json(json::parse(R"({"beta_grid": [0, 1.5]})")), ConfigError);
  CHECK_THROWS_AS(config_from_json(json::parse(R"({"model": "forest"})")), ConfigError);
  CHECK_THROWS_AS(config_from_json(json::parse(R"({"folds": "five"})")), ConfigError);
  CHECK_THROWS_AS(config_from_json(json::parse(R"({"dataset": {"kind": "parquet"}})")), ConfigError);
  CHECK_THROWS_AS(load_config(scratch("no_such_config.json")), ConfigError);
}

TEST_CASE("config paths resolve against the config file") {
  std::filesystem::create_directories(scratch("cfgdir"));
  std::ofstream(scratch("cfgdir/c.json")) << R"({"dataset": {"kind": "csv", "path": "d.csv"}, "mlp_path": "/abs/net.json"})";
  const ExperimentConfig c = load_config(scratch("cfgdir/c.json"));
  CHECK(c.dataset.path == std::filesystem::path(scratch("cfgdir/d.csv")).lexically_normal().string());
  CHECK(c.mlp_path == "/abs/net.json");
}

TEST_CASE("corner predictions") {
  const Neighborhood n{ModelParams{{1.0, -1.0}, 0.2}, 0.5};
  const auto preds = make_predictions({}, n);
  REQUIRE(preds.size() == 5);
  CHECK(preds[0].name == "theta0");
  CHECK(preds[1].params.weights == Vector{1.5, -0.5});
  CHECK(preds[2].params.weights == Vector{0.5, -1.5});
  CHECK(preds[3].params.weights == Vector{1.5, -1.5});
  CHECK(preds[4].params.weights == Vector{0.5, -0.5});
  for (const auto& p : preds) {
    CHECK(n.contains(p.params));
    CHECK(p.params.intercept == 0.2);
  }
  CHECK(make_predictions({}, Neighborhood{ModelParams{{1.0}, 0.0}, 0.5}).size() == 3);
}

TEST_CASE("epsilon predictions are clamped into the ball") {
  const Neighborhood n{ModelParams{{1.0, 1.0}, 0.0}, 1.0};
  PredictionSetSpec spec;
  spec.mode = PredictionMode::EpsilonPerturbations;
  CHECK_THROWS_AS(make_predictions(spec, n), ConfigError);
  const ModelParams correct{{1.8, 0.6}, 0.2};
  const auto preds = make_predictions(spec, n, correct);
  REQUIRE(preds.size() == 5);
  CHECK(preds[0].name == "correct");
  CHECK(preds[0].params.weights == correct.weights);
  // eps = 0.4, half of the L-inf distance 0.8.
  CHECK(preds[1].params.weights[0] == doctest::Approx(2.0));  // 2.2 clamped
  CHECK(preds[1].params.weights[1] == doctest::Approx(1.0));
  CHECK(preds[4].params.weights[1] == doctest::Approx(0.0));  // -0.2 clamped
  for (const auto& p : preds) CHECK(n.contains(p.params));
  spec.epsilon = 0.1;
  CHECK(make_predictions(spec, n, correct)[3].params.weights[1] == doctest::Approx(0.8));
}

TEST_CASE("explicit predictions") {
  const Neighborhood n{ModelParams{{0.0}, 0.0}, 0.5};
  PredictionSetSpec spec;
  spec.mode = PredictionMode::Explicit;
  CHECK_THROWS_AS(make_predictions(spec, n), ConfigError);
  spec.explicit_list = {ModelParams{{0.2}, 0.0}, ModelParams{{3.0}, 0.0}};
  const auto preds = make_predictions(spec, n);
  CHECK(preds[1].params.weights[0] == 0.5);
  spec.explicit_list = {ModelParams{{0.2, 0.1}, 0.0}};
  CHECK_THROWS_AS(make_predictions(spec, n), DimensionError);
}

TEST_CASE("trade-off study rows recompute from their plans") {
  const ExperimentConfig cfg = small_config("tradeoff_a");
  const StudyOutput out = run_tradeoff_study(cfg);
  REQUIRE(!out.plans_path.empty());
  const auto rows = read_rows(out.csv_path);
  REQUIRE(rows.size() == 5 * 3 + 5);

  std::map<std::string, std::pair<double, double>> sums;  // method|prediction|beta -> (R, C)
  std::map<std::string, int> counts;
  std::stringstream plans(slurp(out.plans_path));
  std::string line;
  std::size_t records = 0;
  while (std::getline(plans, line)) {
    const json rec = json::parse(line);
    const RecourseQuery q = query_of(rec);
    const Neighborhood n{rec.at("theta0").get<ModelParams>(), rec.at("alpha").get<double>()};
    const ModelParams pred = rec.at("prediction_params").get<ModelParams>();
    const RecoursePlan plan = rec.at("plan").get<RecoursePlan>();
    const double r = robustness(q, n, plan.x_prime), c = consistency(q, pred, plan.x_prime);
    CHECK(std::abs(r - rec.at("robustness").get<double>()) <= 1e-9);
    CHECK(std::abs(c - rec.at("consistency").get<double>()) <= 1e-9);
    CHECK(r >= -1e-9);
    CHECK(c >= -1e-9);
    const std::string key = rec.at("method").get<std::string>() + "|" + rec.at("prediction").get<std::string>() +
                            "|" + (rec.contains("beta") ? rec.at("beta").dump() : "");
    sums[key].first += r;
    sums[key].second += c;
    counts[key] += 1;
    ++records;
  }
  CHECK(records == 16 * (5 * 3 + 5));
  for (const auto& row : rows) {
    const std::string key = row[0] + "|" + row[1] + "|" + (row[2].empty() ? "" : json(std::stod(row[2])).dump());
    REQUIRE(counts.count(key));
    CHECK(std::abs(std::stod(row[3]) - sums[key].first / counts[key]) <= 1e-9);
    CHECK(std::abs(std::stod(row[4]) - sums[key].second / counts[key]) <= 1e-9);
    CHECK(row[6] == "16");
  }
  CHECK(std::filesystem::exists(out.svg_path));
  const json schema = read_json_file(out.schema_path);
  CHECK(schema.at("columns").size() == 7);
  const json summary = read_json_file(out.summary_path);
  CHECK(summary.at("folds").size() == 2);
}

TEST_CASE("studies are byte-identical across reruns") {
  ExperimentConfig cfg = small_config("determinism_a");
  const std::string a = slurp(run_tradeoff_study(cfg).csv_path);
  const std::string va = slurp(run_validity_study(cfg).csv_path);
  cfg.out_dir = scratch("determinism_b");
  cfg.threads = 3;
  CHECK(slurp(run_tradeoff_study(cfg).csv_path) == a);
  CHECK(slurp(run_validity_study(cfg).csv_path) == va);
  cfg.seed = 14;
  CHECK(slurp(run_tradeoff_study(cfg).csv_path) != a);
}

TEST_CASE("smoothness study zero point and coincidence at beta one") {
  const StudyOutput out = run_smoothness_study(small_config("smoothness"));
  const auto rows = read_rows(out.csv_path);
  REQUIRE(rows.size() == 15);
  std::vector<double> at_one;
  for (const auto& row : rows) {
    if (row[0] == "correct" && row[1] == "0") CHECK(std::abs(std::stod(row[2])) <= 1e-6);
    if (row[1] == "1") at_one.push_back(std::stod(row[2]));
    CHECK(std::stod(row[2]) >= -1e-9);
  }
  REQUIRE(at_one.size() == 5);
  for (double v : at_one) CHECK(std::abs(v - at_one[0]) <= 1e-6);
}

TEST_CASE("validity study pareto flags") {
  const StudyOutput out = run_validity_study(small_config("validity"));
  const auto rows = read_rows(out.csv_path);
  REQUIRE(rows.size() == 2 * 3 * 2);
  std::map<std::string, std::vector<std::pair<double, double>>> frontier;
  for (const auto& row : rows) {
    const double v = std::stod(row[3]);
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    if (row[6] == "1") frontier[row[0] + row[2]].emplace_back(v, std::stod(row[4]));
  }
  CHECK(!frontier.empty());
  for (auto& [key, pts] : frontier) {
    std::sort(pts.begin(), pts.end());
    for (std::size_t i = 1; i < pts.size(); ++i) CHECK(pts[i].second >= pts[i - 1].second);
  }
  // Plans carry the shared model they were scored against.
  std::stringstream plans(slurp(out.plans_path));
  std::string line;
  ModelParams shared;
  while (std::getline(plans, line)) {
    const json rec = json::parse(line);
    if (rec.at("record") == "shared_model") {
      shared = rec.at("shared_model").get<ModelParams>();
      continue;
    }
    const RecoursePlan plan = rec.at("plan").get<RecoursePlan>();
    CHECK(rec.at("valid").get<int>() == (score(shared, plan.x_prime) >= 0.0 ? 1 : 0));
  }
}

TEST_CASE("folds without undesirable instances are skipped with a warning") {
  std::filesystem::create_directories(RECOURSE_SCRATCH_DIR);
  const std::string path = scratch("mostly_positive.csv");
  {
    std::ofstream f(path);
    f << "a,label\n";
    for (int i = 0; i < 40; ++i) f << (i % 7) * 0.1 << "," << (i % 5 == 0 ? 0 : 1) << "\n";
  }
  ExperimentConfig cfg = small_config("skipped");
  cfg.dataset.kind = "csv";
  cfg.dataset.name = "mostly_positive";
  cfg.dataset.path = path;
  const StudyOutput out = run_tradeoff_study(cfg);
  CHECK(out.warnings.size() == 3);
  CHECK(read_rows(out.csv_path).empty());
}

TEST_CASE("missing inputs are reported as configuration or data errors") {
  ExperimentConfig cfg = small_config("errors");
  cfg.dataset.kind = "csv";
  CHECK_THROWS_AS(run_tradeoff_study(cfg), ConfigError);
  cfg.dataset.path = scratch("absent.csv");
  CHECK_THROWS_AS(run_tradeoff_study(cfg), DataError);
  ExperimentConfig mlp = small_config("errors");
  mlp.model = ModelKind::MlpSurrogate;
  CHECK_THROWS_AS(run_tradeoff_study(mlp), ConfigError);
  mlp.mlp_path = testutil::source("data/fixtures/mlp_synthetic.json");
  CHECK_THROWS_AS(run_smoothness_study(mlp), ConfigError);
}

TEST_CASE("network studies use per-instance surrogates") {
  ExperimentConfig cfg = small_config("mlp");
  cfg.model = ModelKind::MlpSurrogate;
  cfg.mlp_path = testutil::source("data/fixtures/mlp_synthetic.json");
  cfg.mlp_shifted_path = testutil::source("data/fixtures/mlp_synthetic_shifted.json");
  cfg.max_instances_per_fold = 3;
  cfg.surrogate.n_samples = 300;
  const StudyOutput t = run_tradeoff_study(cfg);
  for (const auto& row : read_rows(t.csv_path)) {
    if (row[0] == "blend" && row[2] == "1") CHECK(std::abs(std::stod(row[3])) <= 1e-12);
    if (row[0] == "blend" && row[2] == "0") CHECK(std::abs(std::stod(row[4])) <= 1e-12);
  }
  const StudyOutput s = run_smoothness_study(cfg);
  CHECK(read_rows(s.csv_path).size() == 15);
  const StudyOutput v = run_validity_study(cfg);
  CHECK(read_rows(v.csv_path).size() == 12);
}

}  // TEST_SUITE
