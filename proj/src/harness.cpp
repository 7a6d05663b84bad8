#include "recourse/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "recourse/errors.hpp"
#include "recourse/json_io.hpp"
#include "recourse/svg.hpp"

namespace fs = std::filesystem;

namespace recourse {

namespace {

template <class F>
void parallel_for(std::size_t n, std::size_t threads, F&& body) {
  if (threads == 0) threads = std::max(1U, std::thread::hardware_concurrency());
  threads = std::min(threads, n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          next.store(n);
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// --------------------------------------------------------------------------
// Config parsing

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

template <class T>
void read_field(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

std::string resolve_path(const std::string& p, const fs::path& base) {
  if (p.empty() || base.empty()) return p;
  const fs::path path(p);
  return path.is_absolute() ? p : (base / path).lexically_normal().string();
}

ExperimentConfig parse_config(const json& j) {
  ExperimentConfig cfg;
  reject_unknown(j,
                 {"dataset", "model", "mlp_path", "mlp_shifted_path", "loss", "alpha", "lambda_grid",
                  "beta_grid", "predictions", "validity_alphas", "validity_lambdas", "folds", "seed",
                  "max_instances_per_fold", "threads", "out", "emit_plans", "train", "roar", "ascent",
                  "surrogate", "blend"},
                 "config");
  if (j.contains("dataset")) {
    const json& d = j.at("dataset");
    reject_unknown(d,
                   {"kind", "name", "n_points", "shift", "path", "shifted_path", "label_column",
                    "positive_label", "normalize"},
                   "config.dataset");
    auto& ds = cfg.dataset;
    read_field(d, "kind", ds.kind);
    if (ds.kind != "synthetic" && ds.kind != "csv")
      throw ConfigError("config.dataset.kind must be 'synthetic' or 'csv', got '" + ds.kind + "'");
    ds.name = ds.kind == "synthetic" ? "synthetic" : "";
    read_field(d, "name", ds.name);
    read_field(d, "n_points", ds.synthetic.n_points);
    if (d.contains("shift")) ds.shift = d.at("shift").get<double>();
    read_field(d, "path", ds.path);
    read_field(d, "shifted_path", ds.shifted_path);
    read_field(d, "label_column", ds.label_column);
    read_field(d, "positive_label", ds.positive_label);
    if (d.contains("normalize")) ds.normalize = d.at("normalize").get<bool>();
    if (ds.name.empty()) ds.name = fs::path(ds.path).stem().string();
  }
  if (j.contains("model")) {
    const auto m = j.at("model").get<std::string>();
    if (m == "glm") cfg.model = ModelKind::Glm;
    else if (m == "mlp") cfg.model = ModelKind::MlpSurrogate;
    else throw ConfigError("config.model must be 'glm' or 'mlp', got '" + m + "'");
  }
  read_field(j, "mlp_path", cfg.mlp_path);
  read_field(j, "mlp_shifted_path", cfg.mlp_shifted_path);
  if (j.contains("loss")) {
    const auto l = j.at("loss").get<std::string>();
    if (l == "bce") cfg.loss = LossKind::BinaryCrossEntropy;
    else if (l == "squared") cfg.loss = LossKind::Squared;
    else throw ConfigError("config.loss must be 'bce' or 'squared', got '" + l + "'");
  }
  if (j.contains("alpha")) cfg.alpha = j.at("alpha").get<double>();
  read_field(j, "lambda_grid", cfg.lambda_grid);
  read_field(j, "beta_grid", cfg.beta_grid);
  if (j.contains("predictions")) {
    const json& p = j.at("predictions");
    reject_unknown(p, {"mode", "epsilon", "list"}, "config.predictions");
    if (p.contains("mode")) {
      const auto m = p.at("mode").get<std::string>();
      if (m == "corners") cfg.predictions.mode = PredictionMode::CornerPerturbations;
      else if (m == "epsilon") cfg.predictions.mode = PredictionMode::EpsilonPerturbations;
      else if (m == "explicit") cfg.predictions.mode = PredictionMode::Explicit;
      else throw ConfigError("config.predictions.mode must be corners, epsilon or explicit, got '" + m + "'");
    }
    read_field(p, "epsilon", cfg.predictions.epsilon);
    if (p.contains("list")) cfg.predictions.explicit_list = p.at("list").get<std::vector<ModelParams>>();
  }
  read_field(j, "validity_alphas", cfg.validity_alphas);
  read_field(j, "validity_lambdas", cfg.validity_lambdas);
  read_field(j, "folds", cfg.folds);
  read_field(j, "seed", cfg.seed);
  read_field(j, "max_instances_per_fold", cfg.max_instances_per_fold);
  read_field(j, "threads", cfg.threads);
  read_field(j, "out", cfg.out_dir);
  read_field(j, "emit_plans", cfg.emit_plans);
  if (j.contains("train")) {
    const json& t = j.at("train");
    reject_unknown(t, {"learning_rate", "max_epochs", "l2_penalty", "tolerance"}, "config.train");
    read_field(t, "learning_rate", cfg.train.learning_rate);
    read_field(t, "max_epochs", cfg.train.max_epochs);
    read_field(t, "l2_penalty", cfg.train.l2_penalty);
    read_field(t, "tolerance", cfg.train.tolerance);
  }
  if (j.contains("roar")) {
    const json& r = j.at("roar");
    reject_unknown(r, {"learning_rate", "max_iters", "tolerance"}, "config.roar");
    read_field(r, "learning_rate", cfg.roar.learning_rate);
    read_field(r, "max_iters", cfg.roar.max_iters);
    read_field(r, "tolerance", cfg.roar.tolerance);
  }
  if (j.contains("ascent")) {
    const json& a = j.at("ascent");
    reject_unknown(a, {"learning_rate", "steps"}, "config.ascent");
    read_field(a, "learning_rate", cfg.ascent.learning_rate);
    read_field(a, "steps", cfg.ascent.steps);
  }
  if (j.contains("surrogate")) {
    const json& s = j.at("surrogate");
    reject_unknown(s, {"n_samples", "stddev", "kernel_width", "ridge"}, "config.surrogate");
    read_field(s, "n_samples", cfg.surrogate.n_samples);
    read_field(s, "stddev", cfg.surrogate.stddev);
    read_field(s, "kernel_width", cfg.surrogate.kernel_width);
    read_field(s, "ridge", cfg.surrogate.ridge);
  }
  if (j.contains("blend")) {
    const json& b = j.at("blend");
    reject_unknown(b, {"steps", "max_rounds", "min_improvement"}, "config.blend");
    read_field(b, "steps", cfg.blend.steps);
    read_field(b, "max_rounds", cfg.blend.max_rounds);
    read_field(b, "min_improvement", cfg.blend.min_improvement);
  }
  return cfg;
}

// --------------------------------------------------------------------------
// Data and per-fold setup

struct LoadedData {
  Dataset data;
  std::optional<Dataset> shifted;
  std::optional<MlpWeights> mlp;
  std::optional<MlpWeights> mlp_shifted;
  bool normalize = false;
};

std::string model_name(const ExperimentConfig& cfg) { return cfg.model == ModelKind::Glm ? "glm" : "mlp"; }

LoadedData load_data(const ExperimentConfig& cfg, bool need_shifted, double shift) {
  LoadedData out;
  const auto& ds = cfg.dataset;
  if (ds.kind == "synthetic") {
    SyntheticSpec spec = ds.synthetic;
    spec.seed = cfg.seed;
    out.data = generate_synthetic(spec);
    if (need_shifted) out.shifted = shifted_synthetic(spec, shift);
  } else {
    if (ds.path.empty()) throw ConfigError("config.dataset.path is required for csv datasets");
    out.data = ingest_csv(ds.path, ds.label_column, ds.positive_label);
    if (need_shifted && cfg.model == ModelKind::Glm) {
      if (ds.shifted_path.empty())
        throw ConfigError("config.dataset.shifted_path is required to train the correct prediction");
      out.shifted = ingest_csv(ds.shifted_path, ds.label_column, ds.positive_label);
      if (out.shifted->dim() != out.data.dim())
        throw DataError("shifted dataset has " + std::to_string(out.shifted->dim()) + " features, expected " +
                        std::to_string(out.data.dim()));
    }
  }
  out.normalize = ds.normalize.value_or(ds.kind == "csv" && cfg.model == ModelKind::Glm);
  if (cfg.model == ModelKind::MlpSurrogate) {
    if (cfg.mlp_path.empty()) throw ConfigError("config.mlp_path is required for model 'mlp'");
    out.mlp = load_mlp(cfg.mlp_path);
    if (out.mlp->input_dim() != out.data.dim())
      throw DataError("network expects " + std::to_string(out.mlp->input_dim()) + " features, dataset has " +
                      std::to_string(out.data.dim()));
    if (need_shifted) {
      if (cfg.mlp_shifted_path.empty())
        throw ConfigError("config.mlp_shifted_path is required for the correct prediction with model 'mlp'");
      out.mlp_shifted = load_mlp(cfg.mlp_shifted_path);
      if (out.mlp_shifted->input_dim() != out.data.dim())
        throw DataError("shifted network input size does not match the dataset");
    }
  }
  if (cfg.folds > out.data.size())
    throw ConfigError("folds = " + std::to_string(cfg.folds) + " exceeds the " +
                      std::to_string(out.data.size()) + " rows of the dataset");
  return out;
}

struct Instance {
  std::size_t row = 0;  // row in the full dataset
  Vector x0;
  ModelParams theta0;  // GLM parameters or the local surrogate
  std::optional<ModelParams> correct;
};

struct FoldSetup {
  std::size_t fold = 0;
  std::shared_ptr<const BlackBoxScorer> scorer;
  std::optional<ModelParams> glm;
  double test_accuracy = 0.0;
  std::size_t test_rows = 0;
  std::vector<Instance> instances;
};

std::vector<FoldSetup> build_folds(const ExperimentConfig& cfg, const LoadedData& ld, std::optional<double> correct_alpha) {
  const FoldPlan plan = kfold(ld.data.size(), cfg.folds, derive_seed(cfg.seed, 1));
  std::vector<FoldSetup> folds(cfg.folds);
  for (std::size_t f = 0; f < cfg.folds; ++f) {
    FoldSetup& fs = folds[f];
    fs.fold = f;
    const auto train_rows = plan.train_rows(f);
    const auto test_rows = plan.test_rows(f);
    Dataset train = ld.data.subset(train_rows);
    Dataset test = ld.data.subset(test_rows);
    std::optional<NormalizationStats> stats;
    if (ld.normalize) {
      stats = fit_normalization(train);
      train = apply_normalization(train, *stats);
      test = apply_normalization(test, *stats);
    }
    if (cfg.model == ModelKind::Glm) {
      // A single-fold plan trains and tests on the same rows.
      fs.glm = train_logistic(train.size() ? train : test, cfg.train);
      fs.scorer = std::make_shared<GlmScorer>(*fs.glm);
    } else {
      fs.scorer = std::make_shared<MlpScorer>(*ld.mlp);
    }
    fs.test_rows = test.size();
    fs.test_accuracy = accuracy(*fs.scorer, test);

    std::optional<ModelParams> correct_glm;
    if (correct_alpha && cfg.model == ModelKind::Glm) {
      Dataset shifted = ld.shifted->size() == ld.data.size() && train_rows.size()
                            ? ld.shifted->subset(train_rows)
                            : *ld.shifted;
      if (stats) shifted = apply_normalization(shifted, *stats);
      correct_glm = Neighborhood{*fs.glm, *correct_alpha}.clamp(train_logistic(shifted, cfg.train));
    }
    std::optional<MlpScorer> shifted_scorer;
    if (correct_alpha && cfg.model == ModelKind::MlpSurrogate) shifted_scorer.emplace(*ld.mlp_shifted);

    for (std::size_t i = 0; i < test.size(); ++i) {
      if (cfg.max_instances_per_fold && fs.instances.size() >= cfg.max_instances_per_fold) break;
      if (predict_label(*fs.scorer, test.features[i]) != 0) continue;
      Instance inst;
      inst.row = test_rows[i];
      inst.x0 = test.features[i];
      fs.instances.push_back(std::move(inst));
    }
    // Surrogates are the expensive part of the MLP path.
    parallel_for(fs.instances.size(), cfg.threads, [&](std::size_t k) {
      Instance& inst = fs.instances[k];
      if (cfg.model == ModelKind::Glm) {
        inst.theta0 = *fs.glm;
        inst.correct = correct_glm;
      } else {
        SurrogateConfig sc = cfg.surrogate;
        sc.seed = derive_seed(cfg.seed, 1000 + inst.row);
        inst.theta0 = fit_local_linear(*fs.scorer, inst.x0, sc);
        if (shifted_scorer)
          inst.correct = Neighborhood{inst.theta0, *correct_alpha}.clamp(fit_local_linear(*shifted_scorer, inst.x0, sc));
      }
    });
  }
  return folds;
}

RecourseQuery make_query(const ExperimentConfig& cfg, const Vector& x0, double lambda) {
  RecourseQuery q;
  q.x0 = x0;
  q.lambda = lambda;
  q.loss = cfg.loss;
  return q;
}

struct LambdaChoice {
  double lambda = 0.0;
  std::vector<std::size_t> valid_counts;  // per grid entry
};

// Largest validity of x_r under the fold's own model; ties go to the larger lambda.
LambdaChoice select_lambda(const ExperimentConfig& cfg, const FoldSetup& fs, double alpha) {
  LambdaChoice choice;
  choice.valid_counts.assign(cfg.lambda_grid.size(), 0);
  std::vector<std::vector<int>> valid(cfg.lambda_grid.size(), std::vector<int>(fs.instances.size(), 0));
  parallel_for(fs.instances.size(), cfg.threads, [&](std::size_t k) {
    const Instance& inst = fs.instances[k];
    for (std::size_t l = 0; l < cfg.lambda_grid.size(); ++l) {
      const auto plan = optimal_robust_recourse(make_query(cfg, inst.x0, cfg.lambda_grid[l]),
                                                Neighborhood{inst.theta0, alpha}, cfg.blend.solver);
      valid[l][k] = predict_label(*fs.scorer, plan.x_prime);
    }
  });
  std::size_t best = 0;
  for (std::size_t l = 0; l < cfg.lambda_grid.size(); ++l) {
    for (int v : valid[l]) choice.valid_counts[l] += static_cast<std::size_t>(v);
    const bool better = choice.valid_counts[l] > choice.valid_counts[best] ||
                        (choice.valid_counts[l] == choice.valid_counts[best] &&
                         cfg.lambda_grid[l] > cfg.lambda_grid[best]);
    if (better) best = l;
  }
  choice.lambda = cfg.lambda_grid[best];
  return choice;
}

// --------------------------------------------------------------------------
// Output

struct StudyPaths {
  fs::path dir;
  std::string stem;
  fs::path file(const std::string& suffix) const { return dir / (stem + suffix); }
};

StudyPaths prepare_output(const ExperimentConfig& cfg, const std::string& study) {
  StudyPaths p{fs::path(cfg.out_dir) / study, cfg.dataset.name + "_" + model_name(cfg)};
  std::error_code ec;
  fs::create_directories(p.dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + p.dir.string() + "': " + ec.message());
  return p;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw ConfigError("write failed for '" + path.string() + "'");
}

struct Column {
  const char* name;
  const char* type;
  const char* description;
};

json schema_json(const std::string& study, const std::vector<Column>& cols) {
  json j;
  j["study"] = study;
  j["format"] = "comma-separated, header row, numbers printed with 17 significant digits";
  j["columns"] = json::array();
  for (const auto& c : cols) j["columns"].push_back({{"name", c.name}, {"type", c.type}, {"description", c.description}});
  return j;
}

std::string header_line(const std::vector<Column>& cols) {
  std::string s;
  for (std::size_t i = 0; i < cols.size(); ++i) s += (i ? "," : "") + std::string(cols[i].name);
  return s + "\n";
}

void finish_study(StudyOutput& out, const StudyPaths& paths, const std::string& study, const std::vector<Column>& cols,
                  const std::string& rows, const LineChart& chart, const std::vector<std::string>& plan_lines,
                  bool emit_plans) {
  out.csv_path = paths.file(".csv").string();
  out.svg_path = paths.file(".svg").string();
  out.schema_path = paths.file(".schema.json").string();
  out.summary_path = paths.file("_summary.json").string();
  write_text(out.csv_path, header_line(cols) + rows);
  write_text(out.svg_path, chart.render());
  write_text(out.schema_path, schema_json(study, cols).dump(2) + "\n");
  out.summary["warnings"] = out.warnings;
  write_text(out.summary_path, out.summary.dump(2) + "\n");
  if (emit_plans) {
    out.plans_path = paths.file(".plans.jsonl").string();
    std::string text;
    for (const auto& line : plan_lines) text += line + "\n";
    write_text(out.plans_path, text);
  }
}

json fold_summary(const FoldSetup& fs) {
  return {{"fold", fs.fold},
          {"test_rows", fs.test_rows},
          {"test_accuracy", fs.test_accuracy},
          {"instances", fs.instances.size()}};
}

double default_alpha(const ExperimentConfig& cfg, double fallback) { return cfg.alpha.value_or(fallback); }

// --------------------------------------------------------------------------
// Predictions

ModelParams shifted_weights(const ModelParams& base, const Vector& delta) {
  ModelParams p = base;
  for (std::size_t i = 0; i < p.weights.size(); ++i) p.weights[i] += delta[i];
  return p;
}

double linf_distance(const ModelParams& a, const ModelParams& b) {
  double m = std::abs(a.intercept - b.intercept);
  for (std::size_t i = 0; i < a.weights.size(); ++i) m = std::max(m, std::abs(a.weights[i] - b.weights[i]));
  return m;
}

}  // namespace

std::vector<NamedPrediction> make_predictions(const PredictionSetSpec& spec, const Neighborhood& n,
                                              const std::optional<ModelParams>& correct) {
  n.validate();
  const std::size_t d = n.base.dim();
  std::vector<NamedPrediction> out;
  auto add = [&](std::string name, const ModelParams& p) { out.push_back({std::move(name), n.clamp(p)}); };
  switch (spec.mode) {
    case PredictionMode::CornerPerturbations: {
      add("theta0", n.base);
      Vector plus(d, n.alpha), minus(d, -n.alpha), alt(d), alt_neg(d);
      for (std::size_t i = 0; i < d; ++i) {
        alt[i] = i % 2 == 0 ? n.alpha : -n.alpha;
        alt_neg[i] = -alt[i];
      }
      add("all_plus", shifted_weights(n.base, plus));
      add("all_minus", shifted_weights(n.base, minus));
      if (d > 1) {
        add("alt_plus", shifted_weights(n.base, alt));
        add("alt_minus", shifted_weights(n.base, alt_neg));
      }
      break;
    }
    case PredictionMode::EpsilonPerturbations: {
      if (!correct) throw ConfigError("epsilon predictions need a correct prediction");
      if (correct->dim() != d) throw DimensionError("correct prediction has the wrong dimension");
      const double eps = spec.epsilon > 0.0 ? spec.epsilon : 0.5 * linf_distance(n.base, *correct);
      add("correct", *correct);
      add("plus_eps", shifted_weights(*correct, Vector(d, eps)));
      add("minus_eps", shifted_weights(*correct, Vector(d, -eps)));
      add("plus_2eps", shifted_weights(*correct, Vector(d, 2.0 * eps)));
      add("minus_2eps", shifted_weights(*correct, Vector(d, -2.0 * eps)));
      break;
    }
    case PredictionMode::Explicit: {
      if (spec.explicit_list.empty()) throw ConfigError("explicit prediction list is empty");
      for (std::size_t k = 0; k < spec.explicit_list.size(); ++k) {
        if (spec.explicit_list[k].dim() != d)
          throw DimensionError("explicit prediction " + std::to_string(k) + " has " +
                               std::to_string(spec.explicit_list[k].dim()) + " weights, expected " +
                               std::to_string(d));
        add("explicit_" + std::to_string(k), spec.explicit_list[k]);
      }
      break;
    }
  }
  return out;
}

void ExperimentConfig::validate() const {
  auto nonempty = [](const std::vector<double>& v, const char* name) {
    if (v.empty()) throw ConfigError(std::string("config.") + name + " must not be empty");
    for (double x : v)
      if (!std::isfinite(x)) throw ConfigError(std::string("config.") + name + " has a non-finite entry");
  };
  nonempty(lambda_grid, "lambda_grid");
  nonempty(beta_grid, "beta_grid");
  nonempty(validity_alphas, "validity_alphas");
  nonempty(validity_lambdas, "validity_lambdas");
  for (double l : lambda_grid)
    if (l <= 0.0) throw ConfigError("config.lambda_grid entries must be > 0");
  for (double l : validity_lambdas)
    if (l <= 0.0) throw ConfigError("config.validity_lambdas entries must be > 0");
  for (double b : beta_grid)
    if (b < 0.0 || b > 1.0) throw ConfigError("config.beta_grid entries must lie in [0, 1]");
  for (double a : validity_alphas)
    if (a < 0.0) throw ConfigError("config.validity_alphas entries must be >= 0");
  if (alpha && !(*alpha >= 0.0)) throw ConfigError("config.alpha must be >= 0");
  if (dataset.shift && !std::isfinite(*dataset.shift)) throw ConfigError("config.dataset.shift must be finite");
  if (folds == 0) throw ConfigError("config.folds must be >= 1");
  if (dataset.synthetic.n_points < 2) throw ConfigError("config.dataset.n_points must be >= 2");
  if (predictions.epsilon < 0.0) throw ConfigError("config.predictions.epsilon must be >= 0");
  if (roar.learning_rate <= 0.0) throw ConfigError("config.roar.learning_rate must be > 0");
  if (ascent.learning_rate <= 0.0 || ascent.steps < 0) throw ConfigError("config.ascent is invalid");
  if (train.learning_rate <= 0.0 || train.max_epochs < 0) throw ConfigError("config.train is invalid");
  if (surrogate.n_samples == 0 || surrogate.stddev <= 0.0) throw ConfigError("config.surrogate is invalid");
}

ExperimentConfig config_from_json(const json& j) {
  try {
    ExperimentConfig cfg = parse_config(j);
    cfg.validate();
    return cfg;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

ExperimentConfig load_config(const std::string& path) {
  ExperimentConfig cfg = config_from_json(read_json_file(path));
  const fs::path base = fs::path(path).parent_path();
  cfg.dataset.path = resolve_path(cfg.dataset.path, base);
  cfg.dataset.shifted_path = resolve_path(cfg.dataset.shifted_path, base);
  cfg.mlp_path = resolve_path(cfg.mlp_path, base);
  cfg.mlp_shifted_path = resolve_path(cfg.mlp_shifted_path, base);
  return cfg;
}

// --------------------------------------------------------------------------
// Trade-off study

namespace {

struct TradeoffInstanceResult {
  std::vector<std::string> names;
  // [prediction][beta]
  std::vector<std::vector<double>> robustness, consistency, cost;
  double roar_robustness = 0.0;
  double roar_cost = 0.0;
  std::vector<double> roar_consistency;  // per prediction
  std::vector<std::string> plan_lines;
};

json plan_record(const char* study, std::size_t fold, const Instance& inst, const RecourseQuery& q, double alpha) {
  return {{"study", study},
          {"fold", fold},
          {"row", inst.row},
          {"x0", q.x0},
          {"lambda", q.lambda},
          {"loss", q.loss == LossKind::BinaryCrossEntropy ? "bce" : "squared"},
          {"alpha", alpha},
          {"theta0", inst.theta0}};
}

}  // namespace

StudyOutput run_tradeoff_study(const ExperimentConfig& cfg) {
  cfg.validate();
  const double alpha = default_alpha(cfg, 0.5);
  const bool need_correct = cfg.predictions.mode == PredictionMode::EpsilonPerturbations;
  const double shift = cfg.dataset.shift.value_or(alpha);
  const LoadedData ld = load_data(cfg, need_correct, shift);
  const auto folds = build_folds(cfg, ld, need_correct ? std::optional<double>(alpha) : std::nullopt);

  StudyOutput out;
  out.summary = {{"study", "tradeoff"}, {"dataset", cfg.dataset.name}, {"model", model_name(cfg)},
                 {"alpha", alpha}, {"seed", cfg.seed}, {"folds", json::array()}};

  std::vector<std::string> names;
  std::vector<std::vector<double>> sum_r, sum_c, sum_l;
  std::vector<double> roar_c;
  double roar_r = 0.0, roar_l = 0.0;
  std::size_t total = 0;
  std::vector<std::string> plan_lines;

  for (const FoldSetup& fs : folds) {
    json fj = fold_summary(fs);
    if (fs.instances.empty()) {
      out.warnings.push_back("fold " + std::to_string(fs.fold) + ": no undesirable instances, skipped");
      fj["skipped"] = true;
      out.summary["folds"].push_back(fj);
      continue;
    }
    const LambdaChoice lc = select_lambda(cfg, fs, alpha);
    fj["lambda"] = lc.lambda;
    fj["lambda_valid_counts"] = lc.valid_counts;
    out.summary["folds"].push_back(fj);

    std::vector<TradeoffInstanceResult> results(fs.instances.size());
    parallel_for(fs.instances.size(), cfg.threads, [&](std::size_t k) {
      const Instance& inst = fs.instances[k];
      TradeoffInstanceResult& r = results[k];
      const RecourseQuery q = make_query(cfg, inst.x0, lc.lambda);
      const Neighborhood n{inst.theta0, alpha};
      const RecoursePlan xr = optimal_robust_recourse(q, n, cfg.blend.solver);
      const auto preds = make_predictions(cfg.predictions, n, inst.correct);
      const json base = plan_record("tradeoff", fs.fold, inst, q, alpha);
      for (const auto& p : preds) {
        r.names.push_back(p.name);
        const RecoursePlan xc = consistent_recourse(q, p.params, cfg.blend.solver);
        std::vector<double> rr, cc, ll;
        for (double beta : cfg.beta_grid) {
          const RecoursePlan plan = blended_recourse({q, n, p.params, beta}, cfg.blend);
          rr.push_back(robustness(q, n, plan.x_prime, xr));
          cc.push_back(consistency(q, p.params, plan.x_prime, xc));
          ll.push_back(plan.l1_cost);
          if (cfg.emit_plans) {
            json rec = base;
            rec["method"] = "blend";
            rec["prediction"] = p.name;
            rec["prediction_params"] = p.params;
            rec["beta"] = beta;
            rec["plan"] = plan;
            rec["robustness"] = rr.back();
            rec["consistency"] = cc.back();
            r.plan_lines.push_back(rec.dump());
          }
        }
        r.robustness.push_back(std::move(rr));
        r.consistency.push_back(std::move(cc));
        r.cost.push_back(std::move(ll));
      }
      const RecoursePlan roar = roar_recourse(q, n, cfg.roar);
      r.roar_robustness = robustness(q, n, roar.x_prime, xr);
      r.roar_cost = roar.l1_cost;
      for (const auto& p : preds) {
        r.roar_consistency.push_back(consistency(q, p.params, roar.x_prime));
        if (cfg.emit_plans) {
          json rec = base;
          rec["method"] = "roar";
          rec["prediction"] = p.name;
          rec["prediction_params"] = p.params;
          rec["plan"] = roar;
          rec["robustness"] = r.roar_robustness;
          rec["consistency"] = r.roar_consistency.back();
          r.plan_lines.push_back(rec.dump());
        }
      }
    });

    for (auto& r : results) {
      if (names.empty()) {
        names = r.names;
        sum_r.assign(names.size(), Vector(cfg.beta_grid.size(), 0.0));
        sum_c = sum_l = sum_r;
        roar_c.assign(names.size(), 0.0);
      }
      if (r.names != names) throw ConfigError("prediction sets differ across instances");
      for (std::size_t p = 0; p < names.size(); ++p) {
        for (std::size_t b = 0; b < cfg.beta_grid.size(); ++b) {
          sum_r[p][b] += r.robustness[p][b];
          sum_c[p][b] += r.consistency[p][b];
          sum_l[p][b] += r.cost[p][b];
        }
        roar_c[p] += r.roar_consistency[p];
      }
      roar_r += r.roar_robustness;
      roar_l += r.roar_cost;
      ++total;
      for (auto& line : r.plan_lines) plan_lines.push_back(std::move(line));
    }
  }

  const StudyPaths paths = prepare_output(cfg, "tradeoff");
  std::string rows;
  LineChart chart{"Robustness vs consistency (alpha=" + fmt(alpha) + ")", "consistency", "robustness", {}};
  ChartSeries roar_series{"ROAR", {}, true};
  const double nt = static_cast<double>(total);
  for (std::size_t p = 0; p < names.size(); ++p) {
    ChartSeries s{names[p], {}, false};
    for (std::size_t b = 0; b < cfg.beta_grid.size(); ++b) {
      const double r = sum_r[p][b] / nt, c = sum_c[p][b] / nt, l = sum_l[p][b] / nt;
      rows += "blend," + names[p] + "," + fmt(cfg.beta_grid[b]) + "," + fmt(r) + "," + fmt(c) + "," + fmt(l) + "," +
              std::to_string(total) + "\n";
      s.points.emplace_back(c, r);
    }
    chart.series.push_back(std::move(s));
  }
  for (std::size_t p = 0; p < names.size(); ++p) {
    const double r = roar_r / nt, c = roar_c[p] / nt, l = roar_l / nt;
    rows += "roar," + names[p] + ",," + fmt(r) + "," + fmt(c) + "," + fmt(l) + "," + std::to_string(total) + "\n";
    roar_series.points.emplace_back(c, r);
  }
  if (!names.empty()) chart.series.push_back(std::move(roar_series));
  if (total == 0) out.warnings.push_back("no undesirable instances in any fold; the table is empty");
  out.summary["instances"] = total;
  if (total) out.summary["roar_mean_robustness"] = roar_r / nt;

  finish_study(out, paths, "tradeoff",
               {{"method", "string", "blend (robust/consistent interpolation) or roar"},
                {"prediction", "string", "prediction identifier"},
                {"beta", "number", "trust in the worst case; empty for roar"},
                {"robustness", "number", "mean excess worst-case total cost over the robust optimum"},
                {"consistency", "number", "mean excess total cost under the prediction over its optimum"},
                {"l1_cost", "number", "mean weighted L1 modification cost"},
                {"instances", "integer", "instances averaged over all folds"}},
               rows, chart, plan_lines, cfg.emit_plans);
  return out;
}

// --------------------------------------------------------------------------
// Smoothness study

StudyOutput run_smoothness_study(const ExperimentConfig& cfg) {
  cfg.validate();
  const double alpha = default_alpha(cfg, 1.0);
  const double shift = cfg.dataset.shift.value_or(alpha);
  const LoadedData ld = load_data(cfg, true, shift);
  const auto folds = build_folds(cfg, ld, alpha);
  PredictionSetSpec spec = cfg.predictions;
  spec.mode = PredictionMode::EpsilonPerturbations;

  StudyOutput out;
  out.summary = {{"study", "smoothness"}, {"dataset", cfg.dataset.name}, {"model", model_name(cfg)},
                 {"alpha", alpha}, {"shift", shift}, {"seed", cfg.seed}, {"folds", json::array()}};

  std::vector<std::string> names;
  std::vector<Vector> sums;
  std::size_t total = 0;
  std::vector<std::string> plan_lines;
  double eps_sum = 0.0;

  for (const FoldSetup& fs : folds) {
    json fj = fold_summary(fs);
    if (fs.instances.empty()) {
      out.warnings.push_back("fold " + std::to_string(fs.fold) + ": no undesirable instances, skipped");
      fj["skipped"] = true;
      out.summary["folds"].push_back(fj);
      continue;
    }
    const LambdaChoice lc = select_lambda(cfg, fs, alpha);
    fj["lambda"] = lc.lambda;
    if (fs.instances.front().correct) fj["correct_prediction"] = *fs.instances.front().correct;
    out.summary["folds"].push_back(fj);

    struct Result {
      std::vector<std::string> names;
      std::vector<Vector> values;
      double eps = 0.0;
      std::vector<std::string> plan_lines;
    };
    std::vector<Result> results(fs.instances.size());
    parallel_for(fs.instances.size(), cfg.threads, [&](std::size_t k) {
      const Instance& inst = fs.instances[k];
      Result& r = results[k];
      const RecourseQuery q = make_query(cfg, inst.x0, lc.lambda);
      const Neighborhood n{inst.theta0, alpha};
      const auto preds = make_predictions(spec, n, inst.correct);
      r.eps = spec.epsilon > 0.0 ? spec.epsilon : 0.5 * linf_distance(inst.theta0, *inst.correct);
      const RecoursePlan ideal = consistent_recourse(q, *inst.correct, cfg.blend.solver);
      const double ideal_cost = eval_total_cost(q, ideal.x_prime, *inst.correct);
      const json base = plan_record("smoothness", fs.fold, inst, q, alpha);
      for (const auto& p : preds) {
        r.names.push_back(p.name);
        Vector vals;
        for (double beta : cfg.beta_grid) {
          const RecoursePlan plan = blended_recourse({q, n, p.params, beta}, cfg.blend);
          vals.push_back(eval_total_cost(q, plan.x_prime, *inst.correct) - ideal_cost);
          if (cfg.emit_plans) {
            json rec = base;
            rec["method"] = "blend";
            rec["prediction"] = p.name;
            rec["prediction_params"] = p.params;
            rec["correct_prediction"] = *inst.correct;
            rec["beta"] = beta;
            rec["plan"] = plan;
            rec["smoothness"] = vals.back();
            r.plan_lines.push_back(rec.dump());
          }
        }
        r.values.push_back(std::move(vals));
      }
    });
    for (auto& r : results) {
      if (names.empty()) {
        names = r.names;
        sums.assign(names.size(), Vector(cfg.beta_grid.size(), 0.0));
      }
      for (std::size_t p = 0; p < names.size(); ++p)
        for (std::size_t b = 0; b < cfg.beta_grid.size(); ++b) sums[p][b] += r.values[p][b];
      eps_sum += r.eps;
      ++total;
      for (auto& line : r.plan_lines) plan_lines.push_back(std::move(line));
    }
  }

  const StudyPaths paths = prepare_output(cfg, "smoothness");
  std::string rows;
  LineChart chart{"Smoothness vs beta (alpha=" + fmt(alpha) + ")", "beta", "smoothness", {}};
  const double nt = static_cast<double>(total);
  for (std::size_t p = 0; p < names.size(); ++p) {
    ChartSeries s{names[p], {}, false};
    for (std::size_t b = 0; b < cfg.beta_grid.size(); ++b) {
      const double v = sums[p][b] / nt;
      rows += names[p] + "," + fmt(cfg.beta_grid[b]) + "," + fmt(v) + "," + std::to_string(total) + "\n";
      s.points.emplace_back(cfg.beta_grid[b], v);
    }
    chart.series.push_back(std::move(s));
  }
  if (total == 0) out.warnings.push_back("no undesirable instances in any fold; the table is empty");
  out.summary["instances"] = total;
  if (total) out.summary["mean_epsilon"] = eps_sum / nt;

  finish_study(out, paths, "smoothness",
               {{"prediction", "string", "correct, plus_eps, minus_eps, plus_2eps or minus_2eps"},
                {"beta", "number", "trust in the worst case"},
                {"smoothness", "number", "mean excess total cost under the correct model"},
                {"instances", "integer", "instances averaged over all folds"}},
               rows, chart, plan_lines, cfg.emit_plans);
  return out;
}

// --------------------------------------------------------------------------
// Validity study

namespace {

struct ValidityCell {
  std::size_t valid = 0;
  std::size_t instances = 0;
  double cost_sum = 0.0;
  std::vector<std::string> plan_lines;
};

}  // namespace

StudyOutput run_validity_study(const ExperimentConfig& cfg) {
  cfg.validate();
  const LoadedData ld = load_data(cfg, false, 0.0);
  const auto folds = build_folds(cfg, ld, std::nullopt);

  StudyOutput out;
  out.summary = {{"study", "validity"}, {"dataset", cfg.dataset.name}, {"model", model_name(cfg)},
                 {"seed", cfg.seed}, {"folds", json::array()}};
  for (const FoldSetup& fs : folds) {
    json fj = fold_summary(fs);
    if (fs.instances.empty()) {
      out.warnings.push_back("fold " + std::to_string(fs.fold) + ": no undesirable instances, skipped");
      fj["skipped"] = true;
    }
    out.summary["folds"].push_back(fj);
  }

  const std::vector<std::string> methods{"robust", "roar"};
  const std::size_t na = cfg.validity_alphas.size(), nl = cfg.validity_lambdas.size(), nf = folds.size();
  // Task layout: ((alpha * nl + lambda) * nf + fold) * 2 + method.
  std::vector<ValidityCell> cells(na * nl * nf * methods.size());
  parallel_for(na * nl * nf, cfg.threads, [&](std::size_t task) {
    const std::size_t f = task % nf;
    const std::size_t l = (task / nf) % nl;
    const std::size_t a = task / (nf * nl);
    const FoldSetup& fs = folds[f];
    if (fs.instances.empty()) return;
    const double alpha = cfg.validity_alphas[a];
    const double lambda = cfg.validity_lambdas[l];
    for (std::size_t m = 0; m < methods.size(); ++m) {
      ValidityCell& cell = cells[task * methods.size() + m];
      std::vector<Vector> recourses;
      std::vector<RecoursePlan> plans;
      for (const Instance& inst : fs.instances) {
        const RecourseQuery q = make_query(cfg, inst.x0, lambda);
        const Neighborhood n{inst.theta0, alpha};
        plans.push_back(m == 0 ? optimal_robust_recourse(q, n, cfg.blend.solver) : roar_recourse(q, n, cfg.roar));
        recourses.push_back(plans.back().x_prime);
        cell.cost_sum += plans.back().l1_cost;
      }
      json shared;
      std::vector<int> labels;
      if (cfg.model == ModelKind::Glm) {
        const ModelParams worst = worst_case_shared_model(Neighborhood{*fs.glm, alpha}, recourses, cfg.ascent);
        const GlmScorer scorer(worst);
        for (const auto& x : recourses) labels.push_back(predict_label(scorer, x));
        shared = worst;
      } else {
        const MlpWeights worst = worst_case_shared_mlp(*ld.mlp, alpha, recourses, cfg.ascent);
        const MlpScorer scorer(worst);
        for (const auto& x : recourses) labels.push_back(predict_label(scorer, x));
        shared = worst;
      }
      for (int v : labels) cell.valid += static_cast<std::size_t>(v);
      cell.instances = recourses.size();
      if (cfg.emit_plans) {
        cell.plan_lines.push_back(json{{"study", "validity"}, {"record", "shared_model"}, {"fold", fs.fold},
                                       {"method", methods[m]}, {"alpha", alpha}, {"lambda", lambda},
                                       {"model_kind", model_name(cfg)}, {"shared_model", shared}}
                                      .dump());
        for (std::size_t k = 0; k < plans.size(); ++k) {
          json rec = plan_record("validity", fs.fold, fs.instances[k], make_query(cfg, fs.instances[k].x0, lambda), alpha);
          rec["record"] = "plan";
          rec["method"] = methods[m];
          rec["plan"] = plans[k];
          rec["valid"] = labels[k];
          cell.plan_lines.push_back(rec.dump());
        }
      }
    }
  });

  struct Point {
    std::size_t method, lambda, alpha;
    double validity, cost;
    std::size_t instances;
  };
  std::vector<Point> points;
  std::vector<std::string> plan_lines;
  for (std::size_t m = 0; m < methods.size(); ++m) {
    for (std::size_t l = 0; l < nl; ++l) {
      for (std::size_t a = 0; a < na; ++a) {
        std::size_t valid = 0, count = 0;
        double cost = 0.0;
        for (std::size_t f = 0; f < nf; ++f) {
          ValidityCell& c = cells[(((a * nl + l) * nf + f) * methods.size()) + m];
          valid += c.valid;
          count += c.instances;
          cost += c.cost_sum;
          for (auto& line : c.plan_lines) plan_lines.push_back(std::move(line));
        }
        if (count == 0) continue;
        points.push_back({m, l, a, static_cast<double>(valid) / static_cast<double>(count),
                          cost / static_cast<double>(count), count});
      }
    }
  }

  const StudyPaths paths = prepare_output(cfg, "validity");
  std::string rows;
  LineChart chart{"Worst-case validity vs cost", "l1 cost", "validity", {}};
  for (std::size_t m = 0; m < methods.size(); ++m) {
    for (std::size_t l = 0; l < nl; ++l) {
      std::vector<const Point*> series;
      for (const auto& p : points)
        if (p.method == m && p.lambda == l) series.push_back(&p);
      ChartSeries s{methods[m] + " lambda=" + fmt(cfg.validity_lambdas[l]), {}, false};
      for (const Point* p : series) {
        bool dominated = false;
        for (const Point* o : series) {
          if (o == p) continue;
          if (o->validity >= p->validity && o->cost <= p->cost &&
              (o->validity > p->validity || o->cost < p->cost))
            dominated = true;
        }
        rows += methods[m] + "," + fmt(cfg.validity_alphas[p->alpha]) + "," + fmt(cfg.validity_lambdas[l]) + "," +
                fmt(p->validity) + "," + fmt(p->cost) + "," + std::to_string(p->instances) + "," +
                (dominated ? "0" : "1") + "\n";
        if (!dominated) s.points.emplace_back(p->cost, p->validity);
      }
      std::sort(s.points.begin(), s.points.end());
      if (!s.points.empty()) chart.series.push_back(std::move(s));
    }
  }
  if (points.empty()) out.warnings.push_back("no undesirable instances in any fold; the table is empty");

  finish_study(out, paths, "validity",
               {{"method", "string", "robust (exact solver) or roar"},
                {"alpha", "number", "radius of the parameter ball"},
                {"lambda", "number", "cost trade-off weight"},
                {"validity", "number", "fraction of recourses labeled 1 by the shared worst-case model"},
                {"l1_cost", "number", "mean weighted L1 modification cost"},
                {"instances", "integer", "recourses summed over all folds"},
                {"pareto", "integer", "1 when no other alpha in the same method and lambda series dominates"}},
               rows, chart, plan_lines, cfg.emit_plans);
  return out;
}

// --------------------------------------------------------------------------
// Oracle certification

OracleCheckReport run_oracle_check(std::size_t instances, std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  const double alphas[] = {0.1, 0.5};
  const double lambdas[] = {0.05, 0.3, 1.0};
  struct Setup {
    RecourseQuery q;
    Neighborhood n;
  };
  std::vector<Setup> setups;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0), wide(-2.0, 2.0);
  for (std::size_t k = 0; k < instances; ++k) {
    const std::size_t d = 1 + k % 3;
    Setup s;
    s.q.lambda = lambdas[(k / 6) % 3];
    s.q.loss = LossKind::BinaryCrossEntropy;
    s.n.alpha = alphas[(k / 3) % 2];
    for (std::size_t i = 0; i < d; ++i) s.n.base.weights.push_back(unit(rng));
    s.n.base.intercept = unit(rng);
    for (std::size_t i = 0; i < d; ++i) s.q.x0.push_back(wide(rng));
    setups.push_back(std::move(s));
  }
  OracleCheckReport report;
  report.cases.resize(instances);
  parallel_for(instances, 0, [&](std::size_t k) {
    const Setup& s = setups[k];
    OracleCase& c = report.cases[k];
    // The optimum costs at most F(x0) / lambda, which bounds its distance from
    // x0; the grid is widened to that radius with a capped number of points.
    const double certified = worst_case_total(s.q, s.n, s.q.x0) / s.q.lambda;
    GridSpec grid;
    const double per_side = s.q.dim() == 1 ? 500.0 : 100.0;
    grid.radius = std::max(grid.radius, certified);
    grid.step = std::max(s.q.dim() == 1 ? 0.01 : 0.05, grid.radius / per_side);
    c.dim = s.q.dim();
    c.alpha = s.n.alpha;
    c.lambda = s.q.lambda;
    c.solver_value = optimal_robust_recourse(s.q, s.n).worst_case_total;
    c.oracle_value = minimax_oracle(s.q, s.n, grid).value;
    c.grid_covers_optimum = certified <= 5.0;
    c.passed = c.solver_value <= c.oracle_value + 1e-2 && c.solver_value >= c.oracle_value - 1e-9;
  });
  for (const auto& c : report.cases) report.failures += c.passed ? 0 : 1;
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace recourse
