#include "recourse/json_io.hpp"

#include <fstream>

#include "recourse/errors.hpp"

namespace recourse {

void to_json(json& j, const ModelParams& p) { j = json{{"weights", p.weights}, {"intercept", p.intercept}}; }

void from_json(const json& j, ModelParams& p) {
  j.at("weights").get_to(p.weights);
  p.intercept = j.value("intercept", 0.0);
}

void to_json(json& j, const MlpWeights& w) {
  j = json{{"layers", json::array()}};
  for (const auto& layer : w.layers) j["layers"].push_back(json{{"w", layer.w}, {"b", layer.b}});
}

void from_json(const json& j, MlpWeights& w) {
  w.layers.clear();
  for (const auto& lj : j.at("layers")) {
    DenseLayer layer;
    lj.at("w").get_to(layer.w);
    lj.at("b").get_to(layer.b);
    w.layers.push_back(std::move(layer));
  }
}

void to_json(json& j, const RecoursePlan& plan) {
  json trace = json::array();
  for (const auto& s : plan.trace) {
    trace.push_back(json{{"coordinate", s.coordinate},
                         {"delta", s.delta},
                         {"theta_prime", s.theta_prime},
                         {"adversary_updated", s.adversary_updated}});
  }
  j = json{{"x_prime", plan.x_prime},
           {"l1_cost", plan.l1_cost},
           {"worst_case_total", plan.worst_case_total},
           {"saturated", plan.saturated},
           {"trace", std::move(trace)}};
}

void from_json(const json& j, RecoursePlan& plan) {
  j.at("x_prime").get_to(plan.x_prime);
  plan.l1_cost = j.at("l1_cost").get<double>();
  plan.worst_case_total = j.at("worst_case_total").get<double>();
  plan.saturated = j.value("saturated", false);
  plan.trace.clear();
  for (const auto& s : j.value("trace", json::array())) {
    plan.trace.push_back({s.at("coordinate").get<std::size_t>(), s.at("delta").get<double>(),
                          s.value("theta_prime", 0.0), s.value("adversary_updated", false)});
  }
}

void to_json(json& j, const Dataset& ds) {
  j = json{{"feature_names", ds.feature_names}, {"features", ds.features}, {"labels", ds.labels}};
  if (ds.normalization) {
    j["normalization"] = json{{"mean", ds.normalization->mean},
                              {"stddev", ds.normalization->stddev},
                              {"constant", ds.normalization->constant}};
  }
}

void from_json(const json& j, Dataset& ds) {
  j.at("feature_names").get_to(ds.feature_names);
  j.at("features").get_to(ds.features);
  j.at("labels").get_to(ds.labels);
  ds.normalization.reset();
  if (j.contains("normalization")) {
    NormalizationStats st;
    j["normalization"].at("mean").get_to(st.mean);
    j["normalization"].at("stddev").get_to(st.stddev);
    j["normalization"].at("constant").get_to(st.constant);
    ds.normalization = std::move(st);
  }
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << j.dump(2) << '\n';
}

ModelParams load_model_params(const std::string& path) {
  try {
    auto p = read_json_file(path).get<ModelParams>();
    p.validate();
    return p;
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

MlpWeights load_mlp(const std::string& path) {
  try {
    auto w = read_json_file(path).get<MlpWeights>();
    w.validate();
    return w;
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

}  // namespace recourse
