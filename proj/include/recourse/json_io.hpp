#pragma once

#include <string>

#include <json.hpp>

#include "recourse/data.hpp"
#include "recourse/models.hpp"
#include "recourse/solver.hpp"

namespace recourse {

using json = nlohmann::json;

// {"weights": [...], "intercept": b}
void to_json(json& j, const ModelParams& p);
void from_json(const json& j, ModelParams& p);

// {"layers": [{"w": [[...]], "b": [...]}, ...]}
void to_json(json& j, const MlpWeights& w);
void from_json(const json& j, MlpWeights& w);

// {"x_prime", "l1_cost", "worst_case_total", "saturated", "trace": [...]}
void to_json(json& j, const RecoursePlan& plan);
void from_json(const json& j, RecoursePlan& plan);

void to_json(json& j, const Dataset& ds);
void from_json(const json& j, Dataset& ds);

/// Parses a JSON file; throws ConfigError when it is missing or malformed.
json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const json& j);

ModelParams load_model_params(const std::string& path);
MlpWeights load_mlp(const std::string& path);

}  // namespace recourse
