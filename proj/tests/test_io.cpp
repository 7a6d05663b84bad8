#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "recourse/errors.hpp"
#include "recourse/json_io.hpp"
#include "recourse/svg.hpp"
#include "test_util.hpp"

using namespace recourse;

TEST_SUITE("io") {

TEST_CASE("model parameters round trip") {
  const ModelParams p{{0.1, -2.5, 1e-300}, 0.3333333333333333};
  const json j = p;
  const ModelParams back = j.get<ModelParams>();
  CHECK(back.weights == p.weights);
  CHECK(back.intercept == p.intercept);
  CHECK(json::parse(j.dump()).get<ModelParams>().weights == p.weights);
}

TEST_CASE("plans round trip with their trace") {
  RecoursePlan plan;
  plan.x_prime = {2.772588722239781, -1.0};
  plan.l1_cost = 2.772588722239781;
  plan.worst_case_total = 0.5004024235381879;
  plan.saturated = true;
  plan.trace.push_back({0, 2.772588722239781, 0.5, false});
  plan.trace.push_back({1, -0.25, -0.75, true});
  const RecoursePlan back = json::parse(json(plan).dump()).get<RecoursePlan>();
  CHECK(back.x_prime == plan.x_prime);
  CHECK(back.worst_case_total == plan.worst_case_total);
  CHECK(back.saturated);
  REQUIRE(back.trace.size() == 2);
  CHECK(back.trace[1].coordinate == 1);
  CHECK(back.trace[1].adversary_updated);
  CHECK(back.trace[1].theta_prime == -0.75);
}

TEST_CASE("datasets and networks round trip") {
  Dataset ds;
  ds.feature_names = {"a", "b"};
  ds.features = {{1.0, 2.0}, {3.0, 4.0}};
  ds.labels = {0, 1};
  ds = normalize(ds);
  const Dataset back = json(ds).get<Dataset>();
  CHECK(back.features == ds.features);
  CHECK(back.labels == ds.labels);
  REQUIRE(back.normalization.has_value());
  CHECK(back.normalization->mean == ds.normalization->mean);

  MlpWeights w;
  w.layers.push_back({{{1.0, 2.0}}, {0.5}});
  const MlpWeights wb = json(w).get<MlpWeights>();
  CHECK(wb.layers[0].w == w.layers[0].w);
  CHECK(wb.layers[0].b == w.layers[0].b);
}

TEST_CASE("json file errors are configuration errors") {
  std::filesystem::create_directories(RECOURSE_SCRATCH_DIR);
  CHECK_THROWS_AS(read_json_file(testutil::scratch("absent.json")), ConfigError);
  const std::string bad = testutil::scratch("malformed.json");
  std::ofstream(bad) << "{\"weights\": [1, 2";
  CHECK_THROWS_AS(read_json_file(bad), ConfigError);
  const std::string wrong = testutil::scratch("wrong_shape.json");
  std::ofstream(wrong) << "{\"weights\": \"abc\"}";
  CHECK_THROWS_AS(load_model_params(wrong), ConfigError);
  const std::string good = testutil::scratch("model.json");
  write_json_file(good, json(ModelParams{{1.0}, 2.0}));
  CHECK(load_model_params(good).intercept == 2.0);
}

TEST_CASE("svg chart contains every series") {
  LineChart chart{"Title & co", "x", "y", {}};
  chart.series.push_back({"first", {{0.0, 1.0}, {1.0, 0.5}, {2.0, 0.0}}, false});
  chart.series.push_back({"stars", {{0.5, 0.5}}, true});
  const std::string svg = chart.render();
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("</svg>") != std::string::npos);
  CHECK(svg.find("<polyline") != std::string::npos);
  CHECK(svg.find("first") != std::string::npos);
  CHECK(svg.find("stars") != std::string::npos);
  CHECK(svg.find("Title &amp; co") != std::string::npos);
  CHECK(svg == chart.render());
  const LineChart empty{"nothing", "x", "y", {}};
  CHECK(empty.render().find("</svg>") != std::string::npos);
}

}  // TEST_SUITE
