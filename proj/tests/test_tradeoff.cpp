#include <doctest.h>

#include <cmath>
#include <random>

#include "recourse/errors.hpp"
#include "recourse/tradeoff.hpp"
#include "test_util.hpp"

using namespace recourse;

namespace {

TradeoffQuery sample_query(std::mt19937_64& rng, std::size_t d, double beta) {
  TradeoffQuery tq;
  tq.query.x0 = testutil::uniform_vector(rng, d, -2.0, 1.0);
  tq.query.lambda = 0.2;
  tq.neighborhood = Neighborhood{ModelParams{testutil::uniform_vector(rng, d, -1.0, 1.0), -0.2}, 0.3};
  ModelParams pred = tq.neighborhood.base;
  const Vector shift = testutil::uniform_vector(rng, d, -0.3, 0.3);
  for (std::size_t i = 0; i < d; ++i) pred.weights[i] += shift[i];
  tq.prediction = pred;
  tq.beta = beta;
  return tq;
}

}  // namespace

TEST_SUITE("tradeoff") {

TEST_CASE("robustness of doing nothing on the single-feature instance") {
  RecourseQuery q;
  q.x0 = {0.0};
  q.lambda = 0.1;
  const Neighborhood n{ModelParams{{1.0}, 0.0}, 0.5, false};
  // log 2 minus the robust optimum log(1.25) + 0.2 log 4.
  CHECK(robustness(q, n, q.x0) == doctest::Approx(0.19274475702175742).epsilon(1e-12));
  // Under theta0 itself the optimum sits at score log 9.
  CHECK(consistency(q, n.base, q.x0) ==
        doctest::Approx(std::log(2.0) - std::log(10.0 / 9.0) - 0.1 * std::log(9.0)).epsilon(1e-12));
}

TEST_CASE("endpoints are exact") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    const TradeoffQuery tq = sample_query(rng, 1 + trial % 3, 1.0);
    const RecoursePlan robust = blended_recourse(tq);
    CHECK(robustness(tq.query, tq.neighborhood, robust.x_prime) == 0.0);
    TradeoffQuery c = tq;
    c.beta = 0.0;
    const RecoursePlan consistent = blended_recourse(c);
    CHECK(consistency(tq.query, tq.prediction, consistent.x_prime) == 0.0);
  }
}

TEST_CASE("frontier metrics are nonnegative and blended objective is minimized") {
  std::mt19937_64 rng(29);
  const std::vector<double> betas{0.0, 0.25, 0.5, 0.75, 1.0};
  for (int trial = 0; trial < 40; ++trial) {
    const TradeoffQuery tq = sample_query(rng, 1 + trial % 3, 0.5);
    const auto frontier = pareto_frontier(tq, betas);
    REQUIRE(frontier.size() == betas.size());
    for (std::size_t k = 0; k < betas.size(); ++k) {
      CHECK(frontier[k].beta == betas[k]);
      CHECK(frontier[k].robustness >= -1e-9);
      CHECK(frontier[k].consistency >= -1e-9);
    }
    // The blend must do at least as well as either endpoint on its own objective.
    for (double beta : betas) {
      TradeoffQuery b = tq;
      b.beta = beta;
      const double got = blended_objective(b, blended_recourse(b).x_prime);
      const double xr = blended_objective(b, optimal_robust_recourse(tq.query, tq.neighborhood).x_prime);
      const double xc = blended_objective(b, consistent_recourse(tq.query, tq.prediction).x_prime);
      CHECK(got <= std::min(xr, xc) + 1e-12);
    }
  }
}

TEST_CASE("blended objective interpolates") {
  std::mt19937_64 rng(31);
  TradeoffQuery tq = sample_query(rng, 2, 0.3);
  const Vector x{0.4, -0.1};
  const double worst = worst_case_total(tq.query, tq.neighborhood, x);
  const double pred = eval_total_cost(tq.query, x, tq.prediction);
  CHECK(blended_objective(tq, x) == doctest::Approx(0.3 * worst + 0.7 * pred));
}

TEST_CASE("smoothness is zero for the correct prediction at beta zero") {
  std::mt19937_64 rng(37);
  for (int trial = 0; trial < 30; ++trial) {
    const TradeoffQuery tq = sample_query(rng, 2, 0.0);
    CHECK(smoothness(tq.query, tq.neighborhood, tq.prediction, tq.prediction, 0.0) == 0.0);
    ModelParams other = tq.neighborhood.base;
    CHECK(smoothness(tq.query, tq.neighborhood, other, tq.prediction, 0.0) >= -1e-12);
    // At beta = 1 the prediction is ignored.
    CHECK(smoothness(tq.query, tq.neighborhood, other, tq.prediction, 1.0) ==
          smoothness(tq.query, tq.neighborhood, tq.prediction, tq.prediction, 1.0));
  }
}

TEST_CASE("validation and validity") {
  std::mt19937_64 rng(41);
  TradeoffQuery tq = sample_query(rng, 2, 1.5);
  CHECK_THROWS_AS(tq.validate(), InvalidInput);
  tq.beta = 0.5;
  tq.prediction.weights[0] = tq.neighborhood.base.weights[0] + 1.0;
  CHECK_THROWS_AS(tq.validate(), InvalidInput);
  const ModelParams theta{{1.0}, 0.0};
  CHECK(validity(theta, {{1.0}, {-1.0}, {0.0}, {2.0}}) == doctest::Approx(0.75));
  CHECK_THROWS_AS(validity(theta, {}), InvalidInput);
}

}  // TEST_SUITE
