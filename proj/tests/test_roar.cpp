#include <doctest.h>

#include <cmath>
#include <random>

#include "recourse/roar.hpp"
#include "recourse/tradeoff.hpp"
#include "test_util.hpp"

using namespace recourse;

TEST_SUITE("roar") {

TEST_CASE("a lambda above every adversarial weight leaves x0 in place") {
  RecourseQuery q;
  q.x0 = {0.5, -0.5};
  q.lambda = 1.0;
  const Neighborhood n{ModelParams{{0.6, -0.4}, 0.0}, 0.2};
  const RecoursePlan p = roar_recourse(q, n);
  CHECK(p.x_prime == q.x0);
}

TEST_CASE("converges to the exact answer on the single-feature instance") {
  RecourseQuery q;
  q.x0 = {0.0};
  q.lambda = 0.1;
  const Neighborhood n{ModelParams{{1.0}, 0.0}, 0.5, false};
  RoarConfig cfg;
  cfg.learning_rate = 0.1;
  cfg.max_iters = 20000;
  const RecoursePlan p = roar_recourse(q, n, cfg);
  CHECK(std::abs(p.x_prime[0] - 2.772588722239781) <= 1e-2);
}

TEST_CASE("never beats the exact solver and respects immutability") {
  std::mt19937_64 rng(55);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t d = 1 + static_cast<std::size_t>(trial % 4);
    RecourseQuery q;
    q.x0 = testutil::uniform_vector(rng, d, -2.0, 2.0);
    q.lambda = 0.1 + 0.05 * (trial % 5);
    if (d > 1) {
      q.immutable.assign(d, false);
      q.immutable[0] = true;
    }
    const Neighborhood n{ModelParams{testutil::uniform_vector(rng, d, -1.0, 1.0), 0.1}, 0.2};
    const RecoursePlan roar = roar_recourse(q, n);
    CHECK(robustness(q, n, roar.x_prime) >= -1e-9);
    if (d > 1) CHECK(roar.x_prime[0] == q.x0[0]);
    CHECK(roar.worst_case_total == doctest::Approx(worst_case_total(q, n, roar.x_prime)));
  }
}

}  // TEST_SUITE
